"""Character n-gram F-score, checked against a brute-force oracle."""

import random

from hypothesis import given, settings, strategies as st

from synthcorpus.chrf import chrf_similarity


def oracle_chrf(a: str, b: str, max_order: int = 6, beta: float = 2.0) -> float:
    """Straightforward re-derivation: clipped n-gram matches per order,
    effective-order averaging, F-beta with hypothesis precision."""
    a = "".join(a.split())
    b = "".join(b.split())
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0

    def grams(s, n):
        out = {}
        for i in range(len(s) - n + 1):
            g = s[i : i + n]
            out[g] = out.get(g, 0) + 1
        return out

    precisions, recalls = [], []
    for n in range(1, max_order + 1):
        ga, gb = grams(a, n), grams(b, n)
        if not ga or not gb:
            continue
        overlap = sum(min(c, gb.get(g, 0)) for g, c in ga.items())
        precisions.append(overlap / sum(ga.values()))
        recalls.append(overlap / sum(gb.values()))
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0:
        return 0.0
    b2 = beta * beta
    return (1 + b2) * p * r / (b2 * p + r)


def test_identical_strings_score_one():
    assert chrf_similarity("namaste duniya", "namaste duniya") == 1.0


def test_disjoint_strings_score_zero():
    assert chrf_similarity("aaaa", "bbbb") == 0.0


def test_empty_conventions():
    assert chrf_similarity("", "") == 1.0
    assert chrf_similarity("x", "") == 0.0
    assert chrf_similarity("", "x") == 0.0
    # Whitespace-only collapses to empty.
    assert chrf_similarity("   ", "\t\n") == 1.0


def test_whitespace_ignored_by_default():
    assert chrf_similarity("ab cd", "abcd") == 1.0
    assert chrf_similarity("a b c d", "abcd") == 1.0


def test_recall_weighted_asymmetry():
    # beta=2 weights recall (coverage of b) over precision.
    partial = chrf_similarity("abcd", "abcdefgh")
    padded = chrf_similarity("abcdefgh", "abcd")
    assert 0 < partial < 1 and 0 < padded < 1
    assert partial != padded


def test_near_miss_scores_between():
    s = chrf_similarity("kitten", "sitten")
    assert 0.0 < s < 1.0


def test_matches_oracle_on_hand_pair():
    a, b = "abcab", "abcab"
    assert abs(chrf_similarity(a, b) - oracle_chrf(a, b)) < 1e-12


@settings(max_examples=300)
@given(
    st.text(alphabet="abcde ", max_size=30),
    st.text(alphabet="abcde ", max_size=30),
)
def test_matches_oracle_fuzz(a, b):
    assert abs(chrf_similarity(a, b) - oracle_chrf(a, b)) < 1e-12


@settings(max_examples=100)
@given(st.text(max_size=40), st.text(max_size=40))
def test_symmetric_bounds_and_self_similarity(a, b):
    s = chrf_similarity(a, b)
    assert 0.0 <= s <= 1.0
    assert chrf_similarity(a, a) == 1.0


def test_corruption_monotone_in_expectation():
    rng = random.Random(0)
    base = " ".join("word%d" % i for i in range(40))
    scores = []
    for rate in (0.0, 0.1, 0.3, 0.5):
        corrupted = "".join(
            (rng.choice("xyz") if (not c.isspace() and rng.random() < rate) else c)
            for c in base
        )
        scores.append(chrf_similarity(corrupted, base))
    assert scores[0] == 1.0
    assert all(a > b for a, b in zip(scores, scores[1:]))
