"""Character n-gram F-score (chrF) for round-trip translation similarity.

Scores are computed over character n-grams of order 1..6 with beta=2
(recall weighted twice as much as precision). Whitespace is stripped
before n-gram extraction by default; case folding is off by default.
"""

from __future__ import annotations

from collections import Counter

DEFAULT_MAX_ORDER = 6
DEFAULT_BETA = 2.0


def _char_ngrams(text: str, n: int) -> Counter:
    return Counter(text[i : i + n] for i in range(len(text) - n + 1))


def chrf_similarity(
    a: str,
    b: str,
    max_order: int = DEFAULT_MAX_ORDER,
    beta: float = DEFAULT_BETA,
    remove_whitespace: bool = True,
    fold_case: bool = False,
) -> float:
    """chrF between two strings, in [0, 1].

    Orders where either side has no n-grams are skipped (effective-order
    averaging), so identical strings score exactly 1.0 regardless of
    length. Two empty strings score 1.0; one empty side scores 0.0.
    """
    if fold_case:
        a, b = a.lower(), b.lower()
    if remove_whitespace:
        a = "".join(a.split())
        b = "".join(b.split())
    if not a and not b:
        return 1.0
    if not a or not b:
        return 0.0
    prec_sum = 0.0
    rec_sum = 0.0
    effective_orders = 0
    for n in range(1, max_order + 1):
        grams_a = _char_ngrams(a, n)
        grams_b = _char_ngrams(b, n)
        total_a = sum(grams_a.values())
        total_b = sum(grams_b.values())
        if total_a == 0 or total_b == 0:
            continue
        overlap = sum((grams_a & grams_b).values())
        prec_sum += overlap / total_a
        rec_sum += overlap / total_b
        effective_orders += 1
    if effective_orders == 0:
        return 0.0
    precision = prec_sum / effective_orders
    recall = rec_sum / effective_orders
    denom = beta * beta * precision + recall
    if denom == 0.0:
        return 0.0
    return (1.0 + beta * beta) * precision * recall / denom
