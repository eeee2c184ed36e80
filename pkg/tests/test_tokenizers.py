"""Tokenizer modes and the bundled reference vocabulary."""

import pytest
from hypothesis import given, settings, strategies as st

from synthcorpus.tokenizers import (
    CharTokenizer,
    VocabGreedyTokenizer,
    WhitespaceTokenizer,
    load_vocab,
    make_tokenizer,
    reference_tokenizer,
)


def test_whitespace_tokenizer():
    tok = WhitespaceTokenizer()
    assert tok.tokenize("  one\ttwo\nthree ") == ["one", "two", "three"]
    assert tok.tokenize("") == []
    assert tok.tokenizer_id == "whitespace"


def test_char_tokenizer_skips_spaces():
    tok = CharTokenizer()
    assert tok.tokenize("ab cd") == ["a", "b", "c", "d"]
    assert tok.tokenizer_id == "char"


def test_vocab_greedy_longest_prefix():
    tok = VocabGreedyTokenizer(["abc", "ab", "a", "b", "c", "d"])
    assert tok.tokenize("abcd") == ["abc", "d"]
    assert tok.tokenize("ab abc") == ["ab", "abc"]


def test_vocab_greedy_byte_fallback():
    tok = VocabGreedyTokenizer(["a"])
    assert tok.tokenize("aQ") == ["a", "<0x51>"]
    # Multi-byte characters fall back to one token per byte.
    assert tok.tokenize("क") == ["<0xE0>", "<0xA4>", "<0x95>"]


def test_vocab_greedy_rejects_bad_tokens():
    with pytest.raises(ValueError):
        VocabGreedyTokenizer([])
    with pytest.raises(ValueError):
        VocabGreedyTokenizer(["ok", "has space"])
    with pytest.raises(ValueError):
        VocabGreedyTokenizer([""])


def test_vocab_greedy_id_tracks_content():
    a = VocabGreedyTokenizer(["x", "y"])
    b = VocabGreedyTokenizer(["x", "y"])
    c = VocabGreedyTokenizer(["x", "z"])
    assert a.tokenizer_id == b.tokenizer_id != c.tokenizer_id
    assert a.tokenizer_id.startswith("vocab-greedy:")


def test_vocab_greedy_dedupes_preserving_order():
    a = VocabGreedyTokenizer(["x", "y", "x"])
    b = VocabGreedyTokenizer(["x", "y"])
    assert a.tokenizer_id == b.tokenizer_id


def test_load_vocab_skips_comments(tmp_path):
    path = tmp_path / "v.txt"
    path.write_text("# header\nalpha\n\nbeta\n")
    assert load_vocab(path) == ["alpha", "beta"]


def test_make_tokenizer_modes(tmp_path):
    assert isinstance(make_tokenizer("whitespace"), WhitespaceTokenizer)
    assert isinstance(make_tokenizer("char"), CharTokenizer)
    path = tmp_path / "v.txt"
    path.write_text("tok\n")
    assert isinstance(make_tokenizer("vocab-greedy", path), VocabGreedyTokenizer)
    with pytest.raises(ValueError):
        make_tokenizer("bpe")


def test_reference_tokenizer_loads_and_is_stable():
    tok = reference_tokenizer()
    assert tok.tokenizer_id == reference_tokenizer().tokenizer_id
    # Generator lexicon words are single tokens.
    assert len(tok.tokenize("पानी")) == 1


@settings(max_examples=200)
@given(st.text(max_size=60))
def test_vocab_greedy_total_and_lossless_within_words(text):
    tok = reference_tokenizer()
    tokens = tok.tokenize(text)
    rebuilt = []
    for t in tokens:
        if t.startswith("<0x") and t.endswith(">"):
            rebuilt.append(int(t[3:-1], 16))
        else:
            rebuilt.extend(t.encode("utf-8"))
    assert bytes(rebuilt) == "".join(text.split()).encode("utf-8")
