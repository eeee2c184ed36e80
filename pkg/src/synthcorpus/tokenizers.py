"""Deterministic tokenizers used for counting, LM training, and fertility.

Three modes: whitespace (split on runs of whitespace), char (every
non-whitespace character), and vocab-greedy (longest-prefix match
against a fixed vocabulary with byte-fallback tokens, applied within
whitespace-delimited words). The tokenizer-id of a vocab tokenizer
embeds a hash of its vocabulary so models remember what produced their
counts.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Protocol, Sequence, runtime_checkable

MODES = ("whitespace", "char", "vocab-greedy")

REFERENCE_VOCAB_RESOURCE = "reference_vocab.txt"


@runtime_checkable
class Tokenizer(Protocol):
    tokenizer_id: str

    def tokenize(self, text: str) -> list[str]: ...


@dataclass(frozen=True)
class WhitespaceTokenizer:
    tokenizer_id: str = "whitespace"

    def tokenize(self, text: str) -> list[str]:
        return text.split()


@dataclass(frozen=True)
class CharTokenizer:
    tokenizer_id: str = "char"

    def tokenize(self, text: str) -> list[str]:
        return [ch for ch in text if not ch.isspace()]


def _byte_fallback(ch: str) -> list[str]:
    return [f"<0x{b:02X}>" for b in ch.encode("utf-8")]


class VocabGreedyTokenizer:
    """Longest-prefix segmentation against a fixed vocabulary.

    Words (whitespace-delimited) are segmented independently; at each
    position the longest vocab entry matching the remaining word is
    taken, and a character with no match at all becomes its UTF-8
    byte-fallback tokens.
    """

    def __init__(self, vocab: Sequence[str], tokenizer_id: Optional[str] = None):
        tokens = []
        seen = set()
        for tok in vocab:
            if not tok or any(ch.isspace() for ch in tok):
                raise ValueError(f"vocab token {tok!r} is empty or has whitespace")
            if tok not in seen:
                seen.add(tok)
                tokens.append(tok)
        if not tokens:
            raise ValueError("empty vocabulary")
        self.vocab = tuple(tokens)
        self._set = seen
        self._max_len = max(len(t) for t in tokens)
        if tokenizer_id is None:
            digest = hashlib.sha256("\n".join(tokens).encode("utf-8")).hexdigest()
            tokenizer_id = f"vocab-greedy:{digest[:12]}"
        self.tokenizer_id = tokenizer_id

    def tokenize(self, text: str) -> list[str]:
        out: list[str] = []
        for word in text.split():
            i = 0
            n = len(word)
            while i < n:
                match = None
                for length in range(min(self._max_len, n - i), 0, -1):
                    candidate = word[i : i + length]
                    if candidate in self._set:
                        match = candidate
                        break
                if match is None:
                    out.extend(_byte_fallback(word[i]))
                    i += 1
                else:
                    out.append(match)
                    i += len(match)
        return out


def load_vocab(path) -> list[str]:
    """One token per line; blank lines and '#' comment lines skipped."""
    tokens = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            tokens.append(line)
    return tokens


def make_tokenizer(mode: str, vocab_path=None) -> Tokenizer:
    if mode == "whitespace":
        return WhitespaceTokenizer()
    if mode == "char":
        return CharTokenizer()
    if mode == "vocab-greedy":
        if vocab_path is None:
            return reference_tokenizer()
        return VocabGreedyTokenizer(load_vocab(vocab_path))
    raise ValueError(f"unknown tokenizer mode {mode!r}; expected one of {MODES}")


def reference_tokenizer() -> VocabGreedyTokenizer:
    """The bundled subword vocabulary (Devanagari-heavy merge budget)."""
    text = resources.files(__package__).joinpath(
        "data", REFERENCE_VOCAB_RESOURCE
    ).read_text("utf-8")
    tokens = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    return VocabGreedyTokenizer(tokens)
