"""Count-based n-gram language model for perplexity filtering.

Only top-order n-gram counts are stored; every lower-order table is the
prefix marginal of the order above it, so shard-merged training is
exactly equal to whole-corpus training and per-context distributions
sum to one by telescoping. Smoothing is interpolated Kneser-Ney with a
single discount per order (continuation counts derived from the stored
tables), falling back to add-k (k=0.1) when count-of-count statistics
degenerate (n1=0 or n2=0 at any order).
"""

from __future__ import annotations

import gzip
import json
import math
from pathlib import Path
from typing import Dict, Iterable, Optional, Sequence, Tuple

from .corpus import Document
from .tokenizers import Tokenizer

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

SMOOTHING_MODES = ("kn", "add-k", "mle")

Gram = Tuple[str, ...]
Counts = Dict[Gram, int]


class TokenizerMismatchError(ValueError):
    """Model was trained under a different tokenizer-id."""


class EmptyCorpusError(ValueError):
    """No countable tokens in the training stream."""


def training_units(doc: Document) -> list[str]:
    """Text units the LM sees: sentences when segmented, else cell text."""
    units = [text for _, _, _, text in doc.sentences()]
    if units:
        return units
    units = []
    for block in doc.blocks:
        for cell in block.cells:
            content = cell.content(block.lines)
            if content.strip():
                units.append(content)
    return units


def count_ngrams(docs: Iterable[Document], tokenizer: Tokenizer, order: int) -> Counts:
    """Top-order n-gram counts over the stream.

    For order >= 2 each unit is padded with (order-1) BOS and one EOS;
    order-1 counts are raw token counts with no boundary padding.
    """
    if order < 1:
        raise ValueError(f"order must be >= 1, got {order}")
    counts: Counts = {}
    for doc in docs:
        for unit in training_units(doc):
            tokens = tokenizer.tokenize(unit)
            if not tokens:
                continue
            if order == 1:
                for tok in tokens:
                    gram = (tok,)
                    counts[gram] = counts.get(gram, 0) + 1
            else:
                padded = [BOS] * (order - 1) + tokens + [EOS]
                for i in range(len(padded) - order + 1):
                    gram = tuple(padded[i : i + order])
                    counts[gram] = counts.get(gram, 0) + 1
    return counts


def merge_counts(*count_maps: Counts) -> Counts:
    """Pointwise integer sum; training is associative over shard merges."""
    merged: Counts = {}
    for counts in count_maps:
        for gram, c in counts.items():
            merged[gram] = merged.get(gram, 0) + c
    return merged


class NGramModel:
    """Immutable n-gram model built from a top-order count table."""

    def __init__(
        self,
        order: int,
        tokenizer_id: str,
        counts: Counts,
        smoothing: str = "kn",
        k: float = 0.1,
        event_count_override: Optional[int] = None,
    ):
        if order < 1:
            raise ValueError(f"order must be >= 1, got {order}")
        if smoothing not in SMOOTHING_MODES:
            raise ValueError(f"unknown smoothing {smoothing!r}")
        self.order = order
        self.tokenizer_id = tokenizer_id
        self.counts = dict(counts)
        self.k = k
        self.vocab = frozenset(
            tok for gram in self.counts for tok in gram if tok != BOS
        )
        self._event_count = (
            event_count_override
            if event_count_override is not None
            else len(self.vocab) + 1  # + unk
        )
        self._build_tables()
        self.smoothing = self._effective_smoothing(smoothing)

    # table construction -------------------------------------------------

    def _build_tables(self):
        n = self.order
        tables: dict[int, Counts] = {n: self.counts}
        for m in range(n - 1, -1, -1):
            marg: Counts = {}
            for gram, c in tables[m + 1].items():
                prefix = gram[:-1]
                marg[prefix] = marg.get(prefix, 0) + c
            tables[m] = marg
        self._tables = tables

        # Continuation tables: cont[m][u] = distinct left extensions of
        # the m-gram u in the stored (m+1)-order table. Keys ending in
        # BOS are dropped: BOS is context-only, never a predicted event,
        # and keeping them would break per-context normalization.
        cont: dict[int, Counts] = {}
        for m in range(n - 1, 0, -1):
            cc: Counts = {}
            for gram in tables[m + 1]:
                if gram[-1] == BOS:
                    continue
                suffix = gram[1:]
                cc[suffix] = cc.get(suffix, 0) + 1
            cont[m] = cc

        # Numerator table per interpolation level, plus per-context
        # sums/type counts and the level discount.
        self._num: dict[int, Counts] = {}
        self._ctx_sum: dict[int, Counts] = {}
        self._ctx_types: dict[int, Counts] = {}
        self._discount: dict[int, float] = {}
        self._kn_degenerate = False
        for m in range(1, n + 1):
            num = self.counts if m == n else cont[m]
            sums: Counts = {}
            types: Counts = {}
            n1 = 0
            n2 = 0
            for gram, c in num.items():
                h = gram[:-1]
                sums[h] = sums.get(h, 0) + c
                types[h] = types.get(h, 0) + 1
                if c == 1:
                    n1 += 1
                elif c == 2:
                    n2 += 1
            self._num[m] = num
            self._ctx_sum[m] = sums
            self._ctx_types[m] = types
            if n1 == 0 or n2 == 0:
                self._kn_degenerate = True
                self._discount[m] = 0.0
            else:
                self._discount[m] = n1 / (n1 + 2.0 * n2)

    def _effective_smoothing(self, requested: str) -> str:
        if requested == "kn" and (self._kn_degenerate or not self.counts):
            return "add-k"
        return requested

    # probabilities -------------------------------------------------------

    @property
    def event_count(self) -> int:
        """Size of the event space (vocab plus unk)."""
        return self._event_count

    def map_event(self, token: str) -> str:
        return token if token in self.vocab else UNK

    def map_context_token(self, token: str) -> str:
        if token == BOS or token in self.vocab:
            return token
        return UNK

    def _normalize_context(self, context: Sequence[str]) -> Gram:
        width = self.order - 1
        ctx = tuple(self.map_context_token(t) for t in context)
        if len(ctx) > width:
            ctx = ctx[len(ctx) - width :]
        elif len(ctx) < width:
            ctx = (BOS,) * (width - len(ctx)) + ctx
        return ctx

    def prob(self, word: str, context: Sequence[str] = ()) -> float:
        """p(word | context); unknown tokens map to unk on both sides."""
        w = self.map_event(word)
        ctx = self._normalize_context(context)
        if self.smoothing == "kn":
            return self._p_kn(w, ctx, self.order)
        if self.smoothing == "add-k":
            c = self.counts.get(ctx + (w,), 0)
            denom = self._tables[self.order - 1].get(ctx, 0)
            return (c + self.k) / (denom + self.k * self._event_count)
        c = self.counts.get(ctx + (w,), 0)
        denom = self._tables[self.order - 1].get(ctx, 0)
        return c / denom if denom else 0.0

    def _p_kn(self, w: str, ctx: Gram, m: int) -> float:
        if m == 0:
            return 1.0 / self._event_count
        total = self._ctx_sum[m].get(ctx, 0)
        if total == 0:
            return self._p_kn(w, ctx[1:], m - 1)
        c = self._num[m].get(ctx + (w,), 0)
        d = self._discount[m]
        types = self._ctx_types[m][ctx]
        backoff = self._p_kn(w, ctx[1:], m - 1)
        return max(c - d, 0.0) / total + (d * types / total) * backoff

    def logprob(self, word: str, context: Sequence[str] = ()) -> float:
        return math.log(self.prob(word, context))

    def unit_nll(self, tokens: Sequence[str]) -> tuple[float, int]:
        """Total negative log-probability (nats) and event count.

        Events are the unit's tokens only; BOS padding supplies context
        and EOS is never scored (a one-token doc of an unknown word
        scores exactly -log p(unk)).
        """
        n = self.order
        mapped = [self.map_event(t) for t in tokens]
        padded = [BOS] * (n - 1) + mapped
        nll = 0.0
        for i, w in enumerate(mapped):
            ctx = tuple(padded[i : i + n - 1])
            p = self._p_kn(w, ctx, n) if self.smoothing == "kn" else self.prob(w, ctx)
            if p <= 0.0:
                return math.inf, len(mapped)
            nll -= math.log(p)
        return nll, len(mapped)

    def context_sum(self, context: Sequence[str]) -> float:
        """Σ p(w|context) over vocab ∪ {unk}; 1.0 up to float error."""
        events = list(self.vocab) + [UNK]
        return sum(self.prob(w, context) for w in events)


def build_model(
    counts: Counts,
    order: int,
    tokenizer_id: str,
    smoothing: str = "kn",
    k: float = 0.1,
) -> NGramModel:
    if not counts:
        raise EmptyCorpusError("no n-gram counts; corpus had no tokens")
    return NGramModel(order, tokenizer_id, counts, smoothing=smoothing, k=k)


def train_lm(
    docs: Iterable[Document],
    tokenizer: Tokenizer,
    order: int,
    smoothing: str = "kn",
    k: float = 0.1,
) -> NGramModel:
    counts = count_ngrams(docs, tokenizer, order)
    return build_model(counts, order, tokenizer.tokenizer_id, smoothing, k)


def uniform_model(event_count: int, tokenizer_id: str = "whitespace") -> NGramModel:
    """Unigram model assigning 1/event_count to every token."""
    if event_count < 1:
        raise ValueError("event_count must be >= 1")
    return NGramModel(
        1, tokenizer_id, {}, smoothing="add-k", event_count_override=event_count
    )


def document_nll(
    model: NGramModel, doc: Document, tokenizer: Tokenizer
) -> tuple[float, int]:
    if tokenizer.tokenizer_id != model.tokenizer_id:
        raise TokenizerMismatchError(
            f"model trained with {model.tokenizer_id!r}, "
            f"scoring attempted with {tokenizer.tokenizer_id!r}"
        )
    nll = 0.0
    events = 0
    for unit in training_units(doc):
        tokens = tokenizer.tokenize(unit)
        if not tokens:
            continue
        unit_nll, unit_events = model.unit_nll(tokens)
        nll += unit_nll
        events += unit_events
    return nll, events


def log_perplexity(model: NGramModel, doc: Document, tokenizer: Tokenizer) -> float:
    """Mean negative log-probability per token (nats); 0.0 if no tokens."""
    nll, events = document_nll(model, doc, tokenizer)
    return nll / events if events else 0.0


def perplexity(model: NGramModel, doc: Document, tokenizer: Tokenizer) -> float:
    return math.exp(log_perplexity(model, doc, tokenizer))


MODEL_FORMAT = "ngram-counts-v1"


def save_model(model: NGramModel, path) -> None:
    """JSON count file (gzip by suffix): header + sorted top-order counts."""
    payload = {
        "format": MODEL_FORMAT,
        "order": model.order,
        "tokenizer_id": model.tokenizer_id,
        "smoothing": model.smoothing,
        "k": model.k,
        "event_count": model.event_count,
        "counts": {" ".join(gram): c for gram, c in model.counts.items()},
    }
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True)
    path = Path(path)
    if str(path).endswith(".gz"):
        # mtime pinned to 0 so equal content gives equal bytes.
        data = gzip.compress(text.encode("utf-8"), mtime=0)
        path.write_bytes(data)
    else:
        path.write_text(text, encoding="utf-8")


def load_model(path) -> NGramModel:
    path = Path(path)
    if str(path).endswith(".gz"):
        with gzip.open(path, "rt", encoding="utf-8") as fh:
            payload = json.load(fh)
    else:
        payload = json.loads(path.read_text(encoding="utf-8"))
    if payload.get("format") != MODEL_FORMAT:
        raise ValueError(f"unrecognized model file format in {path}")
    counts = {tuple(key.split(" ")): c for key, c in payload["counts"].items()}
    model = NGramModel(
        payload["order"],
        payload["tokenizer_id"],
        counts,
        smoothing=payload["smoothing"],
        k=payload["k"],
        event_count_override=payload["event_count"],
    )
    return model
