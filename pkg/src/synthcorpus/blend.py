"""Blend planning: token accounting, fertility, sampling schedules.

A blend is a set of named components (language, provenance, token
budget, sampling weight). Accounting sums budgets per language and
provenance and checks them against the declared target; disagreements
are surfaced, never silently reconciled. Schedules draw components in
proportion to weight and walk each component's documents without
replacement per epoch, reshuffling between epochs, all from one seed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Optional

import numpy as np

from .corpus import Document, PROVENANCES
from .tokenizers import Tokenizer

logger = logging.getLogger(__name__)

MISMATCH_TOLERANCE = 0.005  # fraction of target


class BlendError(ValueError):
    """Invalid blend specification or strict-mode accounting failure."""


@dataclass(frozen=True)
class BlendComponent:
    name: str
    lang: str
    provenance: str
    token_count: int
    weight: float
    doc_count: int = 0
    shards: tuple[str, ...] = ()

    def __post_init__(self):
        if self.token_count < 0:
            raise BlendError(f"component {self.name}: token_count must be >= 0")
        if self.weight <= 0:
            raise BlendError(f"component {self.name}: weight must be > 0")
        if self.provenance not in PROVENANCES:
            raise BlendError(f"component {self.name}: bad provenance {self.provenance!r}")


@dataclass(frozen=True)
class BlendSpec:
    components: tuple[BlendComponent, ...]
    target_total_tokens: Optional[int] = None
    seed: int = 0
    equal_language_mix: bool = False

    def __post_init__(self):
        names = [c.name for c in self.components]
        if len(names) != len(set(names)):
            raise BlendError(f"duplicate component names in {names}")

    def to_dict(self) -> dict:
        return {
            "components": [
                {
                    "name": c.name,
                    "lang": c.lang,
                    "provenance": c.provenance,
                    "token_count": c.token_count,
                    "weight": c.weight,
                    "doc_count": c.doc_count,
                    "shards": list(c.shards),
                }
                for c in self.components
            ],
            "target_total_tokens": self.target_total_tokens,
            "seed": self.seed,
            "equal_language_mix": self.equal_language_mix,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "BlendSpec":
        return cls(
            components=tuple(
                BlendComponent(
                    name=c["name"],
                    lang=c["lang"],
                    provenance=c["provenance"],
                    token_count=c["token_count"],
                    weight=c["weight"],
                    doc_count=c.get("doc_count", 0),
                    shards=tuple(c.get("shards", ())),
                )
                for c in d["components"]
            ),
            target_total_tokens=d.get("target_total_tokens"),
            seed=d.get("seed", 0),
            equal_language_mix=d.get("equal_language_mix", False),
        )


@dataclass(frozen=True)
class TokenAccount:
    per_component: Mapping[str, int]
    by_lang: Mapping[str, int]
    by_provenance: Mapping[str, int]
    total: int
    target: Optional[int]
    warnings: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "per_component": dict(self.per_component),
            "by_lang": dict(self.by_lang),
            "by_provenance": dict(self.by_provenance),
            "total": self.total,
            "target": self.target,
            "warnings": list(self.warnings),
        }


def account_tokens(spec: BlendSpec, strict: bool = False) -> TokenAccount:
    """Sum declared budgets; surface target and language-mix mismatches.

    With strict=True a mismatch beyond 0.5% of target raises instead of
    warning, with the per-component breakdown in the message.
    """
    per_component: dict[str, int] = {}
    by_lang: dict[str, int] = {}
    by_provenance: dict[str, int] = {}
    total = 0
    for c in spec.components:
        per_component[c.name] = c.token_count
        by_lang[c.lang] = by_lang.get(c.lang, 0) + c.token_count
        by_provenance[c.provenance] = (
            by_provenance.get(c.provenance, 0) + c.token_count
        )
        total += c.token_count
    warnings: list[str] = []
    if spec.target_total_tokens is not None and spec.target_total_tokens > 0:
        target = spec.target_total_tokens
        mismatch = abs(total - target) / target
        if mismatch > MISMATCH_TOLERANCE:
            warnings.append(
                f"declared target {target} tokens but components sum to {total} "
                f"({mismatch:.1%} off): " + ", ".join(
                    f"{name}={count}" for name, count in per_component.items()
                )
            )
    if spec.equal_language_mix and len(by_lang) >= 2 and total > 0:
        lo = min(by_lang.values())
        hi = max(by_lang.values())
        if (hi - lo) / total > MISMATCH_TOLERANCE:
            warnings.append(
                f"equal language mix declared but totals differ: {dict(by_lang)}"
            )
    for message in warnings:
        if strict:
            raise BlendError(message)
        logger.warning("%s", message)
    return TokenAccount(
        per_component=per_component,
        by_lang=by_lang,
        by_provenance=by_provenance,
        total=total,
        target=spec.target_total_tokens,
        warnings=tuple(warnings),
    )


@dataclass(frozen=True)
class FertilityReport:
    tokenizer_id: str
    tokens_per_word: float
    word_count: int
    token_count: int


def fertility(docs: Iterable[Document], tokenizer: Tokenizer) -> FertilityReport:
    """Subword tokens per whitespace word over the stream's content text."""
    words = 0
    tokens = 0
    for doc in docs:
        content = doc.content_text()
        words += len(content.split())
        tokens += len(tokenizer.tokenize(content))
    if words == 0:
        raise BlendError("fertility undefined: stream contains no words")
    return FertilityReport(
        tokenizer_id=tokenizer.tokenizer_id,
        tokens_per_word=tokens / words,
        word_count=words,
        token_count=tokens,
    )


@dataclass(frozen=True)
class ScheduleEntry:
    step: int
    component: str
    doc_index: int


@dataclass(frozen=True)
class ScheduleReport:
    draws_per_component: Mapping[str, int]
    epochs_per_component: Mapping[str, int]
    multi_epoch: bool


def plan_schedule(
    spec: BlendSpec, batch_size: int, steps: int
) -> tuple[list[ScheduleEntry], ScheduleReport]:
    """Deterministic weighted schedule of (step, component, doc index).

    Component draws follow normalized weights; within a component,
    document indices are epoch permutations (no index repeats until all
    are used) reshuffled between epochs. Needing more draws than a
    component has documents is allowed and reported as multi-epoch.
    """
    if batch_size < 1 or steps < 1:
        raise BlendError("batch_size and steps must be >= 1")
    if not spec.components:
        raise BlendError("cannot schedule an empty blend")
    for c in spec.components:
        if c.doc_count < 1:
            raise BlendError(f"component {c.name}: doc_count must be >= 1 to schedule")
    rng = np.random.Generator(np.random.PCG64(spec.seed))
    weights = np.array([c.weight for c in spec.components], dtype=float)
    probs = weights / weights.sum()
    total = steps * batch_size
    draws = rng.choice(len(spec.components), size=total, p=probs)
    counts = np.bincount(draws, minlength=len(spec.components))
    index_streams: list[np.ndarray] = []
    epochs: dict[str, int] = {}
    for i, c in enumerate(spec.components):
        need = int(counts[i])
        n_epochs = max(1, math.ceil(need / c.doc_count))
        perms = [rng.permutation(c.doc_count) for _ in range(n_epochs)]
        index_streams.append(np.concatenate(perms)[:need] if need else np.array([], dtype=int))
        epochs[c.name] = n_epochs if need else 0
    cursors = [0] * len(spec.components)
    entries: list[ScheduleEntry] = []
    for slot, comp_idx in enumerate(draws):
        ci = int(comp_idx)
        doc_index = int(index_streams[ci][cursors[ci]])
        cursors[ci] += 1
        entries.append(
            ScheduleEntry(
                step=slot // batch_size,
                component=spec.components[ci].name,
                doc_index=doc_index,
            )
        )
    report = ScheduleReport(
        draws_per_component={
            c.name: int(counts[i]) for i, c in enumerate(spec.components)
        },
        epochs_per_component=epochs,
        multi_epoch=any(
            int(counts[i]) > c.doc_count for i, c in enumerate(spec.components)
        ),
    )
    if report.multi_epoch:
        logger.info("schedule spans multiple epochs: %s", dict(epochs))
    return entries, report


def sample_schedule(
    spec: BlendSpec, batch_size: int, steps: int
) -> Iterator[tuple[int, str, int]]:
    """Stream of (step, component name, doc index); see plan_schedule."""
    entries, _ = plan_schedule(spec, batch_size, steps)
    for e in entries:
        yield e.step, e.component, e.doc_index


BILLION = 1_000_000_000


def default_pretrain_blend(
    real_weight: float = 2.0, synthetic_weight: float = 1.0
) -> BlendSpec:
    """The reference continued-pretraining blend (token budgets in B).

    Hindi: 40B real web + 60B translated = 100B, doubled to 220B by the
    transliterated copy; English: 200B real. The declared 400B
    equal-mix target intentionally disagrees with the 420B component
    sum; accounting surfaces that rather than resolving it.
    """
    return BlendSpec(
        components=(
            BlendComponent(
                name="real-hi",
                lang="hi",
                provenance="real-web",
                token_count=40 * BILLION,
                weight=real_weight,
            ),
            BlendComponent(
                name="translated-hi",
                lang="hi",
                provenance="synthetic-translated",
                token_count=60 * BILLION,
                weight=synthetic_weight,
            ),
            BlendComponent(
                name="transliterated-hi",
                lang="hi",
                provenance="synthetic-transliterated",
                token_count=120 * BILLION,
                weight=synthetic_weight,
            ),
            BlendComponent(
                name="real-en",
                lang="en",
                provenance="real-web",
                token_count=200 * BILLION,
                weight=real_weight,
            ),
        ),
        target_total_tokens=400 * BILLION,
        equal_language_mix=True,
    )
