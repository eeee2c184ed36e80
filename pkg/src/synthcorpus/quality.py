"""Perplexity-based quality filtering calibrated to a target discard rate.

Documents are scored by mean negative log-probability per token (nats)
under an n-gram model trained on trusted text; the discard threshold is
the empirical (1-rate)-quantile (nearest-rank) of calibration scores,
and documents scoring strictly above it are discarded.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

from .corpus import Document, QualityScores
from .ngram_lm import NGramModel, log_perplexity
from .tokenizers import Tokenizer


@dataclass(frozen=True)
class FilterCalibration:
    threshold: float  # log-perplexity cutoff (nats/token)
    target_discard_rate: float
    achieved_rate: float

    @classmethod
    def keep_all(cls) -> "FilterCalibration":
        return cls(threshold=math.inf, target_discard_rate=0.0, achieved_rate=0.0)


def nearest_rank(sorted_scores: Sequence[float], q: float) -> float:
    """Nearest-rank q-quantile: the ceil(q*n)-th smallest value.

    A small epsilon guards against float products like 0.95*20 landing
    just above an integer and shifting the rank by one.
    """
    n = len(sorted_scores)
    rank = math.ceil(q * n - 1e-9)
    rank = min(max(rank, 1), n)
    return sorted_scores[rank - 1]


def calibrate_threshold(
    scores: Sequence[float], target_discard_rate: float
) -> FilterCalibration:
    """Threshold such that the top target fraction of scores sits above it."""
    if not 0.0 < target_discard_rate < 1.0:
        raise ValueError(
            f"target_discard_rate must be in (0, 1), got {target_discard_rate}"
        )
    scores = list(scores)
    if not scores:
        raise ValueError("cannot calibrate on an empty score list")
    ordered = sorted(scores)
    threshold = nearest_rank(ordered, 1.0 - target_discard_rate)
    above = sum(1 for s in scores if s > threshold)
    return FilterCalibration(
        threshold=threshold,
        target_discard_rate=target_discard_rate,
        achieved_rate=above / len(scores),
    )


def score_corpus(
    docs: Iterable[Document], model: NGramModel, tokenizer: Tokenizer
) -> list[float]:
    return [log_perplexity(model, doc, tokenizer) for doc in docs]


def filter_corpus(
    docs: Iterable[Document],
    model: NGramModel,
    calibration: Optional[FilterCalibration],
    tokenizer: Tokenizer,
) -> tuple[list[Document], list[Document]]:
    """Partition docs into (kept, discarded), order preserved.

    Every output document carries its log-perplexity in QualityScores.
    A missing calibration keeps everything (threshold +inf).
    """
    if calibration is None:
        calibration = FilterCalibration.keep_all()
    kept: list[Document] = []
    discarded: list[Document] = []
    for doc in docs:
        score = log_perplexity(model, doc, tokenizer)
        prior = doc.quality
        scored = doc.with_quality(
            QualityScores(
                log_perplexity=score,
                roundtrip_similarity=(
                    prior.roundtrip_similarity if prior is not None else None
                ),
            )
        )
        if score > calibration.threshold:
            discarded.append(scored)
        else:
            kept.append(scored)
    return kept, discarded
