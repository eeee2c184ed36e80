"""Judge-LLM scoring and pairwise A/B preference aggregation.

judge_score builds a deterministic prompt from a rubric template (fact
mode includes reference facts), asks a judge client for a 1-5 verdict,
and parses the reply leniently: strict JSON first, then any JSON object
embedded in the text, then the first standalone digit 1-5. Items whose
replies stay unparseable after three attempts are flagged and excluded
from aggregates (never imputed). A/B verdicts aggregate into win/tie/
loss percentages with an order-bias breakdown.
"""

from __future__ import annotations

import hashlib
import json
import logging
import math
import os
import random
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from importlib import resources
from typing import Callable, Mapping, Optional, Sequence

logger = logging.getLogger(__name__)

MODES = ("fact", "open")
VERDICTS = ("a_wins", "b_wins", "tie")
MAX_ATTEMPTS = 3

_SCORE_RE = re.compile(r"(?<!\d)([1-5])(?!\d)")


class JudgeError(Exception):
    """Transport-level judge failure (after retries)."""


class ReplyParseError(ValueError):
    """Judge reply carries no usable 1-5 score."""


@dataclass(frozen=True)
class EvalItem:
    id: str
    lang: str
    domain: str
    question: str
    response: str
    reference_facts: Optional[str] = None


@dataclass(frozen=True)
class EvalRecord:
    item_id: str
    lang: str
    domain: str
    score: int
    rationale: str
    judge_model: str
    prompt_hash: str

    def __post_init__(self):
        if self.score not in (1, 2, 3, 4, 5):
            raise ValueError(f"score must be 1-5, got {self.score}")

    def to_dict(self) -> dict:
        return {
            "item_id": self.item_id,
            "lang": self.lang,
            "domain": self.domain,
            "score": self.score,
            "rationale": self.rationale,
            "judge_model": self.judge_model,
            "prompt_hash": self.prompt_hash,
        }


@dataclass(frozen=True)
class AbVerdict:
    prompt_id: str
    model_a: str
    model_b: str
    presented_first: str  # "a" or "b": which model's response was shown first
    verdict: str  # a_wins | b_wins | tie

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"verdict must be one of {VERDICTS}")
        if self.presented_first not in ("a", "b"):
            raise ValueError("presented_first must be 'a' or 'b'")


def load_rubric(mode: str) -> str:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    name = f"judge_rubric_{mode}.txt"
    return resources.files(__package__).joinpath("data", name).read_text("utf-8")


def build_prompt(item: EvalItem, mode: str, template: Optional[str] = None) -> str:
    if mode == "fact" and not item.reference_facts:
        raise ValueError(f"item {item.id}: fact mode requires reference_facts")
    if template is None:
        template = load_rubric(mode)
    return template.format(
        question=item.question,
        response=item.response,
        reference_facts=item.reference_facts or "",
    )


def prompt_hash(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()[:16]


def _json_candidates(text: str):
    yield text
    # fenced blocks
    for m in re.finditer(r"```(?:json)?\s*(.*?)```", text, flags=re.DOTALL):
        yield m.group(1)
    # balanced top-level {...} spans
    depth = 0
    start = None
    for i, ch in enumerate(text):
        if ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}" and depth > 0:
            depth -= 1
            if depth == 0 and start is not None:
                yield text[start : i + 1]


def parse_judge_reply(text: str) -> tuple[int, str]:
    """(score, rationale) from a judge reply, leniently."""
    for candidate in _json_candidates(text):
        try:
            obj = json.loads(candidate.strip())
        except (json.JSONDecodeError, ValueError):
            continue
        if isinstance(obj, Mapping) and "score" in obj:
            raw = obj["score"]
            if isinstance(raw, bool):
                continue
            if isinstance(raw, (int, float)) and float(raw).is_integer():
                score = int(raw)
                if 1 <= score <= 5:
                    return score, str(obj.get("rationale", ""))
    m = _SCORE_RE.search(text)
    if m:
        return int(m.group(1)), text.strip()
    raise ReplyParseError(f"no score 1-5 found in reply: {text[:80]!r}")


class MockJudgeClient:
    """Deterministic in-process judge for tests and offline runs.

    reply_fn maps the full prompt to a reply string; the default scores
    by a stable hash of the prompt (spread over 1-5).
    """

    model = "mock-judge"

    def __init__(self, reply_fn: Optional[Callable[[str], str]] = None):
        self._reply_fn = reply_fn or self._default_reply
        self.calls = 0

    @staticmethod
    def _default_reply(prompt: str) -> str:
        digest = hashlib.blake2b(prompt.encode("utf-8"), digest_size=4).digest()
        score = digest[0] % 5 + 1
        return json.dumps({"score": score, "rationale": "deterministic mock verdict"})

    def complete(self, messages: Sequence[Mapping[str, str]]) -> str:
        self.calls += 1
        prompt = messages[-1]["content"]
        return self._reply_fn(prompt)


class HttpJudgeClient:
    """Chat-style HTTP judge: POST {"model", "messages"} -> content."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key_env: str = "JUDGE_API_KEY",
        timeout: float = 60.0,
        retries: int = 3,
        backoff: float = 0.5,
        sleep: Callable[[float], None] = time.sleep,
    ):
        self.endpoint = endpoint
        self.model = model
        self.api_key_env = api_key_env
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._sleep = sleep

    def complete(self, messages: Sequence[Mapping[str, str]]) -> str:
        import requests

        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        body = {"model": self.model, "messages": list(messages)}
        last_error: Optional[Exception] = None
        for attempt in range(self.retries):
            try:
                reply = requests.post(
                    self.endpoint, json=body, headers=headers, timeout=self.timeout
                )
                reply.raise_for_status()
                payload = reply.json()
                if "content" in payload:
                    return payload["content"]
                return payload["choices"][0]["message"]["content"]
            except (requests.RequestException, KeyError, IndexError, ValueError) as exc:
                last_error = exc
                if attempt + 1 < self.retries:
                    self._sleep(self.backoff * 2**attempt)
        raise JudgeError(f"judge endpoint failed after {self.retries} attempts: {last_error}")


def judge_score(
    item: EvalItem,
    judge,
    mode: str = "fact",
    template: Optional[str] = None,
) -> EvalRecord:
    """One scored record; unparseable replies retried up to 3 attempts."""
    prompt = build_prompt(item, mode, template)
    messages = [{"role": "user", "content": prompt}]
    last_error: Optional[Exception] = None
    for _ in range(MAX_ATTEMPTS):
        reply = judge.complete(messages)
        try:
            score, rationale = parse_judge_reply(reply)
        except ReplyParseError as exc:
            last_error = exc
            continue
        return EvalRecord(
            item_id=item.id,
            lang=item.lang,
            domain=item.domain,
            score=score,
            rationale=rationale,
            judge_model=getattr(judge, "model", "unknown"),
            prompt_hash=prompt_hash(prompt),
        )
    raise ReplyParseError(
        f"item {item.id}: unparseable after {MAX_ATTEMPTS} attempts: {last_error}"
    )


def judge_batch(
    items: Sequence[EvalItem],
    judge,
    mode: str = "fact",
    template: Optional[str] = None,
    concurrency: int = 4,
) -> tuple[list[EvalRecord], list[str]]:
    """(records, flagged item ids); input order preserved in records."""
    if template is None:
        template = load_rubric(mode)

    def run(item: EvalItem):
        try:
            return judge_score(item, judge, mode, template)
        except ReplyParseError:
            return item.id

    if concurrency > 1:
        with ThreadPoolExecutor(max_workers=concurrency) as pool:
            results = list(pool.map(run, items))
    else:
        results = [run(item) for item in items]
    records = [r for r in results if isinstance(r, EvalRecord)]
    flagged = [r for r in results if isinstance(r, str)]
    if flagged:
        logger.warning("%d items flagged as unparseable", len(flagged))
    return records, flagged


def _mean_ci(scores: Sequence[int]) -> tuple[float, float, float]:
    """(mean, ci_low, ci_high) via normal approximation at 95%."""
    n = len(scores)
    mean = sum(scores) / n
    if n < 2:
        return mean, mean, mean
    var = sum((s - mean) ** 2 for s in scores) / (n - 1)
    half = 1.96 * math.sqrt(var / n)
    return mean, mean - half, mean + half


@dataclass(frozen=True)
class ScoreReport:
    overall_mean: float
    overall_ci: tuple[float, float]
    count: int
    flagged_count: int
    by_group: Mapping[tuple[str, str], dict]  # (lang, domain) -> stats

    def to_dict(self) -> dict:
        return {
            "overall_mean": self.overall_mean,
            "overall_ci": list(self.overall_ci),
            "count": self.count,
            "flagged_count": self.flagged_count,
            "by_group": {
                f"{lang}/{domain}": stats
                for (lang, domain), stats in sorted(self.by_group.items())
            },
        }


def aggregate_scores(
    records: Sequence[EvalRecord], flagged_count: int = 0
) -> ScoreReport:
    """Per-(lang, domain) and overall means with 95% CIs."""
    if not records:
        raise ValueError("no scorable records (all items flagged?)")
    ordered = sorted(records, key=lambda r: r.item_id)
    groups: dict[tuple[str, str], list[int]] = {}
    for r in ordered:
        groups.setdefault((r.lang, r.domain), []).append(r.score)
    by_group = {}
    for key, scores in groups.items():
        mean, lo, hi = _mean_ci(scores)
        by_group[key] = {
            "mean": mean,
            "count": len(scores),
            "ci": [lo, hi],
        }
    all_scores = [r.score for r in ordered]
    mean, lo, hi = _mean_ci(all_scores)
    return ScoreReport(
        overall_mean=mean,
        overall_ci=(lo, hi),
        count=len(all_scores),
        flagged_count=flagged_count,
        by_group=by_group,
    )


@dataclass(frozen=True)
class AbReport:
    win_pct: float
    tie_pct: float
    loss_pct: float
    count: int
    by_opponent: Mapping[str, dict]
    order_bias: Mapping[str, float]  # win rate of model_a when shown first/second

    def to_dict(self) -> dict:
        return {
            "win_pct": self.win_pct,
            "tie_pct": self.tie_pct,
            "loss_pct": self.loss_pct,
            "count": self.count,
            "by_opponent": dict(self.by_opponent),
            "order_bias": dict(self.order_bias),
        }


def _pcts(verdicts: Sequence[AbVerdict]) -> tuple[float, float, float]:
    n = len(verdicts)
    wins = sum(1 for v in verdicts if v.verdict == "a_wins")
    ties = sum(1 for v in verdicts if v.verdict == "tie")
    losses = n - wins - ties
    return 100.0 * wins / n, 100.0 * ties / n, 100.0 * losses / n


def ab_aggregate(verdicts: Sequence[AbVerdict]) -> AbReport:
    """Win/tie/loss percentages for model_a, overall and per opponent."""
    if not verdicts:
        raise ValueError("no verdicts to aggregate")
    win, tie, loss = _pcts(verdicts)
    by_opponent = {}
    opponents = sorted({v.model_b for v in verdicts})
    for opp in opponents:
        sub = [v for v in verdicts if v.model_b == opp]
        w, t, l = _pcts(sub)
        by_opponent[opp] = {"win_pct": w, "tie_pct": t, "loss_pct": l, "count": len(sub)}
    order_bias = {}
    for slot, label in (("a", "first"), ("b", "second")):
        sub = [v for v in verdicts if v.presented_first == slot]
        if sub:
            order_bias[f"win_rate_when_{label}"] = (
                100.0 * sum(1 for v in sub if v.verdict == "a_wins") / len(sub)
            )
        order_bias[f"shown_{label}_count"] = len(sub)
    return AbReport(
        win_pct=win,
        tie_pct=tie,
        loss_pct=loss,
        count=len(verdicts),
        by_opponent=by_opponent,
        order_bias=order_bias,
    )


def assign_presentation(item_ids: Sequence[str], seed: int) -> list[str]:
    """Seeded coin flip per item: which side's response is shown first."""
    rng = random.Random(seed)
    return ["a" if rng.random() < 0.5 else "b" for _ in item_ids]
