"""Training-run plan emission: cosine LR schedules and stage configs.

Plans are declarative JSON artifacts (no optimizer runs here): a cosine
learning-rate decay with optional linear warmup, plus stage
configurations for pretraining, SFT, and DPO with their reference
hyperparameters. Serialization is byte-stable: emitting a loaded plan
reproduces the file exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import sha256_file

STAGES = ("pretrain", "sft", "dpo")


class PlanError(ValueError):
    """Invalid schedule/plan parameters or dangling data references."""


@dataclass(frozen=True)
class LrSchedule:
    lr_max: float
    lr_min: float
    total_steps: int
    warmup_steps: int = 0

    def __post_init__(self):
        if not (self.lr_max >= self.lr_min > 0):
            raise PlanError(
                f"need lr_max >= lr_min > 0, got {self.lr_max}, {self.lr_min}"
            )
        if self.total_steps < 1:
            raise PlanError("total_steps must be >= 1")
        if not 0 <= self.warmup_steps <= self.total_steps:
            raise PlanError("warmup_steps must be in [0, total_steps]")


def lr_at(schedule: LrSchedule, step: int) -> float:
    """Learning rate at an integer step in [0, total_steps].

    Linear 0 -> lr_max over warmup, then cosine decay lr_max -> lr_min;
    endpoints are exact (cos(0)=1 and cos(pi)=-1 are exact in floats).
    """
    if not 0 <= step <= schedule.total_steps:
        raise PlanError(
            f"step {step} outside [0, {schedule.total_steps}]"
        )
    w = schedule.warmup_steps
    if step < w:
        return schedule.lr_max * step / w
    if schedule.total_steps == w:
        return schedule.lr_max
    progress = (step - w) / (schedule.total_steps - w)
    spread = schedule.lr_max - schedule.lr_min
    return schedule.lr_min + 0.5 * spread * (1.0 + math.cos(math.pi * progress))


def schedule_table(schedule: LrSchedule, points: int = 11) -> list[tuple[int, float]]:
    """(step, lr) at evenly spaced steps, endpoints included."""
    if points < 2:
        raise PlanError("need at least 2 table points")
    steps = sorted(
        {round(i * schedule.total_steps / (points - 1)) for i in range(points)}
    )
    return [(s, lr_at(schedule, s)) for s in steps]


@dataclass(frozen=True)
class StagePlan:
    stage: str
    global_batch_size: int
    epochs: int
    lr: LrSchedule
    data_refs: tuple[str, ...] = ()
    example_counts: Mapping[str, int] = None  # type: ignore[assignment]
    notes: str = ""

    def __post_init__(self):
        if self.stage not in STAGES:
            raise PlanError(f"unknown stage {self.stage!r}; expected one of {STAGES}")
        if self.global_batch_size < 1:
            raise PlanError("global_batch_size must be >= 1")
        if self.epochs < 1:
            raise PlanError("epochs must be >= 1")
        if self.example_counts is None:
            object.__setattr__(self, "example_counts", {})

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "global_batch_size": self.global_batch_size,
            "epochs": self.epochs,
            "lr": {
                "lr_max": self.lr.lr_max,
                "lr_min": self.lr.lr_min,
                "total_steps": self.lr.total_steps,
                "warmup_steps": self.lr.warmup_steps,
            },
            "data_refs": list(self.data_refs),
            "example_counts": dict(self.example_counts),
            "notes": self.notes,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StagePlan":
        lr = d["lr"]
        return cls(
            stage=d["stage"],
            global_batch_size=d["global_batch_size"],
            epochs=d["epochs"],
            lr=LrSchedule(
                lr_max=lr["lr_max"],
                lr_min=lr["lr_min"],
                total_steps=lr["total_steps"],
                warmup_steps=lr.get("warmup_steps", 0),
            ),
            data_refs=tuple(d.get("data_refs", ())),
            example_counts=dict(d.get("example_counts", {})),
            notes=d.get("notes", ""),
        )


def pretrain_plan(
    total_steps: int,
    global_batch_size: int = 1024,
    warmup_steps: int = 0,
    data_refs: tuple[str, ...] = (),
) -> StagePlan:
    """Continued-pretraining config: cosine 2e-4 -> 4.5e-7."""
    return StagePlan(
        stage="pretrain",
        global_batch_size=global_batch_size,
        epochs=1,
        lr=LrSchedule(2e-4, 4.5e-7, total_steps, warmup_steps),
        data_refs=data_refs,
        example_counts={},
        notes="400B-token continued pretraining blend",
    )


def sft_plan(
    total_steps: int = 200,
    data_refs: tuple[str, ...] = (),
    hindi_only_ablation: bool = False,
) -> StagePlan:
    """SFT config: batch 1024, lr 5e-6 -> 9e-7, one epoch."""
    counts = {"hi": 70_000} if hindi_only_ablation else {"total": 200_000}
    return StagePlan(
        stage="sft",
        global_batch_size=1024,
        epochs=1,
        lr=LrSchedule(5e-6, 9e-7, total_steps),
        data_refs=data_refs,
        example_counts=counts,
        notes=(
            "high-quality Hindi-only SFT ablation"
            if hindi_only_ablation
            else "instruction tuning, mixed en+hi"
        ),
    )


def dpo_plan(total_steps: int = 500, data_refs: tuple[str, ...] = ()) -> StagePlan:
    """DPO config: batch 512, lr 9e-6 -> 9e-7, one epoch."""
    return StagePlan(
        stage="dpo",
        global_batch_size=512,
        epochs=1,
        lr=LrSchedule(9e-6, 9e-7, total_steps),
        data_refs=data_refs,
        example_counts={"en": 200_000, "hi": 60_000},
        notes="preference optimization over en pairs plus synthetic hi pairs",
    )


def emit_plan(plan: StagePlan, path, base_dir=None) -> dict:
    """Write the plan as JSON with checksums of referenced manifests.

    Every entry in data_refs must exist as a file (relative to base_dir
    when given); its sha256 is recorded so a plan pins its data.
    """
    base = Path(base_dir) if base_dir is not None else Path(".")
    checksums = {}
    for ref in plan.data_refs:
        ref_path = Path(ref)
        if not ref_path.is_absolute():
            ref_path = base / ref_path
        if not ref_path.is_file():
            raise PlanError(f"data reference not found: {ref}")
        checksums[ref] = sha256_file(ref_path)
    payload = plan.to_dict()
    payload["data_checksums"] = checksums
    text = json.dumps(payload, ensure_ascii=False, sort_keys=True, indent=2) + "\n"
    Path(path).write_text(text, encoding="utf-8")
    return payload


def load_plan(path) -> StagePlan:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return StagePlan.from_dict(payload)
