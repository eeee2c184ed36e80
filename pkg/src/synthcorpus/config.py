"""Typed pipeline configuration.

One JSON file configures every stage; unknown keys anywhere in the tree
are rejected so typos fail loudly instead of silently using defaults.
All stage randomness derives from the single root seed by hashing the
stage name, so one knob controls end-to-end determinism.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


def stage_seed(root_seed: int, stage: str) -> int:
    """Stage-specific seed derived from the root seed by name hashing."""
    digest = hashlib.blake2b(f"{root_seed}:{stage}".encode("utf-8"), digest_size=4)
    return int.from_bytes(digest.digest(), "big")


def _from_mapping(cls, data: Mapping, where: str):
    if not isinstance(data, Mapping):
        raise ConfigError(f"{where} must be an object, got {type(data).__name__}")
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = sorted(set(data) - names)
    if unknown:
        raise ConfigError(f"unknown keys in {where}: {unknown}")
    return cls(**data)


@dataclass(frozen=True)
class PathsConfig:
    input: Optional[str] = None
    work_dir: str = "work"


@dataclass(frozen=True)
class ParseConfig:
    default_lang: str = "hi"
    provenance: str = "real-web"


@dataclass(frozen=True)
class TranslateConfig:
    backend: str = "mock:hindi"
    src_lang: str = "en"
    tgt_lang: str = "hi"
    concurrency: int = 8
    retries: int = 3
    backoff: float = 0.1


@dataclass(frozen=True)
class BackfilterConfig:
    backend: str = "echo"
    threshold: float = 0.5
    src_lang: str = "en"
    tgt_lang: str = "hi"


@dataclass(frozen=True)
class LmConfig:
    order: int = 3
    smoothing: str = "kn"
    k: float = 0.1
    tokenizer: str = "whitespace"
    vocab: Optional[str] = None
    train_lang: str = "hi"
    train_provenance: str = "real-web"


@dataclass(frozen=True)
class FilterConfig:
    target_discard_rate: float = 0.02


@dataclass(frozen=True)
class TranslitConfig:
    scheme: Optional[str] = None


@dataclass(frozen=True)
class DedupConfig:
    shingle_w: int = 5
    num_hashes: int = 128
    bands: int = 16
    rows: int = 8
    verify_threshold: float = 0.8
    exact_verify: bool = False


@dataclass(frozen=True)
class BlendConfig:
    spec: Optional[str] = None
    batch_size: int = 8
    steps: int = 50
    real_weight: float = 2.0
    synthetic_weight: float = 1.0
    strict_accounting: bool = False


@dataclass(frozen=True)
class EvalConfig:
    judge: str = "mock"
    mode: str = "fact"
    concurrency: int = 4


_SECTIONS = {
    "paths": PathsConfig,
    "parse": ParseConfig,
    "translate": TranslateConfig,
    "backfilter": BackfilterConfig,
    "lm": LmConfig,
    "filter": FilterConfig,
    "translit": TranslitConfig,
    "dedup": DedupConfig,
    "blend": BlendConfig,
    "eval": EvalConfig,
}


@dataclass(frozen=True)
class PipelineConfig:
    seed: int = 0
    paths: PathsConfig = field(default_factory=PathsConfig)
    parse: ParseConfig = field(default_factory=ParseConfig)
    translate: TranslateConfig = field(default_factory=TranslateConfig)
    backfilter: BackfilterConfig = field(default_factory=BackfilterConfig)
    lm: LmConfig = field(default_factory=LmConfig)
    filter: FilterConfig = field(default_factory=FilterConfig)
    translit: TranslitConfig = field(default_factory=TranslitConfig)
    dedup: DedupConfig = field(default_factory=DedupConfig)
    blend: BlendConfig = field(default_factory=BlendConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    @classmethod
    def from_dict(cls, data: Mapping) -> "PipelineConfig":
        if not isinstance(data, Mapping):
            raise ConfigError("config root must be an object")
        unknown = sorted(set(data) - set(_SECTIONS) - {"seed"})
        if unknown:
            raise ConfigError(f"unknown keys in config: {unknown}")
        seed = data.get("seed", 0)
        if not isinstance(seed, int) or isinstance(seed, bool):
            raise ConfigError(f"seed must be an integer, got {seed!r}")
        sections = {
            name: _from_mapping(section_cls, data.get(name, {}), name)
            for name, section_cls in _SECTIONS.items()
        }
        return cls(seed=seed, **sections)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def stage_seed(self, stage: str) -> int:
        return stage_seed(self.seed, stage)


def load_config(path) -> PipelineConfig:
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
    return PipelineConfig.from_dict(data)


def save_config(cfg: PipelineConfig, path) -> None:
    """Resolved-config snapshot: every default made explicit."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(cfg.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
