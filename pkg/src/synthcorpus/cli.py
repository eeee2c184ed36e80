"""Command-line entry point: one subcommand per pipeline stage.

Every command reads the shared JSON config (all keys optional, unknown
keys rejected), honors ``--work`` and ``--resume``, prints a JSON
report to stdout on success, and on failure prints a machine-readable
error object to stderr and exits nonzero (2 for config/usage problems,
1 for stage failures).
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import sys
from pathlib import Path
from statistics import fmean
from typing import Optional

from . import __version__
from .blend import BlendError
from .config import ConfigError, PipelineConfig, load_config
from .corpus import ShardError
from .docparse import ParseError, ReassemblyError
from .evalharness import (
    AbVerdict,
    EvalItem,
    HttpJudgeClient,
    JudgeError,
    MockJudgeClient,
    ab_aggregate,
    aggregate_scores,
    judge_batch,
)
from .ngram_lm import (
    EmptyCorpusError,
    TokenizerMismatchError,
    document_nll,
    load_model,
)
from .pipeline import (
    PipelineError,
    corpus_stats,
    load_shard_docs,
    run_all,
    stage_blend,
    stage_dedup,
    stage_filter,
    stage_lm_train,
    stage_parse,
    stage_translate,
    stage_translit,
    work_files,
)
from .tokenizers import CharTokenizer, WhitespaceTokenizer, make_tokenizer
from .trainplan import PlanError, dpo_plan, emit_plan, pretrain_plan, sft_plan
from .translate import (
    BackendError,
    CountMismatchError,
    SentencePair,
    resolve_backend,
    roundtrip_filter,
)
from .translit import SchemeError

logger = logging.getLogger(__name__)

USAGE_ERRORS = (ConfigError, PlanError, ValueError)
STAGE_ERRORS = (
    PipelineError,
    ShardError,
    ParseError,
    ReassemblyError,
    BackendError,
    CountMismatchError,
    EmptyCorpusError,
    TokenizerMismatchError,
    BlendError,
    SchemeError,
    JudgeError,
    OSError,
)


def _emit(obj) -> None:
    print(json.dumps(obj, ensure_ascii=False, sort_keys=True, indent=2))


def _read_jsonl(path) -> list[dict]:
    records = []
    for line_no, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line:
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ShardError(f"{path}:{line_no}: {exc}") from exc
        if not isinstance(rec, dict):
            raise ShardError(f"{path}:{line_no}: line is not a JSON object")
        records.append(rec)
    return records


def _write_jsonl(path, records) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        for rec in records:
            fh.write(json.dumps(rec, ensure_ascii=False, sort_keys=True))
            fh.write("\n")


def _cmd_stage(stage_fn, cfg: PipelineConfig, args) -> int:
    kwargs = {"work": args.work, "resume": args.resume}
    if stage_fn in (stage_parse,):
        kwargs["input_path"] = args.input
    result = stage_fn(cfg, **kwargs)
    _emit(result.to_dict())
    return 0


def _cmd_run_all(cfg: PipelineConfig, args) -> int:
    report = run_all(cfg, work=args.work, resume=args.resume, input_path=args.input)
    _emit(report)
    return 0


def _cmd_backfilter(cfg: PipelineConfig, args) -> int:
    records = _read_jsonl(args.pairs)
    pairs = [SentencePair(source=r["source"], target=r["target"]) for r in records]
    backend = resolve_backend(args.backend or cfg.backfilter.backend)
    threshold = (
        args.threshold if args.threshold is not None else cfg.backfilter.threshold
    )
    out_dir = Path(args.out_dir or args.work or cfg.paths.work_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    kept, rejected = roundtrip_filter(
        pairs,
        backend,
        threshold=threshold,
        src_lang=cfg.backfilter.src_lang,
        tgt_lang=cfg.backfilter.tgt_lang,
        checkpoint_path=out_dir / "backfilter.checkpoint.json",
    )
    _write_jsonl(out_dir / "backfilter_kept.jsonl", [p.to_dict() for p in kept])
    _write_jsonl(out_dir / "backfilter_rejected.jsonl", [p.to_dict() for p in rejected])
    scored = kept + rejected
    _emit(
        {
            "pairs": len(pairs),
            "kept": len(kept),
            "rejected": len(rejected),
            "threshold": threshold,
            "backend": backend.name,
            "mean_similarity": fmean(p.similarity for p in scored) if scored else None,
            "outputs": {
                "kept": str(out_dir / "backfilter_kept.jsonl"),
                "rejected": str(out_dir / "backfilter_rejected.jsonl"),
            },
        }
    )
    return 0


def _cmd_lm_score(cfg: PipelineConfig, args) -> int:
    model_path = args.model or work_files(args.work or cfg.paths.work_dir)["model"]
    if not Path(model_path).exists():
        raise PipelineError(f"no language model at {model_path}; run lm-train first")
    model = load_model(model_path)
    tokenizer = make_tokenizer(cfg.lm.tokenizer, cfg.lm.vocab)
    docs = load_shard_docs(args.input, "input")
    lines = []
    for doc in docs:
        nll, events = document_nll(model, doc, tokenizer)
        mean_nll = nll / events if events else 0.0
        lines.append(
            {
                "id": doc.id,
                "events": events,
                "log_perplexity": mean_nll,
                "perplexity": math.exp(mean_nll),
            }
        )
    if args.out:
        _write_jsonl(args.out, lines)
        _emit({"documents": len(lines), "out": str(args.out)})
    else:
        for rec in lines:
            print(json.dumps(rec, ensure_ascii=False, sort_keys=True))
    return 0


def _cmd_stats(cfg: PipelineConfig, args) -> int:
    docs = load_shard_docs(args.input, "input")
    ws = WhitespaceTokenizer()
    ch = CharTokenizer()
    report = corpus_stats(docs, {ws.tokenizer_id: ws, ch.tokenizer_id: ch})
    _emit(report)
    return 0


def _cmd_trainplan(cfg: PipelineConfig, args) -> int:
    data_refs = tuple(args.data_ref or ())
    if args.stage == "pretrain":
        plan = pretrain_plan(total_steps=args.steps or 95_000, data_refs=data_refs)
    elif args.stage == "sft":
        plan = sft_plan(
            total_steps=args.steps or 200,
            data_refs=data_refs,
            hindi_only_ablation=args.hindi_only,
        )
    else:
        plan = dpo_plan(total_steps=args.steps or 500, data_refs=data_refs)
    payload = emit_plan(plan, args.out, base_dir=args.base_dir)
    _emit({"stage": plan.stage, "out": str(args.out), "data_refs": list(payload["data_checksums"])})
    return 0


def _cmd_eval_judge(cfg: PipelineConfig, args) -> int:
    records = _read_jsonl(args.items)
    items = [
        EvalItem(
            id=r["id"],
            lang=r["lang"],
            domain=r["domain"],
            question=r["question"],
            response=r["response"],
            reference_facts=r.get("reference_facts"),
        )
        for r in records
    ]
    judge_spec = args.judge or cfg.eval.judge
    if judge_spec == "mock":
        judge = MockJudgeClient()
    else:
        judge = HttpJudgeClient(endpoint=judge_spec, model=args.judge_model or "judge")
    mode = args.mode or cfg.eval.mode
    scored, flagged = judge_batch(
        items, judge, mode=mode, concurrency=cfg.eval.concurrency
    )
    if args.out_records:
        _write_jsonl(args.out_records, [r.to_dict() for r in scored])
    report = aggregate_scores(scored, flagged_count=len(flagged))
    payload = report.to_dict()
    payload["flagged_ids"] = flagged
    _emit(payload)
    return 0


def _cmd_eval_ab(cfg: PipelineConfig, args) -> int:
    records = _read_jsonl(args.verdicts)
    verdicts = [
        AbVerdict(
            prompt_id=r["prompt_id"],
            model_a=r["model_a"],
            model_b=r["model_b"],
            presented_first=r["presented_first"],
            verdict=r["verdict"],
        )
        for r in records
    ]
    report = ab_aggregate(verdicts)
    _emit(report.to_dict())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="synthcorpus",
        description="Bilingual corpus curation: parse, translate, filter, "
        "transliterate, dedup, blend, and evaluate.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name: str, help_text: str, **extra):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="JSON config file (defaults apply if omitted)")
        p.add_argument("--work", help="work directory (overrides config)")
        p.add_argument(
            "--resume",
            action="store_true",
            help="skip the stage if inputs and outputs are unchanged",
        )
        return p

    p = add("parse", "raw JSONL records -> parsed document shard")
    p.add_argument("--input", help="raw JSONL file (overrides config paths.input)")

    add("translate", "translate source-language documents")
    add("lm-train", "train the n-gram language model")
    add("filter", "perplexity-filter translated documents")
    add("translit", "romanize Devanagari documents")
    add("dedup", "remove near-duplicate documents")
    add("blend", "token accounting and sampling schedule")

    p = add("backfilter", "round-trip similarity filter over sentence pairs")
    p.add_argument("--pairs", required=True, help="JSONL of {source, target}")
    p.add_argument("--backend", help="translation backend spec")
    p.add_argument("--threshold", type=float, help="minimum chrF similarity")
    p.add_argument("--out-dir", help="directory for kept/rejected files")

    p = add("lm-score", "score shard documents with a trained model")
    p.add_argument("--input", required=True, help="document shard to score")
    p.add_argument("--model", help="model file (default: work dir model)")
    p.add_argument("--out", help="write JSONL here instead of stdout")

    p = add("stats", "descriptive statistics for a shard")
    p.add_argument("--input", required=True, help="document shard")

    p = add("trainplan", "emit a training-run plan")
    p.add_argument("--stage", required=True, choices=("pretrain", "sft", "dpo"))
    p.add_argument("--out", required=True, help="output JSON file")
    p.add_argument("--steps", type=int, help="total optimizer steps")
    p.add_argument("--hindi-only", action="store_true", help="SFT ablation variant")
    p.add_argument("--data-ref", action="append", help="data file pinned by checksum")
    p.add_argument("--base-dir", help="base directory for relative data refs")

    p = add("eval-judge", "rubric-score responses with a judge model")
    p.add_argument("--items", required=True, help="JSONL eval items")
    p.add_argument("--judge", help="'mock' or judge endpoint URL")
    p.add_argument("--judge-model", help="model name for HTTP judge")
    p.add_argument("--mode", choices=("fact", "open"), help="rubric variant")
    p.add_argument("--out-records", help="write per-item records here")

    p = add("eval-ab", "aggregate pairwise A/B verdicts")
    p.add_argument("--verdicts", required=True, help="JSONL verdict records")

    p = add("run-all", "run every stage in order with conservation checks")
    p.add_argument("--input", help="raw JSONL file (overrides config paths.input)")

    return parser


_STAGE_COMMANDS = {
    "parse": stage_parse,
    "translate": stage_translate,
    "lm-train": stage_lm_train,
    "filter": stage_filter,
    "translit": stage_translit,
    "dedup": stage_dedup,
    "blend": stage_blend,
}


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )

    def fail(exc: Exception, code: int) -> int:
        report = {
            "error": type(exc).__name__,
            "message": str(exc),
            "command": args.command,
        }
        print(json.dumps(report, ensure_ascii=False, sort_keys=True), file=sys.stderr)
        return code

    try:
        cfg = load_config(args.config) if args.config else PipelineConfig()
    except (ConfigError, OSError) as exc:
        return fail(exc, 2)

    try:
        if args.command in _STAGE_COMMANDS:
            return _cmd_stage(_STAGE_COMMANDS[args.command], cfg, args)
        if args.command == "run-all":
            return _cmd_run_all(cfg, args)
        if args.command == "backfilter":
            return _cmd_backfilter(cfg, args)
        if args.command == "lm-score":
            return _cmd_lm_score(cfg, args)
        if args.command == "stats":
            return _cmd_stats(cfg, args)
        if args.command == "trainplan":
            return _cmd_trainplan(cfg, args)
        if args.command == "eval-judge":
            return _cmd_eval_judge(cfg, args)
        if args.command == "eval-ab":
            return _cmd_eval_ab(cfg, args)
        raise ConfigError(f"unknown command {args.command!r}")
    except STAGE_ERRORS as exc:
        return fail(exc, 1)
    except USAGE_ERRORS as exc:
        return fail(exc, 2)


if __name__ == "__main__":
    sys.exit(main())
