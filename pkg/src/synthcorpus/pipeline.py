"""Stage orchestration over JSONL shards.

Each stage reads its upstream shards (verified against their
manifests), writes new shards plus a JSON stage report under
``<work>/reports/``, and can be skipped on ``--resume`` when its
fingerprint (stage config + input checksums + seed) matches the prior
report and all recorded outputs are intact. Stage outputs are
immutable; a tampered output under resume is a hard error. Document
conservation is enforced end to end: every document leaving the
pipeline is attributed to the filter or dedup report.
"""

from __future__ import annotations

import dataclasses
import gzip
import hashlib
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Optional

from .blend import BlendComponent, BlendSpec, account_tokens, plan_schedule
from .config import PipelineConfig, save_config
from .corpus import (
    Document,
    ShardError,
    read_manifest,
    read_shard,
    sha256_file,
    write_shard,
)
from .docparse import ParseError, parse_document, segment_sentences
from .ngram_lm import load_model, save_model, train_lm
from .quality import calibrate_threshold, filter_corpus, score_corpus
from .tokenizers import WhitespaceTokenizer, make_tokenizer
from .translate import resolve_backend, translate_corpus
from .translit import default_scheme, load_scheme, transliterate_corpus

logger = logging.getLogger(__name__)

RUN_ALL_ORDER = (
    "parse",
    "translate",
    "lm-train",
    "filter",
    "translit",
    "dedup",
    "blend",
)


class PipelineError(Exception):
    """Stage-level failure with a stable message for error reports."""


class MissingInputError(PipelineError):
    """A required upstream output does not exist."""


class ChecksumMismatchError(PipelineError):
    """An input or resumed output no longer matches its recorded hash."""


def work_files(work) -> dict[str, Path]:
    work = Path(work)
    return {
        "parsed": work / "parsed.jsonl.gz",
        "translated": work / "translated.jsonl.gz",
        "model": work / "lm.json.gz",
        "kept": work / "filtered.jsonl.gz",
        "discarded": work / "filter_discards.jsonl.gz",
        "transliterated": work / "transliterated.jsonl.gz",
        "deduped": work / "deduped.jsonl.gz",
        "blend_spec": work / "blend_spec.json",
        "schedule": work / "schedule.jsonl",
        "reports": work / "reports",
        "checkpoints": work / "checkpoints",
        "config_snapshot": work / "config.resolved.json",
        "run_report": work / "run_report.json",
    }


def prepare_work(cfg: PipelineConfig, work) -> dict[str, Path]:
    files = work_files(work)
    Path(work).mkdir(parents=True, exist_ok=True)
    files["reports"].mkdir(parents=True, exist_ok=True)
    files["checkpoints"].mkdir(parents=True, exist_ok=True)
    save_config(cfg, files["config_snapshot"])
    return files


@dataclass
class StageResult:
    stage: str
    fingerprint: str
    seed: int
    inputs: dict[str, dict]
    outputs: dict[str, dict]
    counts: dict[str, int]
    details: dict = field(default_factory=dict)
    skipped: bool = False

    def to_dict(self) -> dict:
        return {
            "stage": self.stage,
            "fingerprint": self.fingerprint,
            "seed": self.seed,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "counts": self.counts,
            "details": self.details,
            "skipped": self.skipped,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "StageResult":
        return cls(
            stage=d["stage"],
            fingerprint=d["fingerprint"],
            seed=d["seed"],
            inputs=dict(d["inputs"]),
            outputs=dict(d["outputs"]),
            counts=dict(d["counts"]),
            details=dict(d.get("details", {})),
            skipped=bool(d.get("skipped", False)),
        )


def _fingerprint(stage: str, section: Mapping, input_hashes: Mapping[str, str], seed: int) -> str:
    payload = json.dumps(
        {"stage": stage, "config": dict(section), "inputs": dict(input_hashes), "seed": seed},
        sort_keys=True,
        ensure_ascii=False,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()


def _report_path(work, stage: str) -> Path:
    return work_files(work)["reports"] / f"{stage}.json"


def _load_result(work, stage: str) -> Optional[StageResult]:
    path = _report_path(work, stage)
    if not path.exists():
        return None
    return StageResult.from_dict(json.loads(path.read_text(encoding="utf-8")))


def _write_result(work, result: StageResult) -> StageResult:
    path = _report_path(work, result.stage)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(result.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    return result


def _gate(work, stage: str, fingerprint: str, resume: bool) -> Optional[StageResult]:
    """Prior result if this stage can be skipped; tampered outputs raise."""
    if not resume:
        return None
    prior = _load_result(work, stage)
    if prior is None or prior.fingerprint != fingerprint:
        return None
    for name, entry in prior.outputs.items():
        path = Path(work) / entry["path"]
        if not path.exists():
            raise ChecksumMismatchError(
                f"resume {stage}: recorded output {entry['path']} is missing"
            )
        actual = sha256_file(path)
        if actual != entry["sha256"]:
            raise ChecksumMismatchError(
                f"resume {stage}: output {entry['path']} checksum changed "
                f"({actual[:12]} != {entry['sha256'][:12]})"
            )
    prior.skipped = True
    logger.info("stage %s: inputs unchanged, skipping", stage)
    return prior


def _entry(path: Path, work) -> dict:
    try:
        rel = str(Path(path).relative_to(work))
    except ValueError:
        rel = Path(path).name
    return {"path": rel, "sha256": sha256_file(path)}


def load_shard_docs(path, what: str) -> list[Document]:
    """Shard documents, gated on manifest presence and checksum."""
    path = Path(path)
    if not path.exists():
        raise MissingInputError(
            f"missing {what} shard {path}; run the producing stage first"
        )
    try:
        manifest = read_manifest(path)
    except ShardError as exc:
        raise MissingInputError(str(exc)) from exc
    actual = sha256_file(path)
    if actual != manifest.checksum:
        raise ChecksumMismatchError(
            f"{what} shard {path} does not match its manifest checksum"
        )
    return list(read_shard(path, strict=True))


def _open_raw(path: Path):
    if str(path).endswith(".gz"):
        return gzip.open(path, "rt", encoding="utf-8")
    return open(path, encoding="utf-8")


def stage_parse(
    cfg: PipelineConfig, work=None, resume: bool = False, input_path=None
) -> StageResult:
    """Raw JSONL records ({"text", "lang"?, "id"?, ...}) -> parsed shard."""
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    input_path = Path(input_path or cfg.paths.input or "")
    if str(input_path) in ("", ".") or not input_path.exists():
        raise MissingInputError(f"parse input {input_path} not found")
    in_sha = sha256_file(input_path)
    seed = cfg.stage_seed("parse")
    fp = _fingerprint("parse", dataclasses.asdict(cfg.parse), {"raw": in_sha}, seed)
    prior = _gate(work, "parse", fp, resume)
    if prior is not None:
        return prior

    docs: list[Document] = []
    line_errors: list[dict] = []
    by_lang: dict[str, int] = {}
    total = 0
    with _open_raw(input_path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            total += 1
            try:
                rec = json.loads(line)
                if not isinstance(rec, dict) or "text" not in rec:
                    raise ValueError("record must be an object with a 'text' field")
                lang = rec.get("lang", cfg.parse.default_lang)
                meta = {"source": rec["source"]} if "source" in rec else None
                doc = parse_document(
                    rec["text"],
                    lang,
                    doc_id=rec.get("id"),
                    provenance=rec.get("provenance", cfg.parse.provenance),
                    meta=meta,
                )
            except (ValueError, ParseError) as exc:
                line_errors.append({"line": line_no, "error": str(exc)})
                continue
            docs.append(segment_sentences(doc))
            by_lang[doc.lang] = by_lang.get(doc.lang, 0) + 1
    if line_errors:
        logger.warning(
            "parse: %d of %d input lines rejected", len(line_errors), total
        )
    ws = WhitespaceTokenizer()
    write_shard(docs, files["parsed"], tokenizers={ws.tokenizer_id: ws}, seed=seed)
    result = StageResult(
        stage="parse",
        fingerprint=fp,
        seed=seed,
        inputs={"raw": {"path": input_path.name, "sha256": in_sha}},
        outputs={"parsed": _entry(files["parsed"], work)},
        counts={
            "input_records": total,
            "documents": len(docs),
            "line_errors": len(line_errors),
        },
        details={"by_lang": by_lang, "line_errors": line_errors[:20]},
    )
    return _write_result(work, result)


def stage_translate(cfg: PipelineConfig, work=None, resume: bool = False) -> StageResult:
    """Parsed shard -> translated copies of source-language documents.

    Progress is checkpointed per document into an append-only partial
    file, so a crashed run resumes without re-querying the backend.
    """
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    parsed = load_shard_docs(files["parsed"], "parsed")
    seed = cfg.stage_seed("translate")
    section = dataclasses.asdict(cfg.translate)
    fp = _fingerprint(
        "translate", section, {"parsed": sha256_file(files["parsed"])}, seed
    )
    prior = _gate(work, "translate", fp, resume)
    if prior is not None:
        return prior

    tc = cfg.translate
    src_docs = [d for d in parsed if d.lang == tc.src_lang]
    partial = files["checkpoints"] / "translate.partial.jsonl"
    ckpt = files["checkpoints"] / "translate.json"
    done: list[Document] = []
    if resume and ckpt.exists() and partial.exists():
        state = json.loads(ckpt.read_text(encoding="utf-8"))
        prior_docs = list(read_shard(partial, strict=True))
        k = int(state.get("completed", 0))
        if (
            len(prior_docs) == k
            and 0 < k <= len(src_docs)
            and state.get("fingerprint") == fp
        ):
            done = prior_docs
            logger.info("translate: resuming after %d documents", k)
        else:
            done = []
    if not done and partial.exists():
        partial.unlink()

    backend = resolve_backend(tc.backend)
    with open(partial, "a", encoding="utf-8") as out:
        for translated in translate_corpus(
            src_docs[len(done) :],
            backend,
            tc.src_lang,
            tc.tgt_lang,
            concurrency=tc.concurrency,
            retries=tc.retries,
            backoff=tc.backoff,
        ):
            done.append(translated)
            out.write(translated.canonical_json())
            out.write("\n")
            out.flush()
            ckpt.write_text(
                json.dumps(
                    {
                        "completed": len(done),
                        "last_completed_id": translated.id,
                        "fingerprint": fp,
                    }
                )
                + "\n",
                encoding="utf-8",
            )
    ws = WhitespaceTokenizer()
    write_shard(done, files["translated"], tokenizers={ws.tokenizer_id: ws}, seed=seed)
    result = StageResult(
        stage="translate",
        fingerprint=fp,
        seed=seed,
        inputs={"parsed": _entry(files["parsed"], work)},
        outputs={"translated": _entry(files["translated"], work)},
        counts={"source_documents": len(src_docs), "translated": len(done)},
        details={"backend": backend.name, "src_lang": tc.src_lang, "tgt_lang": tc.tgt_lang},
    )
    return _write_result(work, result)


def stage_lm_train(cfg: PipelineConfig, work=None, resume: bool = False) -> StageResult:
    """Reference-language model from clean parsed documents."""
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    parsed = load_shard_docs(files["parsed"], "parsed")
    seed = cfg.stage_seed("lm-train")
    fp = _fingerprint(
        "lm-train",
        dataclasses.asdict(cfg.lm),
        {"parsed": sha256_file(files["parsed"])},
        seed,
    )
    prior = _gate(work, "lm-train", fp, resume)
    if prior is not None:
        return prior

    train_docs = [
        d
        for d in parsed
        if d.lang == cfg.lm.train_lang and d.provenance == cfg.lm.train_provenance
    ]
    if not train_docs:
        raise PipelineError(
            f"no training documents with lang={cfg.lm.train_lang!r} "
            f"provenance={cfg.lm.train_provenance!r} in {files['parsed']}"
        )
    tokenizer = make_tokenizer(cfg.lm.tokenizer, cfg.lm.vocab)
    model = train_lm(
        train_docs, tokenizer, cfg.lm.order, smoothing=cfg.lm.smoothing, k=cfg.lm.k
    )
    save_model(model, files["model"])
    result = StageResult(
        stage="lm-train",
        fingerprint=fp,
        seed=seed,
        inputs={"parsed": _entry(files["parsed"], work)},
        outputs={"model": _entry(files["model"], work)},
        counts={"training_documents": len(train_docs), "vocabulary": model.event_count - 1},
        details={"order": cfg.lm.order, "smoothing": model.smoothing, "tokenizer": model.tokenizer_id},
    )
    return _write_result(work, result)


def stage_filter(cfg: PipelineConfig, work=None, resume: bool = False) -> StageResult:
    """Perplexity-filter translated documents against the trained LM."""
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    if not files["model"].exists():
        raise MissingInputError(
            f"no language model at {files['model']}; run lm-train first"
        )
    translated = load_shard_docs(files["translated"], "translated")
    seed = cfg.stage_seed("filter")
    section = {**dataclasses.asdict(cfg.filter), "lm": dataclasses.asdict(cfg.lm)}
    fp = _fingerprint(
        "filter",
        section,
        {
            "translated": sha256_file(files["translated"]),
            "model": sha256_file(files["model"]),
        },
        seed,
    )
    prior = _gate(work, "filter", fp, resume)
    if prior is not None:
        return prior

    model = load_model(files["model"])
    tokenizer = make_tokenizer(cfg.lm.tokenizer, cfg.lm.vocab)
    if translated:
        scores = score_corpus(translated, model, tokenizer)
        calibration = calibrate_threshold(scores, cfg.filter.target_discard_rate)
        kept, discarded = filter_corpus(translated, model, calibration, tokenizer)
        details = {
            "threshold": calibration.threshold,
            "target_discard_rate": calibration.target_discard_rate,
            "achieved_rate": calibration.achieved_rate,
        }
    else:
        kept, discarded = [], []
        details = {"threshold": None, "target_discard_rate": cfg.filter.target_discard_rate, "achieved_rate": 0.0}
    ws = WhitespaceTokenizer()
    write_shard(kept, files["kept"], tokenizers={ws.tokenizer_id: ws}, seed=seed)
    write_shard(discarded, files["discarded"], tokenizers={ws.tokenizer_id: ws}, seed=seed)
    result = StageResult(
        stage="filter",
        fingerprint=fp,
        seed=seed,
        inputs={
            "translated": _entry(files["translated"], work),
            "model": _entry(files["model"], work),
        },
        outputs={
            "kept": _entry(files["kept"], work),
            "discarded": _entry(files["discarded"], work),
        },
        counts={
            "input": len(translated),
            "kept": len(kept),
            "discarded": len(discarded),
        },
        details=details,
    )
    return _write_result(work, result)


def stage_translit(cfg: PipelineConfig, work=None, resume: bool = False) -> StageResult:
    """Romanized copies of every Devanagari document (real + kept)."""
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    parsed = load_shard_docs(files["parsed"], "parsed")
    kept = load_shard_docs(files["kept"], "filtered")
    seed = cfg.stage_seed("translit")
    fp = _fingerprint(
        "translit",
        dataclasses.asdict(cfg.translit),
        {
            "parsed": sha256_file(files["parsed"]),
            "kept": sha256_file(files["kept"]),
        },
        seed,
    )
    prior = _gate(work, "translit", fp, resume)
    if prior is not None:
        return prior

    scheme = (
        load_scheme(cfg.translit.scheme) if cfg.translit.scheme else default_scheme()
    )
    sources = [d for d in parsed + kept if d.script == "devanagari"]
    out = list(transliterate_corpus(sources, scheme))
    ws = WhitespaceTokenizer()
    write_shard(out, files["transliterated"], tokenizers={ws.tokenizer_id: ws}, seed=seed)
    result = StageResult(
        stage="translit",
        fingerprint=fp,
        seed=seed,
        inputs={
            "parsed": _entry(files["parsed"], work),
            "kept": _entry(files["kept"], work),
        },
        outputs={"transliterated": _entry(files["transliterated"], work)},
        counts={"source_documents": len(sources), "transliterated": len(out)},
    )
    return _write_result(work, result)


def stage_dedup(cfg: PipelineConfig, work=None, resume: bool = False) -> StageResult:
    """Near-duplicate removal over the union of all produced shards."""
    from .dedup import DedupParams, dedup_documents

    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    parsed = load_shard_docs(files["parsed"], "parsed")
    kept = load_shard_docs(files["kept"], "filtered")
    translit = load_shard_docs(files["transliterated"], "transliterated")
    seed = cfg.stage_seed("dedup")
    fp = _fingerprint(
        "dedup",
        dataclasses.asdict(cfg.dedup),
        {
            "parsed": sha256_file(files["parsed"]),
            "kept": sha256_file(files["kept"]),
            "transliterated": sha256_file(files["transliterated"]),
        },
        seed,
    )
    prior = _gate(work, "dedup", fp, resume)
    if prior is not None:
        return prior

    pool = parsed + kept + translit
    params = DedupParams(
        shingle_w=cfg.dedup.shingle_w,
        k=cfg.dedup.num_hashes,
        bands=cfg.dedup.bands,
        rows=cfg.dedup.rows,
        verify_threshold=cfg.dedup.verify_threshold,
        seed=seed,
    )
    survivors, report = dedup_documents(pool, params, exact_verify=cfg.dedup.exact_verify)
    ws = WhitespaceTokenizer()
    write_shard(survivors, files["deduped"], tokenizers={ws.tokenizer_id: ws}, seed=seed)
    result = StageResult(
        stage="dedup",
        fingerprint=fp,
        seed=seed,
        inputs={
            "parsed": _entry(files["parsed"], work),
            "kept": _entry(files["kept"], work),
            "transliterated": _entry(files["transliterated"], work),
        },
        outputs={"deduped": _entry(files["deduped"], work)},
        counts={
            "input": report.input_count,
            "output": report.output_count,
            "removed": len(report.removed_ids),
            "clusters": len(report.clusters),
        },
        details={"removed_ids": report.removed_ids},
    )
    return _write_result(work, result)


def build_blend_spec(docs: list[Document], cfg: PipelineConfig, seed: int) -> BlendSpec:
    """One blend component per (provenance, lang) group in the pool."""
    groups: dict[tuple[str, str], list[Document]] = {}
    for d in docs:
        groups.setdefault((d.provenance, d.lang), []).append(d)
    ws = WhitespaceTokenizer()
    components = []
    for prov, lang in sorted(groups):
        members = groups[(prov, lang)]
        token_count = sum(len(ws.tokenize(d.content_text())) for d in members)
        weight = (
            cfg.blend.real_weight if prov == "real-web" else cfg.blend.synthetic_weight
        )
        components.append(
            BlendComponent(
                name=f"{prov}:{lang}",
                lang=lang,
                provenance=prov,
                token_count=token_count,
                weight=weight,
                doc_count=len(members),
                shards=("deduped.jsonl.gz",),
            )
        )
    return BlendSpec(components=tuple(components), seed=seed)


def stage_blend(cfg: PipelineConfig, work=None, resume: bool = False) -> StageResult:
    """Token accounting plus a deterministic sampling schedule."""
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    deduped = load_shard_docs(files["deduped"], "deduped")
    seed = cfg.stage_seed("blend")
    fp = _fingerprint(
        "blend",
        dataclasses.asdict(cfg.blend),
        {"deduped": sha256_file(files["deduped"])},
        seed,
    )
    prior = _gate(work, "blend", fp, resume)
    if prior is not None:
        return prior

    if cfg.blend.spec:
        spec = BlendSpec.from_dict(
            json.loads(Path(cfg.blend.spec).read_text(encoding="utf-8"))
        )
    else:
        spec = build_blend_spec(deduped, cfg, seed)
    account = account_tokens(spec, strict=cfg.blend.strict_accounting)
    entries, schedule_report = plan_schedule(spec, cfg.blend.batch_size, cfg.blend.steps)
    files["blend_spec"].write_text(
        json.dumps(spec.to_dict(), ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    with open(files["schedule"], "w", encoding="utf-8") as fh:
        for e in entries:
            fh.write(
                json.dumps(
                    {"step": e.step, "component": e.component, "doc_index": e.doc_index},
                    sort_keys=True,
                )
            )
            fh.write("\n")
    result = StageResult(
        stage="blend",
        fingerprint=fp,
        seed=seed,
        inputs={"deduped": _entry(files["deduped"], work)},
        outputs={
            "blend_spec": _entry(files["blend_spec"], work),
            "schedule": _entry(files["schedule"], work),
        },
        counts={"components": len(spec.components), "schedule_entries": len(entries)},
        details={
            "account": account.to_dict(),
            "draws_per_component": dict(schedule_report.draws_per_component),
            "epochs_per_component": dict(schedule_report.epochs_per_component),
            "multi_epoch": schedule_report.multi_epoch,
        },
    )
    return _write_result(work, result)


def corpus_stats(docs: list[Document], tokenizers: Optional[Mapping] = None) -> dict:
    """Descriptive counts for a shard: languages, scripts, block mix, tokens."""
    if tokenizers is None:
        ws = WhitespaceTokenizer()
        tokenizers = {ws.tokenizer_id: ws}
    by_lang: dict[str, int] = {}
    by_script: dict[str, int] = {}
    by_provenance: dict[str, int] = {}
    block_kinds: dict[str, int] = {}
    tokens = {tid: 0 for tid in tokenizers}
    sentences = 0
    for d in docs:
        by_lang[d.lang] = by_lang.get(d.lang, 0) + 1
        by_script[d.script] = by_script.get(d.script, 0) + 1
        by_provenance[d.provenance] = by_provenance.get(d.provenance, 0) + 1
        for b in d.blocks:
            block_kinds[b.kind] = block_kinds.get(b.kind, 0) + 1
        sentences += sum(1 for _ in d.sentences())
        content = d.content_text()
        for tid, tok in tokenizers.items():
            tokens[tid] += len(tok.tokenize(content))
    return {
        "documents": len(docs),
        "sentences": sentences,
        "by_lang": by_lang,
        "by_script": by_script,
        "by_provenance": by_provenance,
        "block_kinds": block_kinds,
        "tokens": tokens,
    }


def run_all(
    cfg: PipelineConfig, work=None, resume: bool = False, input_path=None
) -> dict:
    """All stages in order, plus a conservation-checked run report."""
    work = Path(work or cfg.paths.work_dir)
    files = prepare_work(cfg, work)
    results = {
        "parse": stage_parse(cfg, work, resume, input_path),
        "translate": stage_translate(cfg, work, resume),
        "lm-train": stage_lm_train(cfg, work, resume),
        "filter": stage_filter(cfg, work, resume),
        "translit": stage_translit(cfg, work, resume),
        "dedup": stage_dedup(cfg, work, resume),
        "blend": stage_blend(cfg, work, resume),
    }
    produced = (
        results["parse"].counts["documents"]
        + results["translate"].counts["translated"]
        + results["translit"].counts["transliterated"]
    )
    discarded = results["filter"].counts["discarded"]
    removed = results["dedup"].counts["removed"]
    final = results["dedup"].counts["output"]
    if produced - discarded - removed != final:
        raise PipelineError(
            f"conservation violated: produced {produced} - filtered {discarded} "
            f"- deduped {removed} != final {final}"
        )
    conservation = {
        "parsed": results["parse"].counts["documents"],
        "translated": results["translate"].counts["translated"],
        "transliterated": results["translit"].counts["transliterated"],
        "produced": produced,
        "filter_discarded": discarded,
        "dedup_removed": removed,
        "final": final,
    }
    final_manifest = read_manifest(files["deduped"]).to_dict()
    report = {
        "order": list(RUN_ALL_ORDER),
        "stages": {name: r.to_dict() for name, r in results.items()},
        "conservation": conservation,
        "final_manifest": final_manifest,
    }
    files["run_report"].write_text(
        json.dumps(report, ensure_ascii=False, sort_keys=True, indent=2) + "\n",
        encoding="utf-8",
    )
    logger.info(
        "run-all complete: %d produced, %d filtered, %d deduped, %d final",
        produced,
        discarded,
        removed,
        final,
    )
    return report
