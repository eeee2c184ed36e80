"""Stage orchestration: gating, resume, checksums, conservation."""

import dataclasses
import json

import pytest

from synthcorpus.config import PipelineConfig
from synthcorpus.corpus import read_manifest, read_shard
from synthcorpus.docparse import parse_document, segment_sentences
from synthcorpus.pipeline import (
    ChecksumMismatchError,
    MissingInputError,
    PipelineError,
    RUN_ALL_ORDER,
    corpus_stats,
    load_shard_docs,
    run_all,
    stage_filter,
    stage_lm_train,
    stage_parse,
    stage_translate,
    work_files,
)
from synthcorpus.toygen import make_raw_records


def write_raw(path, n=20, seed=0, noise=0.1):
    records = make_raw_records(n, seed, hindi_fraction=0.5, noise_fraction=noise)
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")
    return records


@pytest.fixture
def env(tmp_path):
    raw = tmp_path / "raw.jsonl"
    write_raw(raw)
    work = tmp_path / "work"
    cfg = PipelineConfig.from_dict(
        {
            "seed": 11,
            "paths": {"input": str(raw), "work_dir": str(work)},
            "lm": {"order": 2},
            "blend": {"batch_size": 4, "steps": 10},
        }
    )
    return cfg, work, raw


# --- parse ------------------------------------------------------------------


def test_parse_builds_shard(env):
    cfg, work, raw = env
    result = stage_parse(cfg, work)
    assert result.stage == "parse"
    assert result.counts["documents"] == 20
    assert not result.skipped
    docs = load_shard_docs(work_files(work)["parsed"], "parsed")
    assert len(docs) == 20
    assert {d.lang for d in docs} == {"hi", "en"}
    assert all(d.provenance == "real-web" for d in docs)
    # Work dir carries a resolved config snapshot.
    snapshot = json.loads(work_files(work)["config_snapshot"].read_text())
    assert snapshot["seed"] == 11


def test_parse_missing_input(tmp_path):
    cfg = PipelineConfig.from_dict(
        {"paths": {"input": str(tmp_path / "nope.jsonl"), "work_dir": str(tmp_path / "w")}}
    )
    with pytest.raises(MissingInputError, match="not found"):
        stage_parse(cfg, tmp_path / "w")


def test_parse_tolerates_malformed_lines(env, tmp_path):
    cfg, work, raw = env
    with open(raw, "a", encoding="utf-8") as fh:
        fh.write("{broken json\n")
        fh.write(json.dumps({"lang": "hi"}) + "\n")  # missing "text"
    result = stage_parse(cfg, work)
    assert result.counts["documents"] == 20
    assert result.counts["line_errors"] == 2
    assert len(result.details["line_errors"]) == 2


# --- gating / resume ------------------------------------------------------------


def test_resume_skips_unchanged_stage(env):
    cfg, work, _ = env
    first = stage_parse(cfg, work)
    again = stage_parse(cfg, work, resume=True)
    assert again.skipped
    assert again.fingerprint == first.fingerprint
    assert again.counts == first.counts


def test_without_resume_stage_reruns(env):
    cfg, work, _ = env
    stage_parse(cfg, work)
    again = stage_parse(cfg, work)
    assert not again.skipped


def test_changed_config_triggers_rerun(env):
    cfg, work, _ = env
    stage_parse(cfg, work)
    changed = dataclasses.replace(
        cfg, parse=dataclasses.replace(cfg.parse, default_lang="en")
    )
    result = stage_parse(changed, work, resume=True)
    assert not result.skipped


def test_tampered_output_detected_on_resume(env):
    cfg, work, _ = env
    stage_parse(cfg, work)
    parsed = work_files(work)["parsed"]
    parsed.write_bytes(parsed.read_bytes() + b"tampered")
    with pytest.raises(ChecksumMismatchError, match="parse"):
        stage_parse(cfg, work, resume=True)


def test_corrupted_shard_rejected_at_load(env):
    cfg, work, _ = env
    stage_parse(cfg, work)
    parsed = work_files(work)["parsed"]
    parsed.write_bytes(parsed.read_bytes() + b"oops")
    with pytest.raises(ChecksumMismatchError, match="does not match its manifest"):
        load_shard_docs(parsed, "parsed")


def test_missing_shard_rejected_at_load(tmp_path):
    with pytest.raises(MissingInputError, match="run the producing stage"):
        load_shard_docs(tmp_path / "never.jsonl.gz", "parsed")


# --- stage prerequisites -----------------------------------------------------------


def test_filter_requires_model(env):
    cfg, work, _ = env
    stage_parse(cfg, work)
    stage_translate(cfg, work)
    with pytest.raises(MissingInputError, match="run lm-train first"):
        stage_filter(cfg, work)


def test_lm_train_requires_matching_documents(env):
    cfg, work, _ = env
    stage_parse(cfg, work)
    no_match = dataclasses.replace(
        cfg, lm=dataclasses.replace(cfg.lm, train_lang="fr")
    )
    with pytest.raises(PipelineError, match="no training documents"):
        stage_lm_train(no_match, work)


# --- crash resume in translate ------------------------------------------------------


def test_translate_resumes_from_partial(env, monkeypatch):
    cfg, work, _ = env
    stage_parse(cfg, work)

    from synthcorpus.translate import BackendError, MappingBackend

    class DiesAfter(MappingBackend):
        def __init__(self, budget):
            super().__init__()
            self.budget = budget

        def translate(self, sentences, src_lang, tgt_lang):
            if self.budget <= 0:
                raise BackendError("simulated crash")
            self.budget -= 1
            return super().translate(sentences, src_lang, tgt_lang)

    crashing = DiesAfter(budget=3)
    monkeypatch.setattr(
        "synthcorpus.pipeline.resolve_backend", lambda spec: crashing
    )
    serial = dataclasses.replace(
        cfg, translate=dataclasses.replace(cfg.translate, concurrency=1, retries=1)
    )
    with pytest.raises(BackendError):
        stage_translate(serial, work)

    ckpt_dir = work_files(work)["checkpoints"]
    state = json.loads((ckpt_dir / "translate.json").read_text())
    done_before = state["completed"]
    assert done_before >= 1

    healthy = MappingBackend()
    calls = []
    real_translate = healthy.translate

    def counting(sentences, src_lang, tgt_lang):
        calls.append(len(sentences))
        return real_translate(sentences, src_lang, tgt_lang)

    healthy.translate = counting
    monkeypatch.setattr(
        "synthcorpus.pipeline.resolve_backend", lambda spec: healthy
    )
    result = stage_translate(serial, work, resume=True)
    assert result.counts["translated"] == result.counts["source_documents"]
    # The resumed run only paid for the remaining documents.
    parsed = load_shard_docs(work_files(work)["parsed"], "parsed")
    en_docs = [d for d in parsed if d.lang == "en"]
    assert len(calls) < len(en_docs) or done_before == 0
    translated = load_shard_docs(work_files(work)["translated"], "translated")
    assert [t.meta["source_id"] for t in translated] == [d.id for d in en_docs]


# --- run-all --------------------------------------------------------------------------


def test_run_all_conserves_documents(env):
    cfg, work, _ = env
    report = run_all(cfg, work)
    assert report["order"] == list(RUN_ALL_ORDER)
    cons = report["conservation"]
    assert cons["produced"] == (
        cons["parsed"] + cons["translated"] + cons["transliterated"]
    )
    assert cons["final"] == (
        cons["produced"] - cons["filter_discarded"] - cons["dedup_removed"]
    )
    files = work_files(work)
    manifest = read_manifest(files["deduped"])
    assert manifest.document_count == cons["final"]
    assert files["run_report"].exists()
    assert files["blend_spec"].exists()
    assert files["schedule"].exists()
    # Blend schedule covers the configured draw count.
    schedule_lines = files["schedule"].read_text().strip().splitlines()
    assert len(schedule_lines) == cfg.blend.batch_size * cfg.blend.steps


def test_run_all_resume_skips_everything(env):
    cfg, work, _ = env
    run_all(cfg, work)
    report = run_all(cfg, work, resume=True)
    assert all(stage["skipped"] for stage in report["stages"].values())


def test_run_all_is_reproducible(env, tmp_path):
    cfg, work, raw = env
    report1 = run_all(cfg, work)
    work2 = tmp_path / "work2"
    cfg2 = dataclasses.replace(
        cfg, paths=dataclasses.replace(cfg.paths, work_dir=str(work2))
    )
    report2 = run_all(cfg2, work2)
    assert report1["conservation"] == report2["conservation"]
    m1 = work_files(work)["deduped"]
    m2 = work_files(work2)["deduped"]
    assert m1.read_bytes() == m2.read_bytes()


# --- stats ---------------------------------------------------------------------------------


def test_corpus_stats_counts():
    docs = [
        segment_sentences(parse_document("# Head\n\nOne two. Three.", "en")),
        segment_sentences(parse_document("नमस्ते दुनिया।", "hi")),
    ]
    stats = corpus_stats(docs)
    assert stats["documents"] == 2
    assert stats["by_lang"] == {"en": 1, "hi": 1}
    assert stats["by_script"] == {"latin": 1, "devanagari": 1}
    assert stats["by_provenance"] == {"real-web": 2}
    assert stats["block_kinds"] == {"heading": 1, "paragraph": 2}
    assert stats["sentences"] == 4  # heading counts as one sentence unit
    # Content text drops markdown scaffolding: "Head" + 3 + 2 words.
    assert stats["tokens"]["whitespace"] == 6
