"""Command-line interface: exit codes, JSON reports, error objects."""

import json

import pytest

from synthcorpus import __version__
from synthcorpus.cli import main
from synthcorpus.toygen import make_raw_records


def write_raw(path, n=16, seed=3):
    records = make_raw_records(n, seed, hindi_fraction=0.5, noise_fraction=0.1)
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


def write_config(path, raw, work, seed=5):
    path.write_text(
        json.dumps(
            {
                "seed": seed,
                "paths": {"input": str(raw), "work_dir": str(work)},
                "lm": {"order": 2},
                "blend": {"batch_size": 4, "steps": 5},
            }
        ),
        encoding="utf-8",
    )


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    raw = root / "raw.jsonl"
    work = root / "work"
    config = root / "config.json"
    write_raw(raw)
    write_config(config, raw, work)
    return {"root": root, "raw": raw, "work": work, "config": config}


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def stdout_json(out):
    return json.loads(out)


def stderr_json(err):
    return json.loads(err.strip().splitlines()[-1])


# --- version and config errors --------------------------------------------------


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as exc_info:
        main(["--version"])
    assert exc_info.value.code == 0
    assert __version__ in capsys.readouterr().out


def test_unknown_config_key_is_usage_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"lmm": {}}', encoding="utf-8")
    code, out, err = run_cli(capsys, "parse", "--config", str(bad))
    assert code == 2
    report = stderr_json(err)
    assert report["error"] == "ConfigError"
    assert "lmm" in report["message"]
    assert report["command"] == "parse"


def test_missing_config_file_is_usage_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "parse", "--config", str(tmp_path / "absent.json")
    )
    assert code == 2


def test_invalid_backend_spec_is_usage_error(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    write_raw(raw, n=4)
    config = tmp_path / "config.json"
    config.write_text(
        json.dumps(
            {
                "paths": {"input": str(raw), "work_dir": str(tmp_path / "w")},
                "translate": {"backend": "babelfish"},
            }
        ),
        encoding="utf-8",
    )
    assert main(["parse", "--config", str(config)]) == 0
    capsys.readouterr()
    code, _, err = run_cli(capsys, "translate", "--config", str(config))
    assert code == 2
    assert "babelfish" in stderr_json(err)["message"]


# --- stage commands -------------------------------------------------------------


def test_stage_chain_and_reports(workspace, capsys):
    cfg = str(workspace["config"])

    code, out, _ = run_cli(capsys, "parse", "--config", cfg)
    assert code == 0
    parse_report = stdout_json(out)
    assert parse_report["stage"] == "parse"
    assert parse_report["counts"]["documents"] == 16

    for stage in ("translate", "lm-train", "filter", "translit", "dedup", "blend"):
        code, out, err = run_cli(capsys, stage, "--config", cfg)
        assert code == 0, (stage, err)
        assert stdout_json(out)["stage"] == stage

    # Conservation holds across the chain's reports.
    work = workspace["work"]
    reports = {
        name: json.loads((work / "reports" / f"{name}.json").read_text())
        for name in ("parse", "translate", "filter", "translit", "dedup")
    }
    produced = (
        reports["parse"]["counts"]["documents"]
        + reports["translate"]["counts"]["translated"]
        + reports["translit"]["counts"]["transliterated"]
    )
    final = reports["dedup"]["counts"]["output"]
    assert final == (
        produced
        - reports["filter"]["counts"]["discarded"]
        - reports["dedup"]["counts"]["removed"]
    )


def test_resume_reports_skip(workspace, capsys):
    cfg = str(workspace["config"])
    code, out, _ = run_cli(capsys, "parse", "--config", cfg, "--resume")
    assert code == 0
    assert stdout_json(out)["skipped"] is True


def test_filter_before_lm_train_is_stage_error(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    write_raw(raw, n=6)
    config = tmp_path / "config.json"
    write_config(config, raw, tmp_path / "w")
    assert main(["parse", "--config", str(config)]) == 0
    assert main(["translate", "--config", str(config)]) == 0
    capsys.readouterr()
    code, _, err = run_cli(capsys, "filter", "--config", str(config))
    assert code == 1
    report = stderr_json(err)
    assert report["error"] == "MissingInputError"
    assert "lm-train" in report["message"]


def test_run_all_command(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    write_raw(raw, n=12)
    config = tmp_path / "config.json"
    write_config(config, raw, tmp_path / "work")
    code, out, err = run_cli(capsys, "run-all", "--config", str(config))
    assert code == 0, err
    report = stdout_json(out)
    cons = report["conservation"]
    assert cons["final"] == (
        cons["produced"] - cons["filter_discarded"] - cons["dedup_removed"]
    )
    assert set(report["stages"]) == {
        "parse",
        "translate",
        "lm-train",
        "filter",
        "translit",
        "dedup",
        "blend",
    }


# --- analysis commands --------------------------------------------------------------


def test_stats_command(workspace, capsys):
    shard = workspace["work"] / "parsed.jsonl.gz"
    code, out, _ = run_cli(capsys, "stats", "--input", str(shard))
    assert code == 0
    stats = stdout_json(out)
    assert stats["documents"] == 16
    assert set(stats["tokens"]) == {"whitespace", "char"}


def test_lm_score_stdout_and_file(workspace, capsys, tmp_path):
    cfg = str(workspace["config"])
    shard = workspace["work"] / "parsed.jsonl.gz"
    code, out, _ = run_cli(
        capsys, "lm-score", "--config", cfg, "--input", str(shard)
    )
    assert code == 0
    lines = [json.loads(l) for l in out.strip().splitlines()]
    assert len(lines) == 16
    assert all(
        set(rec) == {"id", "events", "log_perplexity", "perplexity"}
        for rec in lines
    )

    out_file = tmp_path / "scores.jsonl"
    code, out, _ = run_cli(
        capsys,
        "lm-score",
        "--config",
        cfg,
        "--input",
        str(shard),
        "--out",
        str(out_file),
    )
    assert code == 0
    assert stdout_json(out)["documents"] == 16
    assert len(out_file.read_text().strip().splitlines()) == 16


def test_lm_score_without_model_is_stage_error(tmp_path, capsys):
    raw = tmp_path / "raw.jsonl"
    write_raw(raw, n=4)
    config = tmp_path / "config.json"
    write_config(config, raw, tmp_path / "w")
    assert main(["parse", "--config", str(config)]) == 0
    capsys.readouterr()
    code, _, err = run_cli(
        capsys,
        "lm-score",
        "--config",
        str(config),
        "--input",
        str(tmp_path / "w" / "parsed.jsonl.gz"),
    )
    assert code == 1
    assert "lm-train" in stderr_json(err)["message"]


def test_backfilter_command(tmp_path, capsys):
    pairs = tmp_path / "pairs.jsonl"
    with open(pairs, "w", encoding="utf-8") as fh:
        for src in ("the rivers meet", "a quiet evening"):
            fh.write(json.dumps({"source": src, "target": src}) + "\n")
    code, out, _ = run_cli(
        capsys,
        "backfilter",
        "--pairs",
        str(pairs),
        "--backend",
        "echo",
        "--out-dir",
        str(tmp_path / "bf"),
    )
    assert code == 0
    report = stdout_json(out)
    assert report["kept"] == 2 and report["rejected"] == 0
    assert report["mean_similarity"] == 1.0
    kept_lines = (tmp_path / "bf" / "backfilter_kept.jsonl").read_text()
    assert len(kept_lines.strip().splitlines()) == 2


def test_trainplan_command(tmp_path, capsys):
    out_path = tmp_path / "sft.json"
    code, out, _ = run_cli(
        capsys,
        "trainplan",
        "--stage",
        "sft",
        "--out",
        str(out_path),
        "--hindi-only",
    )
    assert code == 0
    plan = json.loads(out_path.read_text())
    assert plan["stage"] == "sft"
    assert plan["example_counts"] == {"hi": 70000}


def test_trainplan_missing_data_ref_is_usage_error(tmp_path, capsys):
    code, _, err = run_cli(
        capsys,
        "trainplan",
        "--stage",
        "dpo",
        "--out",
        str(tmp_path / "dpo.json"),
        "--data-ref",
        "ghost.manifest.json",
        "--base-dir",
        str(tmp_path),
    )
    assert code == 2
    assert stderr_json(err)["error"] == "PlanError"


def test_eval_judge_command(tmp_path, capsys):
    items = tmp_path / "items.jsonl"
    with open(items, "w", encoding="utf-8") as fh:
        for i in range(4):
            fh.write(
                json.dumps(
                    {
                        "id": f"q{i}",
                        "lang": "hi" if i % 2 else "en",
                        "domain": "math",
                        "question": f"Question {i}?",
                        "response": f"Answer {i}.",
                        "reference_facts": "the facts",
                    }
                )
                + "\n"
            )
    records_out = tmp_path / "records.jsonl"
    code, out, _ = run_cli(
        capsys,
        "eval-judge",
        "--items",
        str(items),
        "--judge",
        "mock",
        "--out-records",
        str(records_out),
    )
    assert code == 0
    report = stdout_json(out)
    assert report["count"] == 4
    assert report["flagged_ids"] == []
    assert 1.0 <= report["overall_mean"] <= 5.0
    assert len(records_out.read_text().strip().splitlines()) == 4


def test_eval_judge_fact_mode_requires_facts(tmp_path, capsys):
    items = tmp_path / "items.jsonl"
    items.write_text(
        json.dumps(
            {
                "id": "q1",
                "lang": "hi",
                "domain": "math",
                "question": "Q?",
                "response": "A.",
            }
        )
        + "\n",
        encoding="utf-8",
    )
    code, _, err = run_cli(
        capsys, "eval-judge", "--items", str(items), "--judge", "mock"
    )
    assert code == 2
    assert "reference_facts" in stderr_json(err)["message"]


def test_eval_ab_command(tmp_path, capsys):
    verdicts = tmp_path / "verdicts.jsonl"
    rows = [
        {"prompt_id": "p1", "model_a": "ours", "model_b": "base", "presented_first": "a", "verdict": "a_wins"},
        {"prompt_id": "p2", "model_a": "ours", "model_b": "base", "presented_first": "b", "verdict": "a_wins"},
        {"prompt_id": "p3", "model_a": "ours", "model_b": "base", "presented_first": "a", "verdict": "tie"},
        {"prompt_id": "p4", "model_a": "ours", "model_b": "base", "presented_first": "b", "verdict": "b_wins"},
    ]
    with open(verdicts, "w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(json.dumps(row) + "\n")
    code, out, _ = run_cli(capsys, "eval-ab", "--verdicts", str(verdicts))
    assert code == 0
    report = stdout_json(out)
    assert report["win_pct"] == 50.0
    assert report["tie_pct"] == 25.0
    assert report["loss_pct"] == 25.0
