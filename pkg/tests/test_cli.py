import json
from pathlib import Path

import pytest

from kgc_forge.cli import main


@pytest.fixture
def data_dir(tmp_path):
    d = tmp_path / "data"
    d.mkdir()
    rows = [f"e{i}\tp\te{(i + 2) % 12}" for i in range(12)]
    rows += [f"e{i}\tq\te{(i + 5) % 12}" for i in range(12)]
    (d / "all.tsv").write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    return d


@pytest.fixture
def split_dir(tmp_path, data_dir):
    out = tmp_path / "ds"
    assert main(["ingest", str(data_dir), "--out", str(out), "--seed", "1", "--deterministic"]) == 0
    return out


def test_ingest_outputs(data_dir, tmp_path, capsys):
    out = tmp_path / "out"
    code = main(["ingest", str(data_dir), "--out", str(out), "--seed", "3", "--deterministic"])
    assert code == 0
    stats = json.loads(capsys.readouterr().out)
    assert stats["entities"] == 12
    assert stats["relations"] == 2
    assert stats["train"] + stats["dev"] + stats["test"] == 24
    for name in ("train.tsv", "dev.tsv", "test.tsv", "stats.json", "manifest.json"):
        assert (out / name).exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["seed"] == 3
    assert manifest["command"] == "ingest"
    assert "timestamp" not in manifest
    assert any(k.endswith("all.tsv") for k in manifest["inputs"])


def test_ingest_bad_ratios_is_usage_error(data_dir, tmp_path):
    assert main(["ingest", str(data_dir), "--out", str(tmp_path / "x"), "--ratios", "0.5,0.5"]) == 1


def test_missing_dataset_is_runtime_error(tmp_path, capsys):
    code = main(["ingest", str(tmp_path / "absent"), "--out", str(tmp_path / "x")])
    assert code == 2
    assert "absent" in capsys.readouterr().err


def test_unknown_flag_is_usage_error(data_dir, tmp_path):
    assert main(["ingest", str(data_dir), "--out", str(tmp_path / "x"), "--frobnicate"]) == 1


def test_unknown_subcommand_is_usage_error():
    assert main(["transmogrify"]) == 1


def test_train_manifest_echoes_defaults(split_dir, tmp_path, capsys):
    model = tmp_path / "m" / "clf.npz"
    code = main([
        "train", "--data", str(split_dir), "--scorer", "classifier", "--task", "tc",
        "--out", str(model), "--epochs", "1", "--hidden", "8", "--deterministic",
    ])
    assert code == 0
    out = json.loads(capsys.readouterr().out)
    assert Path(out["model"]).exists()
    manifest = json.loads((model.parent / "manifest.json").read_text())
    cfg = manifest["config"]
    assert cfg["batch_size"] == 32
    assert cfg["learning_rate"] == 5e-5
    assert cfg["dropout"] == 0.1
    assert cfg["negative_ratio"] == 1  # tc default
    assert cfg["task"] == "tc"


def test_train_lp_task_defaults(split_dir, tmp_path):
    model = tmp_path / "lp.npz"
    code = main([
        "train", "--data", str(split_dir), "--scorer", "transe", "--task", "lp",
        "--out", str(model), "--epochs", "2", "--dim", "4", "--deterministic",
    ])
    assert code == 0
    manifest = json.loads((model.parent / "manifest.json").read_text())
    assert manifest["config"]["negative_ratio"] == 5  # lp default


def _train_quick(split_dir, tmp_path, scorer, task, name, extra=()):
    model = tmp_path / name
    assert main([
        "train", "--data", str(split_dir), "--scorer", scorer, "--task", task,
        "--out", str(model), "--epochs", "2", "--dim", "4", "--hidden", "8",
        "--lr", "0.01", "--deterministic", *extra,
    ]) == 0
    return model


def test_eval_lp_report_shape(split_dir, tmp_path, capsys):
    model = _train_quick(split_dir, tmp_path, "transe", "lp", "t.npz")
    report_path = tmp_path / "lp" / "report.json"
    code = main([
        "eval-lp", "--data", str(split_dir), "--model", str(model),
        "--out", str(report_path), "--workers", "1", "--seed", "0", "--deterministic",
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["task"] == "lp"
    assert report["MR"] >= 1.0
    assert set(report["hits"]) == {"1", "3", "10"}
    assert report["num_ranks"] == 2 * len((split_dir / "test.tsv").read_text().splitlines())
    assert report["per_cardinality"]
    assert (report_path.parent / "manifest.json").exists()


def test_eval_tc_report(split_dir, tmp_path, capsys):
    model = _train_quick(split_dir, tmp_path, "distmult", "tc", "d.npz")
    report_path = tmp_path / "tc" / "report.json"
    code = main([
        "eval-tc", "--data", str(split_dir), "--model", str(model),
        "--out", str(report_path), "--seed", "0", "--deterministic",
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["task"] == "tc"
    assert 0.0 <= report["accuracy"] <= 1.0


def test_eval_rp_report(split_dir, tmp_path):
    model = _train_quick(split_dir, tmp_path, "classifier", "rp", "r.npz")
    report_path = tmp_path / "rp" / "report.json"
    code = main([
        "eval-rp", "--data", str(split_dir), "--model", str(model),
        "--out", str(report_path), "--workers", "2", "--seed", "0", "--deterministic",
    ])
    assert code == 0
    report = json.loads(report_path.read_text())
    assert report["task"] == "rp"
    assert 0.0 < report["MRR"] <= 1.0


def test_eval_requires_model_or_bridge(split_dir, tmp_path):
    assert main(["eval-lp", "--data", str(split_dir), "--out", str(tmp_path / "r.json")]) == 1


def test_bridge_requires_endpoint(split_dir, tmp_path):
    assert main([
        "eval-lp", "--data", str(split_dir), "--scorer", "bridge",
        "--out", str(tmp_path / "r.json"),
    ]) == 1


def test_report_determinism(split_dir, tmp_path):
    model = _train_quick(split_dir, tmp_path, "transe", "lp", "det.npz")
    a = tmp_path / "a" / "report.json"
    b = tmp_path / "b" / "report.json"
    for path in (a, b):
        assert main([
            "eval-lp", "--data", str(split_dir), "--model", str(model),
            "--out", str(path), "--workers", "4", "--seed", "7", "--deterministic",
        ]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert (a.parent / "manifest.json").read_bytes() != b""  # manifest written
    ma = json.loads((a.parent / "manifest.json").read_text())
    assert "timestamp" not in ma


def test_env_seed_respected(split_dir, tmp_path, monkeypatch):
    monkeypatch.setenv("KGC_FORGE_SEED", "42")
    model = _train_quick(split_dir, tmp_path, "distmult", "tc", "env.npz")
    manifest = json.loads((model.parent / "manifest.json").read_text())
    assert manifest["seed"] == 42


def test_ablate_cardinality_outputs(split_dir, tmp_path, capsys):
    model = _train_quick(split_dir, tmp_path, "transe", "lp", "ab.npz")
    out = tmp_path / "ablation"
    code = main([
        "ablate", "--data", str(split_dir), "--model", str(model), "--by", "cardinality",
        "--out", str(out), "--workers", "1", "--deterministic",
    ])
    assert code == 0
    cells = json.loads((out / "cardinality.json").read_text())["cells"]
    assert cells
    csv_text = (out / "per_cardinality.csv").read_text()
    assert csv_text.startswith("category,side,metric,value\n")


def test_ablate_relations_outputs(split_dir, tmp_path):
    model = _train_quick(split_dir, tmp_path, "classifier", "rp", "abr.npz")
    out = tmp_path / "extremes"
    code = main([
        "ablate", "--data", str(split_dir), "--model", str(model), "--by", "relations",
        "--out", str(out), "--min-support", "1", "--deterministic",
    ])
    assert code == 0
    blob = json.loads((out / "relation_extremes.json").read_text())
    assert blob["best"] and blob["worst"]


def test_export_tables(split_dir, tmp_path):
    model = _train_quick(split_dir, tmp_path, "transe", "lp", "ex.npz")
    report_path = tmp_path / "rep" / "report.json"
    assert main([
        "eval-lp", "--data", str(split_dir), "--model", str(model),
        "--out", str(report_path), "--workers", "1", "--deterministic",
    ]) == 0
    tables = tmp_path / "tables"
    code = main([
        "export", "--report", str(report_path), "--data", str(split_dir),
        "--out", str(tables), "--deterministic",
    ])
    assert code == 0
    assert (tables / "per_relation.csv").exists()
    assert (tables / "per_cardinality.csv").exists()
    assert (tables / "manifest.json").exists()


def test_export_missing_report(split_dir, tmp_path):
    assert main([
        "export", "--report", str(tmp_path / "nope.json"), "--data", str(split_dir),
        "--out", str(tmp_path / "t"),
    ]) == 2
