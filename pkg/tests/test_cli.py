import csv
import json

import pytest

from flavornet.cli import main
from flavornet.graph_core import load_network


@pytest.fixture(scope="module")
def data(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    assert main(["generate", "--out", str(root / "gen"), "--clusters", "3",
                 "--ingredients-per-cluster", "8", "--recipes", "120", "--size-max", "5"]) == 0
    assert main(["project", "--bipartite", str(root / "gen" / "bipartite.tsv"),
                 "--out", str(root / "proj"), "--ff", "0.5"]) == 0
    return root


def inputs(data):
    return ["--network", str(data / "proj" / "network.tsv"),
            "--west", str(data / "gen" / "western.jsonl"),
            "--east", str(data / "gen" / "eastern.jsonl")]


def test_generate_outputs(data):
    names = sorted(p.name for p in (data / "gen").iterdir())
    assert names == ["bipartite.tsv", "eastern.jsonl", "labels.tsv", "western.jsonl"]


def test_project_outputs(data):
    names = {p.name for p in (data / "proj").iterdir()}
    assert {"network.tsv", "filtered.tsv", "degree_histogram.csv", "degree_summary.json",
            "degree_histogram_filtered.csv", "degree_summary_filtered.json"} <= names
    summary = json.loads((data / "proj" / "degree_summary.json").read_text())
    assert summary["nodes"] == 24


def test_filter(data, tmp_path):
    assert main(["filter", "--network", str(data / "proj" / "network.tsv"),
                 "--factor", "0.5", "--out", str(tmp_path)]) == 0
    assert load_network(tmp_path / "filtered.tsv") == load_network(data / "proj" / "filtered.tsv")


def test_sanity_check(data, tmp_path):
    assert main(["sanity-check", "--west", str(data / "gen" / "western.jsonl"),
                 "--east", str(data / "gen" / "eastern.jsonl"), "--out", str(tmp_path)]) == 0
    w = load_network(tmp_path / "western_clean.tsv")
    e = load_network(tmp_path / "eastern_clean.tsv")
    assert not set(w.edges) & set(e.edges)
    for line in (tmp_path / "audit.jsonl").read_text().splitlines():
        assert json.loads(line)["action"] in {"drop_both", "drop_eastern", "drop_western"}


def test_train_classify_rank(data, tmp_path, capsys):
    assert main(["train", *inputs(data), "--out", str(tmp_path), "--format", "csv"]) == 0
    with open(tmp_path / "metrics.csv") as fh:
        row = next(csv.DictReader(fh))
    assert 0 <= float(row["sensitivity"]) <= 1
    model = str(tmp_path / "model")

    capsys.readouterr()
    assert main(["classify", "--model", model, "--pair", "ing00_000,ing00_001",
                 "--out", str(tmp_path)]) == 0
    verdict = json.loads(capsys.readouterr().out)
    assert (verdict["a"], verdict["b"]) == ("ing00_000", "ing00_001")
    assert main(["classify", "--model", model, "--pair", "ing00_000,saffron",
                 "--pair", "ing00_000,ing01_000", "--out", str(tmp_path)]) == 0
    assert json.loads((tmp_path / "verdicts.json").read_text())[0]["unknown"] is True

    assert main(["rank", "--model", model, "--limit", "5", "--out", str(tmp_path)]) == 0
    rows = (tmp_path / "ranking.csv").read_text().splitlines()
    assert rows[0] == "a,b,compatible,score" and len(rows) == 6


def test_evaluate_test_target(data, tmp_path):
    assert main(["evaluate", *inputs(data), "--target", "test", "--reps", "2",
                 "--out", str(tmp_path)]) == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert metrics["target"] == "test" and len(metrics["repetitions"]) == 2


def test_sweep_is_reproducible(data, tmp_path):
    args = ["sweep", *inputs(data), "--step", "1", "--reps", "1", "--threads", "1",
            "--fix-ff", "1"]
    assert main([*args, "--out", str(tmp_path / "a")]) == 0
    assert main([*args, "--out", str(tmp_path / "b")]) == 0
    a = (tmp_path / "a" / "sweep.csv").read_bytes()
    assert a == (tmp_path / "b" / "sweep.csv").read_bytes()
    assert len(a.decode().splitlines()) == 5
    assert (tmp_path / "a" / "best_model" / "partition.tsv").is_file()


def test_config_file_and_flag_precedence(data, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"ff": 0.5, "fr": 0.3, "knowledge": 0.2}))
    assert main(["train", *inputs(data), "--config", str(cfg), "--fr", "0.4",
                 "--out", str(tmp_path)]) == 0
    metrics = json.loads((tmp_path / "metrics.json").read_text())
    assert (metrics["ff"], metrics["fr"], metrics["knowledge"]) == (0.5, 0.4, 0.2)


def test_unknown_config_key(data, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"alpha": 1}))
    assert main(["train", *inputs(data), "--config", str(cfg), "--out", str(tmp_path)]) == 1


def test_usage_errors(data, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["train", "--bogus"])
    assert exc.value.code == 1
    assert main(["train", "--out", str(tmp_path)]) == 1
    assert main(["project", "--bipartite", str(tmp_path / "missing.tsv")]) == 1
    assert main(["classify", "--model", str(tmp_path)]) == 1


def test_data_errors(data, tmp_path):
    bad = tmp_path / "bad.tsv"
    bad.write_text("only_one_column\n")
    assert main(["project", "--bipartite", str(bad), "--out", str(tmp_path)]) == 2
    assert main(["train", *inputs(data), "--ff", "1.5", "--out", str(tmp_path)]) == 2
    assert main(["generate", "--clusters", "1", "--out", str(tmp_path)]) == 2


def test_reruns_are_byte_identical(data, tmp_path):
    for name in ("a", "b"):
        assert main(["train", *inputs(data), "--seed", "4", "--out", str(tmp_path / name)]) == 0
    for f in ("partition.tsv", "network.tsv", "config.json", "metrics.json", "audit.jsonl"):
        assert (tmp_path / "a" / "model" / f).read_bytes() == (tmp_path / "b" / "model" / f).read_bytes()
