import json

import pytest

from profilematch.cli import main

SMALL = {"n_train_coupled": 80, "n_train_uncoupled": 80, "n_eval": 40, "n_eval_coupled": 20,
         "lda_topics": 5, "lda_iterations": 50, "sizes": [10, 20, 40]}


def without_timestamp(path):
    data = json.loads(path.read_text())
    data.pop("generated_at", None)
    return data


@pytest.fixture(scope="module")
def zero_run(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    (root / "synth.json").write_text(json.dumps({**SMALL, "preset": "zero", "seed": 4, "out": "data"}))
    assert main(["synth", "--config", str(root / "synth.json")]) == 0
    cfg = str(root / "data" / "config.json")
    for cmd in (["train"], ["match"], ["eval"]):
        assert main(cmd + ["--config", cfg]) == 0
    return root / "data", cfg


def test_perfect_run_metrics(zero_run):
    data, _ = zero_run
    m = json.loads((data / "metrics.json").read_text())
    assert m["metrics"]["precision"] == m["metrics"]["recall"] == m["metrics"]["accuracy"] == 1.0
    assert m["config"]["preset"] == "zero" and "generated_at" in m
    assert (data / "pr_curve.csv").read_text().count("\n") == 102


def test_reruns_are_byte_identical(zero_run):
    data, cfg = zero_run
    names = ["model.json", "lda.json", "sentiment.json", "assignment.csv", "metrics.json", "pr_curve.csv"]
    before = {n: (data / n).read_bytes() for n in names}
    for cmd in (["train"], ["match"], ["eval"]):
        assert main(cmd + ["--config", cfg]) == 0
    for n in names:
        if n.endswith(".json"):
            a = json.loads(before[n])
            a.pop("generated_at")
            assert without_timestamp(data / n) == a
        else:
            assert (data / n).read_bytes() == before[n]


def test_weak_only_training(zero_run, tmp_path, capsys):
    _, cfg = zero_run
    assert main(["train", "--config", cfg, "--attributes", "weak", "--out", str(tmp_path)]) == 0
    weights = json.loads((tmp_path / "model.json").read_text())["weights"]
    assert {a for a, w in weights.items() if w != 0} == {"activity", "freetext", "interest", "sentiment"}
    assert "activity" in capsys.readouterr().out


def test_match_without_model_names_path(zero_run, tmp_path, capsys):
    _, cfg = zero_run
    assert main(["match", "--config", cfg, "--out", str(tmp_path)]) != 0
    assert str(tmp_path / "model.json") in capsys.readouterr().err


def test_eval_before_match(zero_run, tmp_path, capsys):
    _, cfg = zero_run
    assert main(["eval", "--config", cfg, "--out", str(tmp_path)]) != 0
    assert "assignment.csv" in capsys.readouterr().err


def test_targeted_eval(zero_run):
    data, cfg = zero_run
    out = data / "targeted"
    assert main(["eval", "--config", cfg, "--victims", "5", "--runs", "3", "--out", str(out)]) == 1
    # the model lives next to the config, so point at it explicitly
    conf = json.loads((data / "config.json").read_text())
    conf["model"] = "model.json"
    conf["lda"] = "lda.json"
    conf["sentiment"] = "sentiment.json"
    (data / "targeted.json").write_text(json.dumps(conf))
    assert main(["eval", "--config", str(data / "targeted.json"), "--victims", "5", "--runs", "3",
                 "--out", str(out)]) == 0
    m = json.loads((out / "metrics.json").read_text())
    assert m["attack"] == "targeted" and len(m["runs"]) == 3


def test_sweep_and_baseline(zero_run):
    data, cfg = zero_run
    assert main(["sweep", "--config", cfg]) == 0
    rows = (data / "sweep.csv").read_text().splitlines()
    assert rows[0] == "size,subsets,threshold,precision,recall,accuracy" and len(rows) == 4
    assert main(["baseline", "--config", cfg, "--kind", "cart"]) == 0
    b = json.loads((data / "baseline_cart.json").read_text())
    assert b["method"] == "baseline-cart" and 0 <= b["metrics"]["precision"] <= 1


def test_graphsplit(tmp_path):
    assert main(["graphsplit", "--out", str(tmp_path), "--edge-overlap", "1.0", "--seed", "3"]) == 0
    assert (tmp_path / "aux_edges.txt").read_text() == (tmp_path / "tgt_edges.txt").read_text()
    meta = json.loads((tmp_path / "graphsplit.json").read_text())
    assert meta["shared_edges"] == meta["edges"]


@pytest.mark.parametrize("body, fragment", [
    ("{not json", "invalid JSON"),
    ('{"colour": 1}', "unknown config keys"),
    ('{"attributes": "most"}', "attribute set"),
])
def test_bad_config(tmp_path, capsys, body, fragment):
    (tmp_path / "c.json").write_text(body)
    assert main(["train", "--config", str(tmp_path / "c.json")]) != 0
    assert fragment in capsys.readouterr().err


def test_missing_config(tmp_path, capsys):
    assert main(["train", "--config", str(tmp_path / "nope.json")]) != 0
    assert "nope.json" in capsys.readouterr().err
