"""End-to-end command driver checks, including exit codes."""

import json

import numpy as np
import pytest

from lmmk.cli import main
from lmmk.errors import SolverError
from lmmk.synthetic import gaussian_classes


def write_dataset(tmp_path, n_per=12, seed=60):
    X, y = gaussian_classes(3, n_per, 2, 3, separation=2.4, seed=seed)
    names = [f"f{i}" for i in range(X.shape[1])]
    lines = ["label," + ",".join(names)]
    for lab, row in zip(y, X):
        lines.append(f"c{lab}," + ",".join(repr(float(v)) for v in row))
    (tmp_path / "train.csv").write_text("\n".join(lines) + "\n")

    Xt, yt = gaussian_classes(3, 4, 2, 3, separation=2.4, seed=seed + 1)
    tl = ["label," + ",".join(names)]
    for lab, row in zip(yt, Xt):
        tl.append(f"c{lab}," + ",".join(repr(float(v)) for v in row))
    (tmp_path / "test.csv").write_text("\n".join(tl) + "\n")

    cfg = {
        "data": "train.csv",
        "kernel_mode": "per-feature",
        "hyperparams": {"k": 2, "mu": 0.5, "lambda": 1.0, "outer_iters": 2},
        "split": {"train_fraction": 0.7, "repetitions": 2, "seed": 5},
    }
    (tmp_path / "config.json").write_text(json.dumps(cfg))
    return tmp_path / "config.json"


def test_evaluate_writes_report(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    rc = main(["evaluate", "--config", str(cfg)])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["schema"] == "lmmk-eval"
    assert len(doc["report"]["repetitions"]) == 2
    assert doc["model"]["format"] == "lmmk-model-bundle"


def test_evaluate_out_flag_writes_file(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    out = tmp_path / "r.json"
    assert main(["evaluate", "--config", str(cfg), "--out", str(out)]) == 0
    assert capsys.readouterr().out == ""
    assert json.loads(out.read_text())["report"]["schema"] == "lmmk-eval"


@pytest.mark.filterwarnings("ignore::lmmk.AllZeroWeightsWarning")
def test_flag_overrides_config(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    rc = main(["evaluate", "--config", str(cfg), "--lambda", "4.0", "--reps", "1", "--k", "1"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["config"]["hyperparams"]["lambda"] == 4.0
    assert doc["report"]["config"]["hyperparams"]["k"] == 1
    assert len(doc["report"]["repetitions"]) == 1


def test_train_then_predict_roundtrip(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    model_path = tmp_path / "model.json"
    assert main(["train", "--config", str(cfg), "--out", str(model_path)]) == 0
    capsys.readouterr()

    rc = main(
        [
            "predict",
            "--config",
            str(cfg),
            "--model",
            str(model_path),
            "--train-data",
            str(tmp_path / "train.csv"),
            "--test-data",
            str(tmp_path / "test.csv"),
        ]
    )
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["schema"] == "lmmk-predict"
    assert len(doc["predicted"]) == 12
    assert doc["accuracy"] is not None


def test_predict_rejects_wrong_training_data(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    model_path = tmp_path / "model.json"
    assert main(["train", "--config", str(cfg), "--out", str(model_path)]) == 0
    capsys.readouterr()
    rc = main(
        [
            "predict",
            "--config",
            str(cfg),
            "--model",
            str(model_path),
            "--train-data",
            str(tmp_path / "test.csv"),
            "--test-data",
            str(tmp_path / "test.csv"),
        ]
    )
    assert rc == 3


def test_build_kernels_then_precomputed_evaluate(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    rc = main(
        ["build-kernels", "--config", str(cfg), "--out-dir", str(tmp_path / "kerns")]
    )
    assert rc == 0
    man = json.loads(capsys.readouterr().out)
    assert man["format"] == "lmmk-kernels"
    assert (tmp_path / "kerns" / "kernels.json").exists()

    labels = ["label"] + [
        line.split(",")[0] for line in (tmp_path / "train.csv").read_text().splitlines()[1:]
    ]
    (tmp_path / "labels.csv").write_text("\n".join(labels) + "\n")
    pre = {
        "kernel_mode": "precomputed",
        "labels": "labels.csv",
        "kernels": [
            {"name": n, "kernel": f"kerns/{f}"} for n, f in man["files"].items()
        ],
        "hyperparams": {"k": 2, "mu": 0.5, "lambda": 1.0, "outer_iters": 2},
        "split": {"train_fraction": 0.7, "repetitions": 2, "seed": 5},
    }
    (tmp_path / "pre.json").write_text(json.dumps(pre))
    rc = main(["evaluate", "--config", str(tmp_path / "pre.json")])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["report"]["summary"]["mean_accuracy"] >= 0.5


def test_sweep_with_csv(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    csv_path = tmp_path / "grid.csv"
    rc = main(
        [
            "sweep",
            "--config",
            str(cfg),
            "--parameter",
            "lambda",
            "--grid",
            "0,1,4",
            "--csv",
            str(csv_path),
        ]
    )
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert [p["value"] for p in doc["points"]] == [0.0, 1.0, 4.0]
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("value,mean_accuracy")
    assert len(lines) == 4


def test_tune_selects_from_grids(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    tune_cfg = json.loads(cfg.read_text())
    tune_cfg["tune"] = {"k_grid": [2], "mu_grid": [0.5], "lambda_grid": [0.0, 1.0]}
    cfg.write_text(json.dumps(tune_cfg))
    rc = main(["tune", "--config", str(cfg), "--folds", "2"])
    assert rc == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["selected"]["k"] == 2
    assert doc["selected"]["lambda"] in (0.0, 1.0)


def test_exit_code_2_on_config_problems(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    bad = tmp_path / "bad.json"
    bad.write_text('{"mystery": 1}')
    assert main(["evaluate", "--config", str(bad)]) == 2
    assert main(["evaluate", "--config", str(cfg), "--mu", "7"]) == 2
    assert main(["evaluate", "--config", str(cfg), "--kernel-mode", "nope"]) == 2
    assert main(["sweep", "--config", str(cfg)]) == 2
    assert main(["evaluate", "--config", str(tmp_path / "absent.json")]) == 2
    err = capsys.readouterr().err
    assert "config error" in err


def test_exit_code_3_on_data_problems(tmp_path, capsys):
    cfg = write_dataset(tmp_path)
    assert main(["evaluate", "--config", str(cfg), "--data", str(tmp_path / "no.csv")]) == 3
    (tmp_path / "mangled.csv").write_text("label,f0\nc0,oops\n")
    assert main(["evaluate", "--config", str(cfg), "--data", str(tmp_path / "mangled.csv")]) == 3
    assert "data error" in capsys.readouterr().err


def test_exit_code_4_on_solver_failure(tmp_path, monkeypatch, capsys):
    cfg = write_dataset(tmp_path)

    def boom(*a, **k):
        raise SolverError("no certified optimum")

    monkeypatch.setattr("lmmk.cli.run_train", boom)
    assert main(["evaluate", "--config", str(cfg)]) == 4
    assert "solver error" in capsys.readouterr().err
