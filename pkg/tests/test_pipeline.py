"""Repetition harness, reports, sweeps, and tuning."""

import numpy as np
import pytest

from lmmk import (
    ConfigError,
    Hyperparams,
    PerFeatureBuilder,
    RunConfig,
    canonical_bytes,
    canonical_json,
    run_sweep,
    run_train,
    tune,
    worker_count,
)
from lmmk.pipeline import run_single_repetition
from lmmk.synthetic import gaussian_classes


@pytest.fixture()
def small_problem():
    X, y = gaussian_classes(3, 12, 2, 3, separation=2.2, seed=14)
    names = [f"f{i}" for i in range(X.shape[1])]
    return PerFeatureBuilder(X, names), y


def cfg(**kw):
    hp = Hyperparams(
        k=kw.pop("k", 2),
        mu=kw.pop("mu", 0.5),
        lam=kw.pop("lam", 1.0),
        outer_iters=kw.pop("outer_iters", 2),
    )
    return RunConfig(
        hyperparams=hp,
        train_fraction=kw.pop("train_fraction", 0.7),
        repetitions=kw.pop("repetitions", 3),
        seed=kw.pop("seed", 9),
        **kw,
    )


def test_run_config_validation():
    with pytest.raises(ConfigError):
        cfg(train_fraction=0.0)
    with pytest.raises(ConfigError):
        cfg(train_fraction=1.0)
    with pytest.raises(ConfigError):
        cfg(repetitions=0)
    with pytest.raises(ConfigError):
        cfg(k_classify=0)


def test_single_repetition_record_fields(small_problem):
    builder, y = small_problem
    out = run_single_repetition(builder.clone(), y, cfg(), rep=0, seed=1234)
    rec = out["record"]
    assert rec["rep"] == 0 and rec["seed"] == 1234
    assert rec["n_train"] + rec["n_test"] == len(y)
    assert 0.0 <= rec["accuracy"] <= 1.0
    assert 0.0 <= rec["baseline_accuracy"] <= 1.0
    assert rec["beta_l0"] <= len(rec["beta"])
    assert rec["sum_beta"] == pytest.approx(sum(rec["beta"].values()))
    assert set(out["timings"]) == {"kernels_s", "train_s", "predict_s"}


def test_run_train_report_and_determinism(small_problem, monkeypatch):
    builder, y = small_problem
    monkeypatch.setenv("LMMK_THREADS", "1")
    doc1 = run_train(builder.clone(), y, cfg())
    doc2 = run_train(builder.clone(), y, cfg())
    assert canonical_bytes(doc1) == canonical_bytes(doc2)
    monkeypatch.setenv("LMMK_THREADS", "3")
    doc3 = run_train(builder.clone(), y, cfg())
    assert canonical_bytes(doc1) == canonical_bytes(doc3)

    report = doc1["report"]
    assert report["schema"] == "lmmk-eval"
    assert len(report["repetitions"]) == 3
    s = report["summary"]
    assert set(s) >= {
        "mean_accuracy",
        "std_accuracy",
        "min_accuracy",
        "max_accuracy",
        "mean_baseline_accuracy",
        "mean_beta_l0",
        "mean_sum_beta",
        "mean_beta",
        "kernel_names",
    }
    assert doc1["model"]["format"] == "lmmk-model-bundle"


def test_canonical_bytes_ignores_timings(small_problem):
    builder, y = small_problem
    doc = run_train(builder.clone(), y, cfg(repetitions=2))
    import copy

    other = copy.deepcopy(doc)
    other["timings"] = {"total_s": 123.0}
    other["report"]["timings"] = [{"kernels_s": 9.9}]
    assert canonical_bytes(doc) == canonical_bytes(other)
    assert canonical_json(doc) != canonical_json(other)


@pytest.mark.filterwarnings("ignore::lmmk.AllZeroWeightsWarning")
def test_sweep_collects_points_and_errors(small_problem):
    builder, y = small_problem
    doc = run_sweep(builder.clone(), y, cfg(repetitions=2), "lambda", [0.0, 1.0, 1e6])
    values = [p["value"] for p in doc["points"]]
    assert values == [0.0, 1.0, 1e6]
    assert all("mean_accuracy" in p for p in doc["points"])
    # an out-of-range value is recorded as an error point, not raised
    doc = run_sweep(builder.clone(), y, cfg(repetitions=2), "mu", [0.5, 2.0])
    assert "mean_accuracy" in doc["points"][0]
    assert "error" in doc["points"][1]
    assert "ConfigError" in doc["points"][1]["error"]


def test_sweep_rejects_unknown_parameter(small_problem):
    builder, y = small_problem
    with pytest.raises(ConfigError):
        run_sweep(builder.clone(), y, cfg(), "bandwidth", [1.0])


def test_tune_prefers_separating_settings(small_problem):
    builder, y = small_problem
    base = Hyperparams(k=2, mu=0.5, lam=1.0, outer_iters=2)
    doc = tune(
        builder.clone(),
        y,
        base,
        seed=3,
        folds=3,
        k_grid=[1, 2],
        mu_grid=[0.5],
        lambda_grid=[0.0, 1.0],
    )
    sel = doc["selected"]
    assert sel["k"] in (1, 2)
    assert sel["mu"] == 0.5
    assert sel["lambda"] in (0.0, 1.0)
    assert len(doc["stage_a"]) == 2
    assert len(doc["stage_b"]) == 2
    for row in doc["stage_b"]:
        assert "cv_accuracy" in row and "lambda" in row


def test_worker_count_parsing(monkeypatch):
    monkeypatch.delenv("LMMK_THREADS", raising=False)
    assert worker_count() == 1
    monkeypatch.setenv("LMMK_THREADS", "4")
    assert worker_count() == 4
    monkeypatch.setenv("LMMK_THREADS", "0")
    assert worker_count() == 1
    monkeypatch.setenv("LMMK_THREADS", "zebra")
    with pytest.raises(ConfigError):
        worker_count()
