"""kNN voting against an exhaustive reference, scoring, reports."""

import numpy as np
import pytest

from lmmk import (
    AllZeroWeightsWarning,
    Hyperparams,
    LengthMismatch,
    TrainedModel,
    UnknownLabel,
    accuracy,
    confusion_matrix,
    knn_predict,
    knn_vote,
    uniform_weights,
)
from lmmk.data import PerFeatureBuilder
from lmmk.synthetic import gaussian_classes
from oracles import knn_oracle


def test_uniform_weights_are_all_ones():
    w = uniform_weights(4)
    assert np.array_equal(w.beta, np.ones(4))


def test_vote_matches_oracle_on_random_instances():
    rng = np.random.default_rng(40)
    for _ in range(50):
        n_train = int(rng.integers(2, 60))
        n_test = int(rng.integers(1, 20))
        c = int(rng.integers(2, 6))
        k = int(rng.integers(1, 8))
        labels = [int(v) for v in rng.integers(0, c, size=n_train)]
        dist = rng.uniform(0.0, 3.0, size=(n_test, n_train))
        # quantized distances force plenty of exact ties
        dist = np.round(dist * 4) / 4.0
        got = knn_vote(dist, labels, k)
        assert got == knn_oracle(dist, labels, k)


def test_vote_tie_breaks_on_summed_distance_then_class():
    labels = [0, 1]
    dist = np.array([[2.0, 1.0]])
    assert knn_vote(dist, labels, 2) == [1]  # tie 1-1, class 1 is closer
    dist = np.array([[1.0, 1.0]])
    assert knn_vote(dist, labels, 2) == [0]  # full tie, smaller class wins


def test_vote_k_larger_than_train_uses_all():
    labels = [0, 0, 1]
    dist = np.array([[1.0, 2.0, 0.5]])
    assert knn_vote(dist, labels, 10) == [0]


def test_accuracy_and_confusion():
    assert accuracy(["a", "b", "b"], ["a", "b", "a"]) == pytest.approx(2 / 3)
    with pytest.raises(LengthMismatch):
        accuracy(["a"], ["a", "b"])
    with pytest.raises(LengthMismatch):
        accuracy([], [])
    cm = confusion_matrix(["a", "b", "b"], ["a", "b", "a"], classes=("a", "b"))
    assert cm.tolist() == [[1, 0], [1, 1]]
    with pytest.raises(UnknownLabel):
        confusion_matrix(["a", "z"], ["a", "a"], classes=("a", "b"))


def fitted_model(seed=50):
    X, y = gaussian_classes(2, 8, 2, 2, separation=2.5, seed=seed)
    names = [f"f{i}" for i in range(X.shape[1])]
    builder = PerFeatureBuilder(X, names)
    train_idx = np.arange(12)
    test_idx = np.arange(12, 16)
    ks = builder.fit(train_idx)
    from lmmk import train as train_model

    model = train_model(ks, y[train_idx], Hyperparams(k=2, mu=0.5, lam=1.0, outer_iters=2))
    cross = builder.cross(test_idx)
    return model, cross, ks, y[test_idx]


def test_knn_predict_scores_against_truth():
    model, cross, ks, truth = fitted_model()
    report = knn_predict(model, cross, ks, truth=truth)
    assert len(report.predicted) == len(truth)
    assert report.accuracy == pytest.approx(
        np.mean([p == t for p, t in zip(report.predicted, truth)])
    )
    assert report.confusion is not None
    assert not report.fallback_uniform
    doc = report.to_dict()
    assert set(doc) >= {"predicted", "fallback_uniform", "accuracy"}


def test_knn_predict_without_truth_gives_no_scores():
    model, cross, ks, _ = fitted_model(seed=51)
    report = knn_predict(model, cross, ks)
    assert report.accuracy is None and report.confusion is None


def test_knn_predict_falls_back_on_zero_weights():
    model, cross, ks, truth = fitted_model(seed=52)
    zeroed = TrainedModel(
        weights=type(model.weights)(np.zeros(model.weights.d)),
        kernel_names=model.kernel_names,
        hyperparams=model.hyperparams,
        labels=model.labels,
        objective_trace=model.objective_trace,
        best_round=model.best_round,
    )
    with pytest.warns(AllZeroWeightsWarning):
        report = knn_predict(zeroed, cross, ks, truth=truth)
    assert report.fallback_uniform


def test_knn_predict_with_distances_summary():
    model, cross, ks, _ = fitted_model(seed=53)
    report = knn_predict(model, cross, ks, with_distances=True)
    assert report.distances_summary is not None
    doc = report.to_dict()
    assert "nearest" in doc
    assert len(doc["nearest"]) == len(report.predicted)
