"""kNN prediction in the learned combined feature space."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LengthMismatch, UnknownLabel
from .kernels import CrossKernelSet, KernelSet, KernelWeights, rkhs_cross_distance_matrix
from .model import TrainedModel

__all__ = [
    "PredictionReport",
    "knn_predict",
    "knn_vote",
    "uniform_weights",
    "accuracy",
    "confusion_matrix",
]


def uniform_weights(d: int) -> KernelWeights:
    """The kernel-average baseline: every weight 1.

    Distances scale uniformly under any positive constant, so rankings (and
    therefore predictions) are identical for 1 and 1/d.
    """
    if d < 1:
        raise ValueError(f"need at least one kernel, got d={d}")
    return KernelWeights(np.ones(d))


def accuracy(predicted, truth) -> float:
    """Fraction of correct predictions."""
    p = np.asarray(predicted)
    t = np.asarray(truth)
    if p.shape[0] != t.shape[0] or p.shape[0] == 0:
        raise LengthMismatch(
            f"predicted has {p.shape[0]} entries, truth has {t.shape[0]}; need equal and >= 1"
        )
    return float(np.mean(p == t))


def confusion_matrix(truth, predicted, classes) -> np.ndarray:
    """(c, c) count matrix, rows = true class, columns = predicted class."""
    classes = list(classes)
    index = {c: i for i, c in enumerate(classes)}
    out = np.zeros((len(classes), len(classes)), dtype=np.int64)
    for t, p in zip(np.asarray(truth), np.asarray(predicted)):
        ti = index.get(_plain(t))
        pi = index.get(_plain(p))
        if ti is None or pi is None:
            raise UnknownLabel(f"label {t!r} or {p!r} not in the class universe {classes}")
        out[ti, pi] += 1
    return out


def _plain(v):
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.str_):
        return str(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


def knn_vote(cross_dist: np.ndarray, train_labels, k: int, classes=None) -> list:
    """Majority vote over the k nearest training points, per test row.

    Neighbor ties on distance break toward the smaller training index.
    Vote ties break toward the class with the smaller summed distance among
    its voting neighbors, then toward the smaller class id.
    """
    labels = [_plain(v) for v in np.asarray(train_labels)]
    n_train = cross_dist.shape[1]
    if len(labels) != n_train:
        raise LengthMismatch(f"{len(labels)} training labels for {n_train} distance columns")
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    kk = min(k, n_train)
    out = []
    for row in cross_dist:
        order = np.argsort(row, kind="stable")[:kk]
        votes: dict = {}
        sums: dict = {}
        for idx in order:
            lab = labels[int(idx)]
            votes[lab] = votes.get(lab, 0) + 1
            sums[lab] = sums.get(lab, 0.0) + float(row[idx])
        best = max(votes.values())
        tied = [lab for lab, v in votes.items() if v == best]
        if len(tied) > 1:
            low = min(sums[lab] for lab in tied)
            tied = [lab for lab in tied if sums[lab] == low]
        out.append(min(tied) if len(tied) > 1 else tied[0])
    return out


@dataclass(frozen=True)
class PredictionReport:
    """Per-test predictions with optional scoring against ground truth."""

    predicted: tuple
    fallback_uniform: bool
    accuracy: float | None = None
    confusion: np.ndarray | None = None
    classes: tuple = ()
    distances_summary: tuple | None = None

    def to_dict(self) -> dict:
        doc: dict = {
            "predicted": list(self.predicted),
            "fallback_uniform": self.fallback_uniform,
        }
        if self.accuracy is not None:
            doc["accuracy"] = self.accuracy
            doc["confusion"] = [[int(v) for v in row] for row in self.confusion]
            doc["classes"] = list(self.classes)
        if self.distances_summary is not None:
            doc["nearest"] = [
                {"indices": list(map(int, idx)), "distances": [float(x) for x in dv]}
                for idx, dv in self.distances_summary
            ]
        return doc


def knn_predict(
    model: TrainedModel,
    cross: CrossKernelSet,
    ks: KernelSet,
    k_classify: int | None = None,
    truth=None,
    with_distances: bool = False,
) -> PredictionReport:
    """Label each test point by vote among its nearest training points.

    Distances are measured in the combined space under the model's weights
    (uniform fallback if they are all zero).  k_classify defaults to the
    training k.
    """
    weights, fallback = model.effective_weights()
    k = model.hyperparams.k if k_classify is None else int(k_classify)
    dist = rkhs_cross_distance_matrix(cross, ks, weights)
    predicted = knn_vote(dist, list(model.labels), k)
    acc = None
    conf = None
    if truth is not None:
        truth_plain = [_plain(v) for v in np.asarray(truth)]
        acc = accuracy(predicted, truth_plain)
        conf = confusion_matrix(truth_plain, predicted, model.classes)
    summary = None
    if with_distances:
        kk = min(k, dist.shape[1])
        summary = tuple(
            (
                np.argsort(row, kind="stable")[:kk],
                np.sort(row, kind="stable")[:kk],
            )
            for row in dist
        )
    return PredictionReport(
        predicted=tuple(predicted),
        fallback_uniform=fallback,
        accuracy=acc,
        confusion=conf,
        classes=model.classes,
        distances_summary=summary,
    )
