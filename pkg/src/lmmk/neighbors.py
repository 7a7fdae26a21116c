"""Target and impostor selection and the margin-constraint triple set.

For each anchor i the k nearest same-label points are its targets and the k
nearest differently-labeled points are its impostors, both measured under the
current combined-space distance.  Ties in distance break toward the smaller
sample index, which keeps selection deterministic.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import (
    ShapeMismatch,
    SingleClassDataset,
    SingletonClass,
    UndersizedClassWarning,
)

__all__ = [
    "NeighborhoodSpec",
    "TripleSet",
    "select_targets",
    "select_impostors",
    "build_triples",
]


@dataclass(frozen=True)
class NeighborhoodSpec:
    """Neighborhood size used for both targets and impostors."""

    k: int

    def __post_init__(self):
        if int(self.k) < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")
        object.__setattr__(self, "k", int(self.k))


def _check_inputs(distances: np.ndarray, labels: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    dist = np.asarray(distances, dtype=np.float64)
    lab = np.asarray(labels)
    if dist.ndim != 2 or dist.shape[0] != dist.shape[1]:
        raise ShapeMismatch(f"distance matrix must be square, got {dist.shape}")
    if lab.ndim != 1 or lab.shape[0] != dist.shape[0]:
        raise ShapeMismatch(
            f"labels ({lab.shape}) must align with the distance matrix ({dist.shape})"
        )
    return dist, lab


def _k_nearest(dist_row: np.ndarray, candidates: np.ndarray, k: int) -> np.ndarray:
    # candidates arrive in ascending index order; a stable sort on distance
    # therefore breaks ties toward the smaller index.
    order = np.argsort(dist_row[candidates], kind="stable")
    return candidates[order[:k]]

def select_targets(
    distances: np.ndarray, labels: np.ndarray, spec: NeighborhoodSpec
) -> list[np.ndarray]:
    """Per-anchor arrays of the k nearest same-label indices (anchor excluded).

    Classes with between 2 and k members yield fewer than k targets and emit a
    warning; a class with exactly one member has no possible target and is an
    error.
    """
    dist, lab = _check_inputs(distances, labels)
    classes, counts = np.unique(lab, return_counts=True)
    singletons = classes[counts == 1]
    if singletons.size:
        raise SingletonClass(
            f"class {singletons[0]!r} has exactly one member; it cannot have targets"
        )
    undersized = classes[counts <= spec.k]
    if undersized.size:
        warnings.warn(
            f"classes {undersized.tolist()} have fewer than k+1={spec.k + 1} members; "
            "selecting all available targets",
            UndersizedClassWarning,
            stacklevel=2,
        )
    out = []
    for i in range(lab.shape[0]):
        cand = np.nonzero(lab == lab[i])[0]
        cand = cand[cand != i]
        out.append(_k_nearest(dist[i], cand, spec.k))
    return out


def select_impostors(
    distances: np.ndarray, labels: np.ndarray, spec: NeighborhoodSpec
) -> list[np.ndarray]:
    """Per-anchor arrays of the k nearest differently-labeled indices."""
    dist, lab = _check_inputs(distances, labels)
    if np.unique(lab).size < 2:
        raise SingleClassDataset("impostors need at least two classes")
    out = []
    for i in range(lab.shape[0]):
        cand = np.nonzero(lab != lab[i])[0]
        out.append(_k_nearest(dist[i], cand, spec.k))
    return out


@dataclass(frozen=True)
class TripleSet:
    """All (anchor, target, impostor) margin triples, in stable order.

    Triples are anchor-major, then target, then impostor, mirroring the
    per-anchor cross product of targets and impostors.
    """

    targets: tuple
    impostors: tuple
    triples: np.ndarray

    def __post_init__(self):
        targets = tuple(np.asarray(t, dtype=np.int64) for t in self.targets)
        impostors = tuple(np.asarray(s, dtype=np.int64) for s in self.impostors)
        triples = np.ascontiguousarray(np.asarray(self.triples, dtype=np.int64))
        if triples.ndim != 2 or (triples.size and triples.shape[1] != 3):
            raise ShapeMismatch("triples must have shape (T, 3)")
        triples.setflags(write=False)
        object.__setattr__(self, "targets", targets)
        object.__setattr__(self, "impostors", impostors)
        object.__setattr__(self, "triples", triples)

    @property
    def n_anchors(self) -> int:
        return len(self.targets)

    @property
    def n_triples(self) -> int:
        return self.triples.shape[0]

    def target_pairs(self) -> np.ndarray:
        """(P, 2) array of (anchor, target) pairs, each pair exactly once."""
        pairs = [
            np.column_stack([np.full(t.shape[0], i, dtype=np.int64), t])
            for i, t in enumerate(self.targets)
            if t.shape[0]
        ]
        if not pairs:
            return np.empty((0, 2), dtype=np.int64)
        return np.concatenate(pairs, axis=0)


def build_triples(targets: list[np.ndarray], impostors: list[np.ndarray]) -> TripleSet:
    """Cross product of targets and impostors per anchor."""
    if len(targets) != len(impostors):
        raise ShapeMismatch("targets and impostors must cover the same anchors")
    blocks = []
    for i, (tg, im) in enumerate(zip(targets, impostors)):
        tg = np.asarray(tg, dtype=np.int64)
        im = np.asarray(im, dtype=np.int64)
        if tg.size == 0 or im.size == 0:
            continue
        a = np.full(tg.size * im.size, i, dtype=np.int64)
        j = np.repeat(tg, im.size)
        l = np.tile(im, tg.size)
        blocks.append(np.column_stack([a, j, l]))
    if blocks:
        triples = np.concatenate(blocks, axis=0)
    else:
        triples = np.empty((0, 3), dtype=np.int64)
    return TripleSet(targets=tuple(targets), impostors=tuple(impostors), triples=triples)
