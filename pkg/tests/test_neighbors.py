"""Target/impostor selection and triple assembly."""

import warnings

import numpy as np
import pytest

from lmmk import (
    NeighborhoodSpec,
    SingleClassDataset,
    SingletonClass,
    UndersizedClassWarning,
    build_triples,
    select_impostors,
    select_targets,
)


def random_instance(rng, n, n_classes):
    X = rng.normal(size=(n, 3))
    sq = np.sum(X * X, 1)[:, None] + np.sum(X * X, 1)[None, :] - 2 * X @ X.T
    D = np.sqrt(np.maximum(sq, 0.0))
    np.fill_diagonal(D, 0.0)
    D = 0.5 * (D + D.T)
    labels = rng.integers(0, n_classes, size=n)
    # guarantee every class has at least 2 members
    for c in range(n_classes):
        idx = np.nonzero(labels == c)[0]
        if idx.size < 2:
            free = rng.permutation(n)[: 2 - idx.size]
            labels[free] = c
    return D, labels


def brute_targets(D, labels, k):
    out = []
    for i in range(len(labels)):
        cand = [j for j in range(len(labels)) if j != i and labels[j] == labels[i]]
        cand.sort(key=lambda j: (D[i, j], j))
        out.append(cand[:k])
    return out


def brute_impostors(D, labels, k):
    out = []
    for i in range(len(labels)):
        cand = [j for j in range(len(labels)) if labels[j] != labels[i]]
        cand.sort(key=lambda j: (D[i, j], j))
        out.append(cand[:k])
    return out


def test_selection_matches_brute_force():
    rng = np.random.default_rng(10)
    for _ in range(30):
        n = int(rng.integers(6, 30))
        D, labels = random_instance(rng, n, int(rng.integers(2, 4)))
        k = int(rng.integers(1, 4))
        spec = NeighborhoodSpec(k)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UndersizedClassWarning)
            targets = select_targets(D, labels, spec)
            impostors = select_impostors(D, labels, spec)
        assert [t.tolist() for t in targets] == brute_targets(D, labels, k)
        assert [s.tolist() for s in impostors] == brute_impostors(D, labels, k)


def test_distance_ties_break_toward_lower_index():
    D = np.zeros((5, 5))  # all points coincide
    labels = np.array([0, 0, 0, 1, 1])
    spec = NeighborhoodSpec(1)
    targets = select_targets(D, labels, spec)
    assert targets[0].tolist() == [1]
    assert targets[1].tolist() == [0]
    assert targets[2].tolist() == [0]
    assert targets[3].tolist() == [4]
    impostors = select_impostors(D, labels, spec)
    assert impostors[3].tolist() == [0]
    assert impostors[0].tolist() == [3]


def test_singleton_class_is_an_error():
    D = np.zeros((3, 3))
    with pytest.raises(SingletonClass):
        select_targets(D, np.array([0, 0, 1]), NeighborhoodSpec(1))


def test_single_class_has_no_impostors():
    D = np.zeros((3, 3))
    with pytest.raises(SingleClassDataset):
        select_impostors(D, np.array([0, 0, 0]), NeighborhoodSpec(1))


def test_undersized_class_warns_and_truncates():
    D = np.arange(16, dtype=float).reshape(4, 4)
    D = 0.5 * (D + D.T)
    np.fill_diagonal(D, 0.0)
    labels = np.array([0, 0, 1, 1])
    with pytest.warns(UndersizedClassWarning):
        targets = select_targets(D, labels, NeighborhoodSpec(3))
    assert all(len(t) == 1 for t in targets)


def test_triples_are_anchor_major_cross_products():
    targets = [np.array([1, 2]), np.array([0]), np.array([0, 1])]
    impostors = [np.array([3]), np.array([3, 4]), np.array([4])]
    ts = build_triples(targets, impostors)
    expected = [
        (0, 1, 3),
        (0, 2, 3),
        (1, 0, 3),
        (1, 0, 4),
        (2, 0, 4),
        (2, 1, 4),
    ]
    assert ts.triples.tolist() == [list(t) for t in expected]
    assert ts.n_triples == 6
    assert ts.n_anchors == 3


def test_target_pairs_lists_each_anchor_target_pair_once():
    targets = [np.array([1, 2]), np.array([0]), np.array([], dtype=np.int64)]
    impostors = [np.array([3]), np.array([3]), np.array([3])]
    ts = build_triples(targets, impostors)
    assert ts.target_pairs().tolist() == [[0, 1], [0, 2], [1, 0]]


def test_empty_neighborhoods_give_empty_triples():
    ts = build_triples([np.array([], dtype=np.int64)], [np.array([], dtype=np.int64)])
    assert ts.n_triples == 0
