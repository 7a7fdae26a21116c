"""Seed expansion and stratified splitting."""

import numpy as np
import pytest

from lmmk import DataError, expand_seeds, splitmix64, stratified_folds, stratified_split


def test_splitmix64_is_deterministic_and_64bit():
    s1, v1 = splitmix64(0)
    s2, v2 = splitmix64(0)
    assert (s1, v1) == (s2, v2)
    assert 0 <= v1 < 2**64
    assert s1 != 0  # state advanced


def test_expand_seeds_distinct_and_reproducible():
    a = expand_seeds(42, 16)
    b = expand_seeds(42, 16)
    assert a == b
    assert len(set(a)) == 16
    assert expand_seeds(43, 16) != a


def test_expand_seeds_prefix_stability():
    # the first seeds do not depend on how many are requested
    assert expand_seeds(7, 3) == expand_seeds(7, 10)[:3]


def test_stratified_split_counts_and_order():
    labels = np.array(["a"] * 10 + ["b"] * 4 + ["c"] * 2)
    train, test = stratified_split(labels, 0.7, seed=123)
    assert np.array_equal(np.sort(np.concatenate([train, test])), np.arange(16))
    assert np.array_equal(train, np.sort(train))
    assert np.array_equal(test, np.sort(test))
    # per class: clip(round(frac*n), 1, n-1)
    tl = labels[train].tolist()
    assert tl.count("a") == 7
    assert tl.count("b") == 3
    assert tl.count("c") == 1
    # every class appears on both sides
    assert set(labels[test]) == {"a", "b", "c"}


def test_stratified_split_deterministic_per_seed():
    labels = np.array([0, 0, 0, 1, 1, 1, 1, 2, 2])
    t1, e1 = stratified_split(labels, 0.5, seed=9)
    t2, e2 = stratified_split(labels, 0.5, seed=9)
    assert np.array_equal(t1, t2) and np.array_equal(e1, e2)
    t3, _ = stratified_split(labels, 0.5, seed=10)
    assert not np.array_equal(t1, t3)


def test_stratified_split_rejects_tiny_classes():
    with pytest.raises(DataError):
        stratified_split(np.array([0, 0, 1]), 0.5, seed=0)


def test_folds_partition_each_class_evenly():
    labels = np.array([0] * 9 + [1] * 6)
    folds = stratified_folds(labels, 3, seed=4)
    assert len(folds) == 3
    all_test = np.sort(np.concatenate([te for _, te in folds]))
    assert np.array_equal(all_test, np.arange(15))
    for tr, te in folds:
        assert np.array_equal(np.sort(np.concatenate([tr, te])), np.arange(15))
        assert set(labels[te]) == {0, 1}
        assert labels[te].tolist().count(0) == 3
        assert labels[te].tolist().count(1) == 2
