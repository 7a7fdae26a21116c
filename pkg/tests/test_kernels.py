"""Kernel construction, normalization, and kernel-space distances."""

import numpy as np
import pytest

from lmmk import (
    AllZeroDistances,
    CrossKernelSet,
    DistanceMatrix,
    KernelMatrix,
    KernelPSDWarning,
    KernelSet,
    KernelWeights,
    NonPositiveBandwidth,
    NonPositiveDiagonal,
    check_psd,
    compute_bandwidth,
    gaussian_cross_kernel,
    gaussian_kernel,
    normalize_cross_kernel,
    normalize_kernel,
    rkhs_cross_distance_matrix,
    rkhs_distance,
    rkhs_distance_matrix,
)
from oracles import concat_feature_distance


def pairwise(X):
    sq = np.sum(X * X, axis=1)[:, None] + np.sum(X * X, axis=1)[None, :] - 2.0 * (X @ X.T)
    d = np.sqrt(np.maximum(sq, 0.0))
    np.fill_diagonal(d, 0.0)
    return DistanceMatrix(0.5 * (d + d.T))


def normalized_linear_kernel(X):
    norms = np.linalg.norm(X, axis=1)
    assert norms.min() > 0
    return KernelMatrix((X / norms[:, None]) @ (X / norms[:, None]).T), X / norms[:, None]


def test_distance_matrix_rejects_asymmetry_and_bad_diagonal():
    with pytest.raises(Exception):
        DistanceMatrix(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(Exception):
        DistanceMatrix(np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(Exception):
        DistanceMatrix(np.array([[0.0, -1.0], [-1.0, 0.0]]))


def test_bandwidth_is_mean_offdiagonal_distance():
    rng = np.random.default_rng(1)
    X = rng.normal(size=(7, 3))
    dist = pairwise(X)
    n = 7
    manual = sum(
        float(dist.values[i, j]) for i in range(n) for j in range(n) if i != j
    ) / (n * (n - 1))
    assert compute_bandwidth(dist) == pytest.approx(manual, rel=1e-12)


def test_bandwidth_rejects_all_zero():
    with pytest.raises(AllZeroDistances):
        compute_bandwidth(DistanceMatrix(np.zeros((3, 3))))


def test_gaussian_kernel_values_and_diagonal():
    dist = DistanceMatrix(np.array([[0.0, 2.0], [2.0, 0.0]]))
    k = gaussian_kernel(dist, delta=4.0)
    assert k.values[0, 0] == 1.0 and k.values[1, 1] == 1.0
    assert k.values[0, 1] == pytest.approx(np.exp(-1.0), rel=1e-15)
    with pytest.raises(NonPositiveBandwidth):
        gaussian_kernel(dist, delta=0.0)


def test_normalize_kernel_unit_diagonal_and_ratio():
    rng = np.random.default_rng(2)
    X = rng.normal(size=(6, 4))
    raw = KernelMatrix(X @ X.T + 6 * np.eye(6))
    k = normalize_kernel(raw)
    assert np.all(np.diag(k.values) == 1.0)
    i, j = 1, 4
    expected = raw.values[i, j] / np.sqrt(raw.values[i, i] * raw.values[j, j])
    assert k.values[i, j] == pytest.approx(expected, rel=1e-14)


def test_normalize_kernel_needs_positive_diagonal():
    bad = KernelMatrix(np.array([[0.0, 0.0], [0.0, 1.0]]))
    with pytest.raises(NonPositiveDiagonal):
        normalize_kernel(bad)


def test_distance_identity_against_explicit_concatenation():
    # kernel-space distances equal squared distances between explicitly
    # concatenated sqrt(beta)-scaled unit feature vectors
    rng = np.random.default_rng(3)
    for _ in range(25):
        n = int(rng.integers(2, 11))
        d = int(rng.integers(1, 5))
        kernels, feats = [], []
        for _m in range(d):
            p = int(rng.integers(1, 6))
            X = rng.normal(size=(n, p))
            while np.linalg.norm(X, axis=1).min() < 1e-3:
                X = rng.normal(size=(n, p))
            k, unit = normalized_linear_kernel(X)
            kernels.append(k)
            feats.append(unit)
        ks = KernelSet(kernels=tuple(kernels), names=tuple(f"k{m}" for m in range(d)))
        beta = rng.uniform(0.0, 2.0, size=d)
        got = rkhs_distance_matrix(ks, KernelWeights(beta))
        want = concat_feature_distance(feats, beta)
        assert np.max(np.abs(got - want)) < 1e-10


def test_scalar_distance_matches_matrix_entry():
    rng = np.random.default_rng(4)
    X = rng.normal(size=(8, 3))
    dist = pairwise(X)
    ks = KernelSet(
        kernels=(gaussian_kernel(dist, 1.5), gaussian_kernel(dist, 3.0)),
        names=("a", "b"),
    )
    w = KernelWeights(np.array([0.7, 1.3]))
    D = rkhs_distance_matrix(ks, w)
    assert rkhs_distance(ks, w, 2, 5) == pytest.approx(D[2, 5], rel=1e-14)
    assert np.all(np.diag(D) == 0.0)
    assert np.allclose(D, D.T)


def test_cross_distances_match_joint_matrix():
    # building kernels jointly and slicing the test-vs-train block must agree
    # with the fit + cross route, bandwidth frozen on the training part
    rng = np.random.default_rng(5)
    X = rng.normal(size=(12, 3))
    train, test = np.arange(8), np.arange(8, 12)
    d_train = pairwise(X[train])
    delta = compute_bandwidth(d_train)
    k_train = gaussian_kernel(d_train, delta)

    d_joint = pairwise(X)
    k_joint = gaussian_kernel(d_joint, delta).values

    cross_vals, self_vals = gaussian_cross_kernel(
        np.asarray(d_joint.values[np.ix_(test, train)]), delta
    )
    ks = KernelSet(kernels=(k_train,), names=("g",))
    cross = CrossKernelSet(kernels=(cross_vals,), self_values=(self_vals,))
    w = KernelWeights(np.array([1.0]))
    got = rkhs_cross_distance_matrix(cross, ks, w)
    D_joint = rkhs_distance_matrix(
        KernelSet(kernels=(KernelMatrix(k_joint),), names=("g",)), w
    )
    assert np.max(np.abs(got - D_joint[np.ix_(test, train)])) < 1e-12


def test_normalize_cross_kernel_matches_joint_normalization():
    rng = np.random.default_rng(6)
    X = rng.normal(size=(10, 4))
    raw = X @ X.T + 10 * np.eye(10)
    train, test = np.arange(7), np.arange(7, 10)
    k_norm_joint = normalize_kernel(KernelMatrix(raw)).values
    got, selfs = normalize_cross_kernel(
        raw[np.ix_(test, train)],
        np.diag(raw)[train],
        np.diag(raw)[test],
    )
    assert np.max(np.abs(got - k_norm_joint[np.ix_(test, train)])) < 1e-12
    assert np.all(selfs == 1.0)


def test_weights_validation_and_l0():
    with pytest.raises(ValueError):
        KernelWeights(np.array([-0.1, 1.0]))
    with pytest.raises(ValueError):
        KernelWeights(np.array([np.nan]))
    w = KernelWeights(np.array([0.0, 1e-9, 0.5, 2.0]))
    assert w.l0() == 2
    assert KernelWeights(np.zeros(3)).l0() == 0


def test_check_psd_warns_on_indefinite():
    m = np.array([[1.0, 0.99, 0.0], [0.99, 1.0, 0.99], [0.0, 0.99, 1.0]])
    # eigenvalue 1 - 0.99*sqrt(2) < 0
    with pytest.warns(KernelPSDWarning):
        check_psd(KernelMatrix(m))
