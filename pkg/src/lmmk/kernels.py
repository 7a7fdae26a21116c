"""Kernel construction, normalization, combination, and induced distances.

A model is a non-negative weighting of d base kernels.  The weighted
combination sum_m beta_m * K_m is itself a kernel, and the squared distance it
induces between samples i and j is

    sum_m beta_m * (K_m[i,i] + K_m[j,j] - 2*K_m[i,j])

which reduces to sum_m beta_m * (2 - 2*K_m[i,j]) once every kernel has a unit
diagonal.  All distance helpers below evaluate the general form using the
actual diagonals, so they stay correct for unnormalized input too.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    AllZeroDistances,
    DimensionMismatch,
    KernelPSDWarning,
    NonPositiveBandwidth,
    NonPositiveDiagonal,
)

__all__ = [
    "DistanceMatrix",
    "KernelMatrix",
    "KernelSet",
    "CrossKernelSet",
    "KernelWeights",
    "compute_bandwidth",
    "gaussian_kernel",
    "gaussian_cross_kernel",
    "normalize_kernel",
    "normalize_cross_kernel",
    "combine_kernels",
    "rkhs_distance",
    "rkhs_distance_matrix",
    "rkhs_distance_to_test",
    "rkhs_cross_distance_matrix",
    "check_psd",
]


def _as_square(values, name: str) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=np.float64))
    if arr.ndim != 2 or arr.shape[0] != arr.shape[1]:
        raise ValueError(f"{name} must be a square 2-D array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return arr


@dataclass(frozen=True)
class DistanceMatrix:
    """Symmetric pairwise distances with an exactly zero diagonal."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_square(self.values, "distance matrix")
        if not np.array_equal(arr, arr.T):
            raise ValueError("distance matrix must be symmetric")
        if np.any(np.diagonal(arr) != 0.0):
            raise ValueError("distance matrix diagonal must be zero")
        if arr.size and arr.min() < 0.0:
            raise ValueError("distances must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class KernelMatrix:
    """Symmetric similarity matrix over the training samples."""

    values: np.ndarray

    def __post_init__(self):
        arr = _as_square(self.values, "kernel matrix")
        if not np.array_equal(arr, arr.T):
            raise ValueError("kernel matrix must be symmetric")
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def is_normalized(self) -> bool:
        return bool(np.all(np.diagonal(self.values) == 1.0))


@dataclass(frozen=True)
class KernelSet:
    """Ordered collection of kernels over one shared sample set."""

    kernels: tuple
    names: tuple
    # (d, N, N) stack of the kernel values, kept for vectorized access.
    stacked: np.ndarray = field(repr=False, default=None)

    def __post_init__(self):
        kernels = tuple(self.kernels)
        if not kernels:
            raise ValueError("a kernel set needs at least one kernel")
        n = kernels[0].n_samples
        for k in kernels:
            if not isinstance(k, KernelMatrix):
                raise TypeError("kernel set entries must be KernelMatrix")
            if k.n_samples != n:
                raise ValueError("all kernels must share the sample count")
        names = tuple(str(s) for s in self.names)
        if len(names) != len(kernels):
            raise ValueError("one name per kernel is required")
        stacked = np.ascontiguousarray(np.stack([k.values for k in kernels]))
        stacked.setflags(write=False)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "stacked", stacked)

    @property
    def d(self) -> int:
        return len(self.kernels)

    @property
    def n_samples(self) -> int:
        return self.kernels[0].n_samples

    def diagonals(self) -> np.ndarray:
        """(d, N) array of kernel diagonals."""
        n = self.n_samples
        idx = np.arange(n)
        return self.stacked[:, idx, idx]


@dataclass(frozen=True)
class CrossKernelSet:
    """Kernel evaluations between test points (rows) and training points."""

    kernels: tuple          # d arrays of shape (n_test, n_train)
    self_values: tuple      # d arrays of shape (n_test,), K_m(z, z)

    def __post_init__(self):
        kernels = tuple(np.ascontiguousarray(np.asarray(k, dtype=np.float64)) for k in self.kernels)
        selfs = tuple(np.ascontiguousarray(np.asarray(s, dtype=np.float64)) for s in self.self_values)
        if not kernels:
            raise ValueError("a cross-kernel set needs at least one kernel")
        if len(kernels) != len(selfs):
            raise ValueError("one self-value vector per cross kernel is required")
        shape = kernels[0].shape
        for k, s in zip(kernels, selfs):
            if k.ndim != 2 or k.shape != shape:
                raise ValueError("all cross kernels must share one (n_test, n_train) shape")
            if s.shape != (shape[0],):
                raise ValueError("self values must have one entry per test point")
            if not (np.all(np.isfinite(k)) and np.all(np.isfinite(s))):
                raise ValueError("cross kernels must be finite")
            k.setflags(write=False)
            s.setflags(write=False)
        object.__setattr__(self, "kernels", kernels)
        object.__setattr__(self, "self_values", selfs)

    @property
    def d(self) -> int:
        return len(self.kernels)

    @property
    def n_test(self) -> int:
        return self.kernels[0].shape[0]

    @property
    def n_train(self) -> int:
        return self.kernels[0].shape[1]


@dataclass(frozen=True)
class KernelWeights:
    """Non-negative per-kernel weights beta.

    ``zero_tolerance`` is relative: a weight counts as zero when it does not
    exceed zero_tolerance * max(beta.max(), 1).
    """

    beta: np.ndarray
    zero_tolerance: float = 1e-6

    def __post_init__(self):
        arr = np.ascontiguousarray(np.asarray(self.beta, dtype=np.float64)).reshape(-1)
        if arr.size == 0:
            raise ValueError("weights must be non-empty")
        if not np.all(np.isfinite(arr)):
            raise ValueError("weights must be finite")
        if arr.min() < 0.0:
            raise ValueError("weights must be non-negative")
        if not (float(self.zero_tolerance) >= 0.0):
            raise ValueError("zero_tolerance must be non-negative")
        arr.setflags(write=False)
        object.__setattr__(self, "beta", arr)
        object.__setattr__(self, "zero_tolerance", float(self.zero_tolerance))

    @property
    def d(self) -> int:
        return self.beta.shape[0]

    def zero_threshold(self) -> float:
        return self.zero_tolerance * max(float(self.beta.max()), 1.0)

    def l0(self) -> int:
        """Count of weights strictly above the zero threshold."""
        return int(np.count_nonzero(self.beta > self.zero_threshold()))


def compute_bandwidth(dist: DistanceMatrix) -> float:
    """Average pairwise distance over the off-diagonal entries."""
    n = dist.n_samples
    if n < 2:
        raise ValueError("bandwidth needs at least two samples")
    v = dist.values
    # Diagonal is exactly zero, so the full sum equals the off-diagonal sum.
    total = float(v.sum())
    if not np.any(v > 0.0):
        raise AllZeroDistances("all pairwise distances are zero")
    return total / float(n * n - n)


def gaussian_kernel(dist: DistanceMatrix, delta: float) -> KernelMatrix:
    """K[i,j] = exp(-D[i,j]^2 / delta); unit diagonal by construction."""
    if not (delta > 0.0):
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {delta}")
    v = dist.values
    k = np.exp(-(v * v) / delta)
    np.fill_diagonal(k, 1.0)
    return KernelMatrix(k)


def gaussian_cross_kernel(dist_cross: np.ndarray, delta: float) -> tuple[np.ndarray, np.ndarray]:
    """Cross-kernel block for test-vs-train distances under a frozen bandwidth.

    Returns (values, self_values); self-similarities are exactly one because
    exp(-0/delta) = 1.
    """
    if not (delta > 0.0):
        raise NonPositiveBandwidth(f"bandwidth must be positive, got {delta}")
    d = np.asarray(dist_cross, dtype=np.float64)
    if d.ndim != 2:
        raise ValueError("cross distances must be 2-D (n_test, n_train)")
    k = np.exp(-(d * d) / delta)
    return k, np.ones(d.shape[0])


def normalize_kernel(raw: KernelMatrix) -> KernelMatrix:
    """Scale to unit diagonal: K'[i,j] = K[i,j] / sqrt(K[i,i]*K[j,j])."""
    v = raw.values
    diag = np.diagonal(v).copy()
    if diag.size and diag.min() <= 0.0:
        raise NonPositiveDiagonal("kernel diagonal must be strictly positive to normalize")
    s = np.sqrt(diag)
    out = v / np.outer(s, s)
    # The diagonal is 1 up to rounding; pin it exactly.
    np.fill_diagonal(out, 1.0)
    return KernelMatrix(out)


def normalize_cross_kernel(
    raw_cross: np.ndarray,
    train_diag: np.ndarray,
    test_self: np.ndarray,
) -> tuple[np.ndarray, np.ndarray]:
    """Normalize a raw test-vs-train block with the stored raw diagonals.

    ``train_diag`` holds K_m(x_i, x_i) for the training points prior to
    normalization and ``test_self`` holds K_m(z, z) for the test points.
    Returns the normalized block together with the (now unit) self values.
    """
    k = np.asarray(raw_cross, dtype=np.float64)
    td = np.asarray(train_diag, dtype=np.float64).reshape(-1)
    ts = np.asarray(test_self, dtype=np.float64).reshape(-1)
    if k.ndim != 2 or k.shape != (ts.shape[0], td.shape[0]):
        raise ValueError("cross block shape must be (n_test, n_train)")
    if (td.size and td.min() <= 0.0) or (ts.size and ts.min() <= 0.0):
        raise NonPositiveDiagonal("diagonal values must be strictly positive to normalize")
    out = k / np.outer(np.sqrt(ts), np.sqrt(td))
    return out, np.ones(ts.shape[0])


def _check_weights(ks_d: int, weights: KernelWeights):
    if weights.d != ks_d:
        raise DimensionMismatch(f"{weights.d} weights for {ks_d} kernels")


def combine_kernels(ks: KernelSet, weights: KernelWeights) -> KernelMatrix:
    """Weighted sum of the base kernels."""
    _check_weights(ks.d, weights)
    return KernelMatrix(np.tensordot(weights.beta, ks.stacked, axes=1))


def rkhs_distance(ks: KernelSet, weights: KernelWeights, i: int, j: int) -> float:
    """Squared distance between training samples i and j in the combined space."""
    _check_weights(ks.d, weights)
    n = ks.n_samples
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError(f"sample index out of range for n={n}")
    kii = ks.stacked[:, i, i]
    kjj = ks.stacked[:, j, j]
    kij = ks.stacked[:, i, j]
    return float(np.dot(weights.beta, kii + kjj - 2.0 * kij))


def rkhs_distance_matrix(ks: KernelSet, weights: KernelWeights) -> np.ndarray:
    """(N, N) matrix of combined-space squared distances."""
    _check_weights(ks.d, weights)
    wdiag = weights.beta @ ks.diagonals()
    khat = np.tensordot(weights.beta, ks.stacked, axes=1)
    return wdiag[:, None] + wdiag[None, :] - 2.0 * khat


def rkhs_distance_to_test(
    cross: CrossKernelSet, ks: KernelSet, weights: KernelWeights, t: int, i: int
) -> float:
    """Squared distance between test point t and training sample i."""
    _check_weights(ks.d, weights)
    if cross.d != ks.d:
        raise DimensionMismatch(f"{cross.d} cross kernels for {ks.d} training kernels")
    if not (0 <= t < cross.n_test and 0 <= i < cross.n_train):
        raise IndexError("test or train index out of range")
    total = 0.0
    for m in range(ks.d):
        total += weights.beta[m] * (
            cross.self_values[m][t] + ks.stacked[m, i, i] - 2.0 * cross.kernels[m][t, i]
        )
    return float(total)


def rkhs_cross_distance_matrix(
    cross: CrossKernelSet, ks: KernelSet, weights: KernelWeights
) -> np.ndarray:
    """(n_test, n_train) matrix of combined-space squared distances."""
    _check_weights(ks.d, weights)
    if cross.d != ks.d:
        raise DimensionMismatch(f"{cross.d} cross kernels for {ks.d} training kernels")
    selfs = np.stack(cross.self_values)            # (d, n_test)
    ws = weights.beta @ selfs                      # (n_test,)
    wd = weights.beta @ ks.diagonals()             # (n_train,)
    kc = np.tensordot(weights.beta, np.stack(cross.kernels), axes=1)
    return ws[:, None] + wd[None, :] - 2.0 * kc


def check_psd(kernel: KernelMatrix, tol: float = 1e-8, max_n: int = 2000):
    """Advisory positive-semidefiniteness check.

    Returns the smallest eigenvalue, or None when the matrix is larger than
    ``max_n`` and the check is skipped.  Emits a warning instead of raising
    because slightly indefinite user kernels are still usable.
    """
    if kernel.n_samples > max_n:
        return None
    smallest = float(np.linalg.eigvalsh(kernel.values)[0])
    if smallest < -tol:
        warnings.warn(
            f"kernel is not positive semidefinite (min eigenvalue {smallest:.3e})",
            KernelPSDWarning,
            stacklevel=2,
        )
    return smallest
