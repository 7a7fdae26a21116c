"""Seed expansion and stratified train/test splitting.

One master seed expands into per-repetition seeds through splitmix64, a
fixed integer recurrence, so runs reproduce across platforms and across any
parallel execution order.
"""

from __future__ import annotations

import numpy as np

from .errors import ConfigError, DataError

__all__ = ["splitmix64", "expand_seeds", "stratified_split", "stratified_folds"]

_MASK = (1 << 64) - 1


def splitmix64(state: int) -> tuple[int, int]:
    """One splitmix64 step: returns (next_state, output)."""
    state = (state + 0x9E3779B97F4A7C15) & _MASK
    z = state
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    z = z ^ (z >> 31)
    return state, z


def expand_seeds(master_seed: int, n: int) -> list[int]:
    """Derive n independent 64-bit seeds from one master seed."""
    if n < 0:
        raise ConfigError(f"cannot expand {n} seeds")
    state = int(master_seed) & _MASK
    out = []
    for _ in range(n):
        state, z = splitmix64(state)
        out.append(z)
    return out


def stratified_split(
    labels, train_fraction: float, seed: int
) -> tuple[np.ndarray, np.ndarray]:
    """Per-class random split; both sides keep at least one member per class.

    The per-class training count is round(fraction * class size), clamped to
    [1, size - 1].  Returned index arrays are sorted ascending.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ConfigError(f"train fraction must lie in (0, 1), got {train_fraction}")
    lab = np.asarray(labels)
    if lab.shape[0] < 2:
        raise DataError("need at least two samples to split")
    rng = np.random.Generator(np.random.PCG64(int(seed) & _MASK))
    train_parts = []
    test_parts = []
    for cls in np.unique(lab):
        idx = np.nonzero(lab == cls)[0]
        if idx.shape[0] < 2:
            raise DataError(
                f"class {cls!r} has {idx.shape[0]} member(s); "
                "a stratified split needs at least 2 per class"
            )
        n_train = int(np.clip(round(train_fraction * idx.shape[0]), 1, idx.shape[0] - 1))
        perm = rng.permutation(idx.shape[0])
        train_parts.append(idx[perm[:n_train]])
        test_parts.append(idx[perm[n_train:]])
    train = np.sort(np.concatenate(train_parts))
    test = np.sort(np.concatenate(test_parts))
    return train, test


def stratified_folds(labels, n_folds: int, seed: int) -> list[tuple[np.ndarray, np.ndarray]]:
    """Cross-validation folds with per-class round-robin assignment.

    Every sample lands in exactly one validation fold.  Classes smaller than
    n_folds simply skip the folds they cannot reach.
    """
    if n_folds < 2:
        raise ConfigError(f"need at least 2 folds, got {n_folds}")
    lab = np.asarray(labels)
    if lab.shape[0] < n_folds:
        raise DataError(f"{lab.shape[0]} samples cannot fill {n_folds} folds")
    rng = np.random.Generator(np.random.PCG64(int(seed) & _MASK))
    assignment = np.empty(lab.shape[0], dtype=np.int64)
    for cls in np.unique(lab):
        idx = np.nonzero(lab == cls)[0]
        perm = rng.permutation(idx.shape[0])
        assignment[idx[perm]] = np.arange(idx.shape[0]) % n_folds
    folds = []
    for f in range(n_folds):
        val = np.nonzero(assignment == f)[0]
        train = np.nonzero(assignment != f)[0]
        folds.append((train, val))
    return folds
