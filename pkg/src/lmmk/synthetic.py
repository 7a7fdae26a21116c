"""Synthetic multi-class generators used by the evaluation suite and docs."""

from __future__ import annotations

import numpy as np

from .errors import ConfigError

__all__ = ["gaussian_classes"]


def gaussian_classes(
    n_classes: int,
    n_per_class: int,
    n_informative: int,
    n_noise: int,
    separation: float,
    seed: int,
    noise_scale: float = 1.0,
) -> tuple[np.ndarray, np.ndarray]:
    """Gaussian blobs separated only along the informative dimensions.

    Class c's mean in each informative dimension is c * separation; all
    dimensions carry unit-variance noise, and the trailing n_noise
    dimensions are pure noise with scale noise_scale.  Returns (X, y) with
    integer labels 0..n_classes-1, samples grouped by class.
    """
    if n_classes < 1 or n_per_class < 1:
        raise ConfigError("need at least one class and one sample per class")
    if n_informative < 0 or n_noise < 0 or n_informative + n_noise < 1:
        raise ConfigError("need at least one dimension")
    rng = np.random.Generator(np.random.PCG64(int(seed)))
    n = n_classes * n_per_class
    dim = n_informative + n_noise
    X = np.empty((n, dim))
    y = np.repeat(np.arange(n_classes), n_per_class)
    X[:, :n_informative] = (
        y[:, None] * separation + rng.standard_normal((n, n_informative))
    )
    X[:, n_informative:] = noise_scale * rng.standard_normal((n, n_noise))
    return X, y
