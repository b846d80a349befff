"""Random-guess baselines the attacks are measured against."""

from __future__ import annotations

import numpy as np

from ..errors import InputError
from ..linalg import Rng


def baseline_uniform(d_target: int, rng: Rng) -> np.ndarray:
    """I.i.d. draws from U(0, 1)."""
    if d_target < 1:
        raise InputError("d_target must be >= 1")
    return rng.uniform(size=d_target)


def baseline_gaussian(d_target: int, rng: Rng) -> np.ndarray:
    """I.i.d. draws from N(0.5, 0.25^2), clamped into [0, 1]."""
    if d_target < 1:
        raise InputError("d_target must be >= 1")
    return np.clip(rng.normal(0.5, 0.25, size=d_target), 0.0, 1.0)


def baseline_uniform_batch(n: int, d_target: int, rng: Rng) -> np.ndarray:
    if d_target < 1:
        raise InputError("d_target must be >= 1")
    return rng.uniform(size=(n, d_target))


def baseline_gaussian_batch(n: int, d_target: int, rng: Rng) -> np.ndarray:
    if d_target < 1:
        raise InputError("d_target must be >= 1")
    return np.clip(rng.normal(0.5, 0.25, size=(n, d_target)), 0.0, 1.0)
