"""Vertical split of a feature space between an adversary and a target side."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import InputError, ShapeError
from .linalg import Rng, Vector


@dataclass(frozen=True)
class VerticalPartition:
    """Disjoint, exhaustive index sets over a shared column ordering.

    ``adv_indices`` are the columns the adversary holds, ``target_indices``
    the columns it tries to infer. Both are kept sorted.
    """

    total_features: int
    adv_indices: tuple = field(default=())
    target_indices: tuple = field(default=())

    def __post_init__(self):
        adv = tuple(sorted(int(i) for i in self.adv_indices))
        tgt = tuple(sorted(int(i) for i in self.target_indices))
        object.__setattr__(self, "adv_indices", adv)
        object.__setattr__(self, "target_indices", tgt)
        merged = sorted(adv + tgt)
        if merged != list(range(self.total_features)):
            raise InputError(
                "adversary and target index sets must disjointly cover "
                f"0..{self.total_features - 1}"
            )

    @property
    def d_adv(self) -> int:
        return len(self.adv_indices)

    @property
    def d_target(self) -> int:
        return len(self.target_indices)

    def owns_adv(self, feature: int) -> bool:
        return feature in self._adv_set

    @property
    def _adv_set(self):
        return frozenset(self.adv_indices)

    def split(self, x: Vector):
        """Project a full sample into (adversary part, target part)."""
        x = np.asarray(x, dtype=np.float64)
        if x.shape[-1] != self.total_features:
            raise ShapeError(
                f"sample has {x.shape[-1]} features, partition expects {self.total_features}"
            )
        return x[..., list(self.adv_indices)], x[..., list(self.target_indices)]

    def assemble(self, x_adv: Vector, x_target: Vector) -> Vector:
        """Inverse of split: interleave both parts back into full order."""
        x_adv = np.asarray(x_adv, dtype=np.float64)
        x_target = np.asarray(x_target, dtype=np.float64)
        if x_adv.shape[-1] != self.d_adv or x_target.shape[-1] != self.d_target:
            raise ShapeError(
                f"expected parts of widths ({self.d_adv}, {self.d_target}), "
                f"got ({x_adv.shape[-1]}, {x_target.shape[-1]})"
            )
        shape = x_adv.shape[:-1] + (self.total_features,)
        out = np.empty(shape, dtype=np.float64)
        out[..., list(self.adv_indices)] = x_adv
        out[..., list(self.target_indices)] = x_target
        return out


def split(p: VerticalPartition, x: Vector):
    return p.split(x)


def assemble(p: VerticalPartition, x_adv: Vector, x_target: Vector) -> Vector:
    return p.assemble(x_adv, x_target)


def sample_partition(d: int, frac_target: float, rng: Rng) -> VerticalPartition:
    """Draw a uniformly random partition with round-half-up target size."""
    if not (0.0 < frac_target < 1.0):
        raise InputError(f"frac_target must lie in (0, 1), got {frac_target}")
    d_target = int(np.floor(frac_target * d + 0.5))
    if d_target <= 0 or d_target >= d:
        raise InputError(
            f"frac_target={frac_target} leaves d_target={d_target} of {d} features"
        )
    target = np.sort(rng.choice(d, size=d_target, replace=False))
    adv = np.setdiff1d(np.arange(d), target)
    return VerticalPartition(d, tuple(adv), tuple(target))
