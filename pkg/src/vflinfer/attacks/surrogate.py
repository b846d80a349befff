"""Distillation of a random forest into a differentiable surrogate network.

Dummy samples are drawn uniformly from the unit cube, labeled with the
forest's vote-fraction confidence vectors, and fit with a softmax-head
network so that gradients can flow "through" the forest during the
generator attack.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError
from ..linalg import Rng
from ..models.mlp import Mlp, MlpConfig, mlp_forward, train_mlp
from ..models.tree import RandomForest, predict_forest


@dataclass
class SurrogateConfig:
    num_dummy: int = 10_000
    hidden: tuple = (2000, 200)
    epochs: int = 20
    batch: int = 64
    lr: float = 0.05
    momentum: float = 0.9
    holdout_frac: float = 0.1
    seed: int = 0


def default_num_dummy(n_predictions: int) -> int:
    """Ten dummies per observed prediction, floored at ten thousand."""
    return max(10 * n_predictions, 10_000)


def forest_confidences(forest: RandomForest, rows: np.ndarray) -> np.ndarray:
    return np.stack([predict_forest(forest, row) for row in rows])


def distill_rf(forest: RandomForest, d: int, cfg: SurrogateConfig, rng: Rng):
    """Train the surrogate; returns (network, held-out top-class agreement)."""
    if cfg.num_dummy < 1:
        raise InputError("need at least one dummy sample")
    dummy = rng.uniform(size=(cfg.num_dummy, d))
    targets = forest_confidences(forest, dummy)
    n_hold = max(1, int(cfg.holdout_frac * cfg.num_dummy))
    hold_x, hold_t = dummy[:n_hold], targets[:n_hold]
    fit_x, fit_t = dummy[n_hold:], targets[n_hold:]
    if fit_x.shape[0] == 0:
        fit_x, fit_t = hold_x, hold_t
    surrogate = train_mlp(
        fit_x,
        fit_t,  # soft targets: cross-entropy against the vote fractions
        MlpConfig(
            sizes=[d, *cfg.hidden, forest.num_classes],
            head="softmax",
            loss="ce",
            lr=cfg.lr,
            epochs=cfg.epochs,
            batch=cfg.batch,
            momentum=cfg.momentum,
            seed=cfg.seed,
        ),
    )
    agreement = top_class_agreement(surrogate, hold_x, hold_t)
    return surrogate, agreement


def top_class_agreement(surrogate: Mlp, rows: np.ndarray, target_conf: np.ndarray) -> float:
    predicted = np.argmax(mlp_forward(surrogate, rows), axis=1)
    return float(np.mean(predicted == np.argmax(target_conf, axis=1)))
