"""Multinomial / binary logistic regression trained by mini-batch SGD.

No intercept is used: the score of class k is a pure dot product, so the
per-class weight rows partition cleanly along any vertical feature split.
A bias can be emulated with an always-constant adversary feature.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..data import Dataset
from ..errors import InputError, NumericError, ShapeError
from ..linalg import Rng, sigmoid, softmax


@dataclass
class LogRegModel:
    num_classes: int
    weights: np.ndarray  # (c, d) multiclass; (1, d) binary

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=np.float64)
        if self.weights.ndim != 2:
            raise ShapeError("weights must be a 2-D matrix")
        rows = self.weights.shape[0]
        expected = 1 if self.num_classes == 2 else self.num_classes
        if self.num_classes < 2 or rows != expected:
            raise ShapeError(
                f"weights rows {rows} incompatible with num_classes {self.num_classes}"
            )

    @property
    def is_binary(self) -> bool:
        return self.weights.shape[0] == 1

    @property
    def d(self) -> int:
        return self.weights.shape[1]


@dataclass
class LogRegConfig:
    lr: float = 0.1
    epochs: int = 100
    batch: int = 32
    seed: int = 0
    momentum: float = 0.9


def predict_logreg(model: LogRegModel, x: np.ndarray) -> np.ndarray:
    """Confidence-score vector of one sample."""
    return predict_logreg_batch(model, np.asarray(x, dtype=np.float64)[None, :])[0]


def predict_logreg_batch(model: LogRegModel, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[1] != model.d:
        raise ShapeError(f"expected (n, {model.d}) inputs, got {x.shape}")
    if model.is_binary:
        v1 = sigmoid(x @ model.weights[0])
        return np.stack([v1, 1.0 - v1], axis=1)
    return softmax(x @ model.weights.T)


def logreg_loss_and_grad(model: LogRegModel, x: np.ndarray, y: np.ndarray):
    """Mean cross-entropy over a batch and its gradient w.r.t. the weights."""
    n = x.shape[0]
    v = predict_logreg_batch(model, x)
    eps = 1e-300
    loss = -float(np.mean(np.log(v[np.arange(n), y] + eps)))
    if model.is_binary:
        # v1 is P(class 0); d loss / d z = v1 - [y == 0]
        dz = (v[:, 0] - (y == 0)) / n
        grad = (dz @ x)[None, :]
    else:
        onehot = np.zeros_like(v)
        onehot[np.arange(n), y] = 1.0
        grad = ((v - onehot) / n).T @ x
    return loss, grad


def train_logreg(ds: Dataset, cfg: LogRegConfig) -> LogRegModel:
    """Zero-initialized softmax regression fit by SGD with momentum."""
    if ds.n == 0:
        raise InputError("cannot train on an empty dataset")
    if not np.all(np.isfinite(ds.features)):
        raise InputError("features must be finite")
    rows = 1 if ds.num_classes == 2 else ds.num_classes
    model = LogRegModel(ds.num_classes, np.zeros((rows, ds.d)))
    rng = Rng(cfg.seed)
    velocity = np.zeros_like(model.weights)
    for epoch in range(cfg.epochs):
        order = rng.permutation(ds.n)
        for start in range(0, ds.n, cfg.batch):
            idx = order[start : start + cfg.batch]
            loss, grad = logreg_loss_and_grad(model, ds.features[idx], ds.labels[idx])
            if not np.isfinite(loss):
                raise NumericError(f"non-finite loss at epoch {epoch}")
            velocity = cfg.momentum * velocity - cfg.lr * grad
            model.weights = model.weights + velocity
    return model
