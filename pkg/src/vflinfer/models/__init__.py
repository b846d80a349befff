"""Model families and a uniform confidence-vector prediction surface.

Every trained model maps a sample to a vector of per-class confidence
scores summing to one. Logistic regression and MLPs additionally support
input-gradient backpropagation, which the generator attack requires;
trees and forests must be distilled into a differentiable surrogate
first.
"""

from __future__ import annotations

import numpy as np

from ..errors import ShapeError
from .logreg import (
    LogRegConfig,
    LogRegModel,
    logreg_loss_and_grad,
    predict_logreg,
    predict_logreg_batch,
    train_logreg,
)
from .mlp import (
    Mlp,
    MlpConfig,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_forward_cache,
    sgd_step,
    train_mlp,
    zero_velocity,
)
from .io import load_model, model_from_dict, model_to_dict, save_model
from .tree import (
    DecisionTree,
    ForestConfig,
    RandomForest,
    TreeConfig,
    predict_forest,
    predict_tree,
    train_forest,
    train_tree,
)

__all__ = [
    "DecisionTree",
    "ForestConfig",
    "LogRegConfig",
    "LogRegModel",
    "Mlp",
    "MlpConfig",
    "RandomForest",
    "TreeConfig",
    "confidence_and_cache",
    "confidence_input_grad",
    "init_mlp",
    "is_differentiable",
    "load_model",
    "logreg_loss_and_grad",
    "mlp_backward",
    "mlp_forward",
    "mlp_forward_cache",
    "model_from_dict",
    "model_to_dict",
    "predict_confidence",
    "predict_confidence_batch",
    "predict_forest",
    "predict_logreg",
    "predict_logreg_batch",
    "predict_tree",
    "save_model",
    "sgd_step",
    "train_forest",
    "train_logreg",
    "train_mlp",
    "train_tree",
    "zero_velocity",
]


def predict_confidence(model, x: np.ndarray) -> np.ndarray:
    """Confidence-score vector of one sample for any model kind."""
    if isinstance(model, (DecisionTree, RandomForest)):
        if isinstance(model, DecisionTree):
            label, _ = predict_tree(model, x)
            v = np.zeros(model.num_classes)
            v[label] = 1.0
            return v
        return predict_forest(model, x)
    return predict_confidence_batch(model, np.asarray(x, dtype=np.float64)[None, :])[0]


def predict_confidence_batch(model, x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    if isinstance(model, LogRegModel):
        return predict_logreg_batch(model, x)
    if isinstance(model, Mlp):
        out = mlp_forward(model, x)
        return _mlp_confidence(model, out)
    if isinstance(model, (DecisionTree, RandomForest)):
        return np.stack([predict_confidence(model, row) for row in x])
    raise ShapeError(f"unsupported model type {type(model).__name__}")


def _mlp_confidence(model: Mlp, out: np.ndarray) -> np.ndarray:
    if model.head == "sigmoid" and model.out_width == 1:
        return np.concatenate([out, 1.0 - out], axis=1)
    return out


def is_differentiable(model) -> bool:
    return isinstance(model, (LogRegModel, Mlp))


def confidence_and_cache(model, x: np.ndarray):
    """Batch confidence vectors plus whatever backprop will need."""
    x = np.asarray(x, dtype=np.float64)
    if isinstance(model, LogRegModel):
        return predict_logreg_batch(model, x), {"x": x}
    if isinstance(model, Mlp):
        out, cache = mlp_forward_cache(model, x, training=False)
        return _mlp_confidence(model, out), cache
    raise TypeError(
        f"{type(model).__name__} is not differentiable; distill it into a "
        "surrogate network first"
    )


def confidence_input_grad(model, cache, d_conf: np.ndarray) -> np.ndarray:
    """d loss / d input given d loss / d confidence-vector (model frozen)."""
    d_conf = np.asarray(d_conf, dtype=np.float64)
    if isinstance(model, LogRegModel):
        x = cache["x"]
        v = predict_logreg_batch(model, x)
        if model.is_binary:
            s = v[:, 0]
            d_z = (d_conf[:, 0] - d_conf[:, 1]) * s * (1.0 - s)
            return d_z[:, None] * model.weights[0][None, :]
        d_z = v * (d_conf - np.sum(d_conf * v, axis=1, keepdims=True))
        return d_z @ model.weights
    if isinstance(model, Mlp):
        if model.head == "sigmoid" and model.out_width == 1:
            d_out = (d_conf[:, :1] - d_conf[:, 1:2])
        else:
            d_out = d_conf
        _, d_input = mlp_backward(model, cache, d_out)
        return d_input
    raise TypeError(f"{type(model).__name__} does not support input gradients")
