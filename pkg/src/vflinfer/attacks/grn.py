"""Generative regression attack driven by accumulated predictions.

A generator network maps (adversary features, Gaussian noise) to an
estimate of the target features. Each training step assembles the
generated sample, pushes it through the frozen classifier, and minimizes
the squared error between the resulting confidence vector and the
observed one, plus a hinge penalty on the per-feature batch variance of
the generated values. Gradients flow through the frozen model into the
generator only.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InputError, NumericError, ShapeError
from ..linalg import Rng
from ..models import (
    confidence_and_cache,
    confidence_input_grad,
    is_differentiable,
    predict_confidence_batch,
)
from ..models.mlp import (
    Mlp,
    init_mlp,
    mlp_backward,
    mlp_forward,
    mlp_forward_cache,
    sgd_step,
    zero_velocity,
)
from ..partition import VerticalPartition

INPUT_MODES = ("full", "noise_only", "adv_only")


@dataclass
class GrnConfig:
    hidden: tuple = (600, 200, 100)
    epochs: int = 100
    batch: int = 64
    lr: float = 0.01
    momentum: float = 0.9
    lambda_var: float = 1.0  # weight of the variance hinge
    tau: float = 0.25  # variance allowed before the hinge engages
    squash: bool = True  # sigmoid output head, for (0,1)-normalized features
    layer_norm: bool = True
    input_mode: str = "full"  # ablations: "noise_only" drops x_adv, "adv_only" drops noise
    init_scale: float = 0.1  # scales the N(0,1) parameter init
    seed: int = 0


def generator_input_width(part: VerticalPartition, cfg: GrnConfig) -> int:
    if cfg.input_mode == "full":
        return part.d_adv + part.d_target
    if cfg.input_mode == "noise_only":
        return part.d_target
    if cfg.input_mode == "adv_only":
        return part.d_adv
    raise InputError(f"unknown input_mode {cfg.input_mode!r}")


def _generator_input(x_adv_rows: np.ndarray, noise: np.ndarray, mode: str) -> np.ndarray:
    if mode == "full":
        return np.concatenate([x_adv_rows, noise], axis=1)
    if mode == "noise_only":
        return noise
    return x_adv_rows


def grn_batch_loss_and_grads(
    generator: Mlp,
    model,
    part: VerticalPartition,
    x_adv_rows: np.ndarray,
    v_rows: np.ndarray,
    noise: np.ndarray,
    cfg: GrnConfig,
):
    """Composite loss on one batch and its generator-parameter gradients."""
    gen_in = _generator_input(x_adv_rows, noise, cfg.input_mode)
    x_hat, gen_cache = mlp_forward_cache(generator, gen_in, training=False)
    assembled = part.assemble(x_adv_rows, x_hat)
    v_hat, model_cache = confidence_and_cache(model, assembled)
    nb, c = v_hat.shape
    data_loss = float(np.sum((v_hat - v_rows) ** 2) / (nb * c))
    d_vhat = 2.0 * (v_hat - v_rows) / (nb * c)
    d_assembled = confidence_input_grad(model, model_cache, d_vhat)
    d_xhat = d_assembled[:, list(part.target_indices)].copy()
    penalty = 0.0
    if cfg.lambda_var > 0.0:
        var = x_hat.var(axis=0)
        over = var > cfg.tau
        penalty = cfg.lambda_var * float(np.sum(np.maximum(0.0, var - cfg.tau)))
        d_xhat += cfg.lambda_var * over * 2.0 * (x_hat - x_hat.mean(axis=0)) / nb
    grads, _ = mlp_backward(generator, gen_cache, d_xhat)
    return data_loss + penalty, grads


def grn_train(
    model,
    part: VerticalPartition,
    x_adv_rows: np.ndarray,
    v_rows: np.ndarray,
    cfg: GrnConfig,
):
    """Fit the generator; returns (generator, per-epoch mean loss trace)."""
    if not is_differentiable(model):
        raise TypeError(
            f"{type(model).__name__} does not expose input gradients; distill "
            "it into a surrogate network first"
        )
    x_adv_rows = np.asarray(x_adv_rows, dtype=np.float64)
    v_rows = np.asarray(v_rows, dtype=np.float64)
    if x_adv_rows.ndim != 2 or x_adv_rows.shape[1] != part.d_adv:
        raise ShapeError(f"adversary rows must have shape (n, {part.d_adv})")
    if v_rows.shape[0] != x_adv_rows.shape[0]:
        raise ShapeError("need one confidence vector per adversary row")
    if cfg.input_mode not in INPUT_MODES:
        raise InputError(f"unknown input_mode {cfg.input_mode!r}")
    rng = Rng(cfg.seed)
    generator = init_mlp(
        [generator_input_width(part, cfg), *cfg.hidden, part.d_target],
        head="sigmoid" if cfg.squash else "identity",
        layer_norm=cfg.layer_norm,
        rng=rng.fork("init"),
        init="normal",
        init_scale=cfg.init_scale,
    )
    velocity = zero_velocity(generator)
    shuffle_rng = rng.fork("shuffle")
    noise_rng = rng.fork("noise")
    n = x_adv_rows.shape[0]
    trace = []
    for epoch in range(cfg.epochs):
        order = shuffle_rng.permutation(n)
        epoch_loss = 0.0
        batches = 0
        for start in range(0, n, cfg.batch):
            idx = order[start : start + cfg.batch]
            noise = noise_rng.normal(size=(len(idx), part.d_target))
            loss, grads = grn_batch_loss_and_grads(
                generator, model, part, x_adv_rows[idx], v_rows[idx], noise, cfg
            )
            if not np.isfinite(loss):
                raise NumericError(f"non-finite generator loss at epoch {epoch}")
            sgd_step(generator, grads, velocity, cfg.lr, cfg.momentum)
            epoch_loss += loss
            batches += 1
        trace.append(epoch_loss / batches)
    return generator, trace


def grn_infer(
    generator: Mlp, part: VerticalPartition, x_adv: np.ndarray, rng: Rng,
    input_mode: str = "full",
) -> np.ndarray:
    """One inference pass with a fresh noise draw."""
    return grn_infer_batch(
        generator, part, np.asarray(x_adv, dtype=np.float64)[None, :], rng, input_mode
    )[0]


def grn_infer_batch(
    generator: Mlp,
    part: VerticalPartition,
    x_adv_rows: np.ndarray,
    rng: Rng,
    input_mode: str = "full",
) -> np.ndarray:
    x_adv_rows = np.asarray(x_adv_rows, dtype=np.float64)
    if x_adv_rows.shape[1] != part.d_adv:
        raise ShapeError(f"adversary rows must have shape (n, {part.d_adv})")
    noise = rng.normal(size=(x_adv_rows.shape[0], part.d_target))
    gen_in = _generator_input(x_adv_rows, noise, input_mode)
    return mlp_forward(generator, gen_in)


def direct_regression_infer(
    model,
    part: VerticalPartition,
    x_adv: np.ndarray,
    v: np.ndarray,
    rng: Rng,
    steps: int = 200,
    lr: float = 0.5,
) -> np.ndarray:
    """Generator-free ablation: optimize one sample's unknowns directly.

    Starts from standard-normal values and follows the prediction-loss
    gradient with no constraint on where the values wander.
    """
    return direct_regression_infer_batch(
        model,
        part,
        np.asarray(x_adv, dtype=np.float64)[None, :],
        np.asarray(v, dtype=np.float64)[None, :],
        rng,
        steps=steps,
        lr=lr,
    )[0]


def direct_regression_infer_batch(
    model,
    part: VerticalPartition,
    x_adv_rows: np.ndarray,
    v_rows: np.ndarray,
    rng: Rng,
    steps: int = 200,
    lr: float = 0.5,
) -> np.ndarray:
    """Vectorized direct regression; samples are optimized independently."""
    if not is_differentiable(model):
        raise TypeError("direct regression needs a differentiable model")
    x_adv_rows = np.asarray(x_adv_rows, dtype=np.float64)
    v_rows = np.asarray(v_rows, dtype=np.float64)
    n = x_adv_rows.shape[0]
    x_t = rng.normal(size=(n, part.d_target))
    cols = list(part.target_indices)
    for _ in range(steps):
        assembled = part.assemble(x_adv_rows, x_t)
        v_hat, cache = confidence_and_cache(model, assembled)
        d_vhat = 2.0 * (v_hat - v_rows) / v_hat.shape[1]
        d_assembled = confidence_input_grad(model, cache, d_vhat)
        x_t = x_t - lr * d_assembled[:, cols]
    return x_t
