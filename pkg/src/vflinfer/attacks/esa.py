"""Equality-solving attack on logistic regression confidence scores.

The released confidence vector pins down a linear system in the unknown
target features. Binary models give one equation through the inverse
sigmoid; multiclass models give c-1 equations from adjacent log-ratios of
confidence scores, since ln v_k - ln v_{k+1} equals the difference of the
two class scores. The system is solved with the pseudo-inverse, whose
solution is the minimum-norm least-squares estimate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DegenerateProblemError, ShapeError
from ..linalg import Matrix, Vector, logit, pinv
from ..models.logreg import LogRegModel
from ..partition import VerticalPartition

CONF_EPS = 1e-12  # confidence clamp before taking logs; rounding can emit 0.0


@dataclass
class EsaProblem:
    """Linear system ``theta_target_diff @ x_target = rhs``."""

    theta_target_diff: Matrix  # (max(1, c-1), d_target)
    rhs: Vector  # (max(1, c-1),)


def esa_problem(
    model: LogRegModel, part: VerticalPartition, x_adv: Vector, v: Vector
) -> EsaProblem:
    """Assemble the equation system the adversary can write down."""
    if model.d != part.total_features:
        raise ShapeError(
            f"model has {model.d} features, partition {part.total_features}"
        )
    x_adv = np.asarray(x_adv, dtype=np.float64)
    if x_adv.shape != (part.d_adv,):
        raise ShapeError(f"x_adv must have shape ({part.d_adv},)")
    v = np.clip(np.asarray(v, dtype=np.float64), CONF_EPS, 1.0 - CONF_EPS)
    adv_cols = list(part.adv_indices)
    tgt_cols = list(part.target_indices)
    if model.is_binary:
        theta_adv = model.weights[0][adv_cols]
        theta_tgt = model.weights[0][tgt_cols][None, :]
        rhs = np.array([logit(v[0]) - x_adv @ theta_adv])
        return EsaProblem(theta_tgt, rhs)
    if v.shape != (model.num_classes,):
        raise ShapeError(f"v must have shape ({model.num_classes},)")
    diff = model.weights[:-1] - model.weights[1:]  # adjacent class-score rows
    a_prime = np.log(v[:-1]) - np.log(v[1:])
    rhs = a_prime - diff[:, adv_cols] @ x_adv
    return EsaProblem(diff[:, tgt_cols], rhs)


def esa(
    model: LogRegModel,
    part: VerticalPartition,
    x_adv: Vector,
    v: Vector,
    rel_cutoff: float = 1e-12,
) -> Vector:
    """Infer the target features behind one prediction.

    Exact when the target holds no more features than there are equations
    and the reduced weight matrix has full rank; otherwise returns the
    minimum-norm least-squares estimate.
    """
    problem = esa_problem(model, part, x_adv, v)
    if not np.any(problem.theta_target_diff):
        raise DegenerateProblemError(
            "target-feature weights are all zero; the prediction carries no "
            "information about the target"
        )
    return pinv(problem.theta_target_diff, rel_cutoff) @ problem.rhs


def esa_batch(
    model: LogRegModel,
    part: VerticalPartition,
    x_adv_rows: Matrix,
    v_rows: Matrix,
    rel_cutoff: float = 1e-12,
) -> Matrix:
    """Vectorized solve across samples (the equation matrix is shared)."""
    x_adv_rows = np.asarray(x_adv_rows, dtype=np.float64)
    v_rows = np.clip(np.asarray(v_rows, dtype=np.float64), CONF_EPS, 1.0 - CONF_EPS)
    adv_cols = list(part.adv_indices)
    tgt_cols = list(part.target_indices)
    if model.is_binary:
        theta_tgt = model.weights[0][tgt_cols][None, :]
        rhs = logit(v_rows[:, 0]) - x_adv_rows @ model.weights[0][adv_cols]
        rhs = rhs[:, None]
    else:
        diff = model.weights[:-1] - model.weights[1:]
        a_prime = np.log(v_rows[:, :-1]) - np.log(v_rows[:, 1:])
        rhs = a_prime - x_adv_rows @ diff[:, adv_cols].T
        theta_tgt = diff[:, tgt_cols]
    if not np.any(theta_tgt):
        raise DegenerateProblemError("target-feature weights are all zero")
    return rhs @ pinv(theta_tgt, rel_cutoff).T
