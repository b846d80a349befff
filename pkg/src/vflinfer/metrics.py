"""Attack evaluation: reconstruction error, branching agreement, bounds.

MSE is averaged over samples and target features. CBR walks each true
prediction path and checks, at every target-owned split, whether the
inferred value falls on the same side of the threshold as the truth.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import InputError, ShapeError
from .models.tree import DecisionTree, RandomForest
from .partition import VerticalPartition


@dataclass
class AttackScore:
    mse: float
    per_feature_mse: np.ndarray
    cbr: float = None


def mse_per_feature(inferred: np.ndarray, truth: np.ndarray) -> AttackScore:
    """Mean squared error over all (sample, target-feature) cells."""
    inferred = np.asarray(inferred, dtype=np.float64)
    truth = np.asarray(truth, dtype=np.float64)
    if inferred.shape != truth.shape or inferred.ndim != 2 or inferred.size == 0:
        raise ShapeError(
            f"inferred {inferred.shape} and truth {truth.shape} must be equal "
            "nonempty (n, d_target) matrices"
        )
    sq = (inferred - truth) ** 2
    return AttackScore(mse=float(sq.mean()), per_feature_mse=sq.mean(axis=0))


def cbr(
    trees,
    part: VerticalPartition,
    inferred: np.ndarray,
    truth_full: np.ndarray,
):
    """Correct branching rate, micro-averaged over every comparison.

    ``truth_full`` holds complete samples (n, d) so the true prediction
    path can be walked; ``inferred`` holds only the target columns
    (n, d_target). Returns None when no target-owned split is ever
    visited.
    """
    if isinstance(trees, DecisionTree):
        trees = [trees]
    elif isinstance(trees, RandomForest):
        trees = trees.trees
    inferred = np.asarray(inferred, dtype=np.float64)
    truth_full = np.asarray(truth_full, dtype=np.float64)
    if truth_full.ndim != 2 or truth_full.shape[1] != part.total_features:
        raise ShapeError(f"truth_full must have shape (n, {part.total_features})")
    if inferred.shape != (truth_full.shape[0], part.d_target):
        raise ShapeError(
            f"inferred must have shape ({truth_full.shape[0]}, {part.d_target})"
        )
    target_pos = {f: j for j, f in enumerate(part.target_indices)}
    matched = total = 0
    for x, x_hat_t in zip(truth_full, inferred):
        for tree in trees:
            i = 0
            while not tree.nodes[i].is_leaf:
                node = tree.nodes[i]
                go_left = x[node.feature] <= node.threshold
                if node.feature in target_pos:
                    inferred_left = x_hat_t[target_pos[node.feature]] <= node.threshold
                    matched += inferred_left == go_left
                    total += 1
                i = 2 * i + 1 if go_left else 2 * i + 2
    if total == 0:
        return None
    return matched / total


def mse_upper_bound(truth: np.ndarray) -> float:
    """Attack-error ceiling for minimum-norm solutions on (0,1) data.

    Because the estimate never exceeds the truth in Euclidean norm, the
    squared error per cell is at most 2x^2; this returns that bound
    averaged over all cells.
    """
    truth = np.asarray(truth, dtype=np.float64)
    if truth.size == 0:
        raise InputError("empty truth matrix")
    if truth.min() < 0.0 or truth.max() > 1.0:
        raise InputError("upper bound requires features normalized into [0, 1]")
    return float(np.mean(2.0 * truth**2))


def pearson(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation; zero-variance inputs yield 0 with a warning."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1 or a.size < 2:
        raise ShapeError("pearson needs two equal-length vectors of >= 2 samples")
    da, db = a - a.mean(), b - b.mean()
    denom = np.sqrt(np.sum(da**2) * np.sum(db**2))
    if denom == 0.0:
        warnings.warn("zero-variance column in correlation; returning 0", RuntimeWarning)
        return 0.0
    return float(np.dot(da, db) / denom)


def corr_adv(adv_cols: np.ndarray, target_col: np.ndarray) -> float:
    """Mean absolute correlation of one target feature with every adversary column."""
    adv_cols = np.asarray(adv_cols, dtype=np.float64)
    return float(np.mean([abs(pearson(adv_cols[:, j], target_col)) for j in range(adv_cols.shape[1])]))


def corr_v(v_cols: np.ndarray, target_col: np.ndarray) -> float:
    """Mean absolute correlation of one target feature with every confidence column."""
    v_cols = np.asarray(v_cols, dtype=np.float64)
    return float(np.mean([abs(pearson(v_cols[:, j], target_col)) for j in range(v_cols.shape[1])]))


def feature_correlation_profile(
    adv_cols: np.ndarray,
    v_cols: np.ndarray,
    inferred: np.ndarray,
    truth: np.ndarray,
):
    """Per-target-feature (mse, corr with adversary, corr with confidences)."""
    score = mse_per_feature(inferred, truth)
    out = []
    for i in range(truth.shape[1]):
        out.append(
            (
                float(score.per_feature_mse[i]),
                corr_adv(adv_cols, truth[:, i]),
                corr_v(v_cols, truth[:, i]),
            )
        )
    return out
