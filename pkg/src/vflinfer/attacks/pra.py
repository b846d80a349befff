"""Path-restriction attack on a decision tree prediction.

A breadth-first sweep computes a liveness indicator ``beta`` over the
full-binary node array: at a node whose split feature the adversary owns,
only the child matching the adversary's value stays live; at a
target-owned node both children inherit liveness. A second indicator
``alpha`` marks real leaves carrying the observed class. Candidate
prediction paths are the root-to-leaf paths whose leaf survives the
element-wise product, and each target-owned split on the chosen path
yields a (threshold, direction) constraint on an unknown feature.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from ..errors import AttackInfeasibleError, ShapeError
from ..linalg import Rng, Vector
from ..models.tree import DecisionTree
from ..partition import VerticalPartition


@dataclass(frozen=True)
class BranchConstraint:
    """`feature <= threshold` when is_leq, else `feature > threshold`."""

    feature: int
    threshold: float
    is_leq: bool

    def satisfied_by(self, value: float) -> bool:
        return (value <= self.threshold) == self.is_leq


@dataclass
class PraResult:
    tree: DecisionTree
    partition: VerticalPartition
    observed_class: int
    beta: np.ndarray
    alpha: np.ndarray
    candidate_paths: list
    chosen_path: tuple = None
    branch_constraints: list = field(default_factory=list)

    @property
    def n_candidates(self) -> int:
        return len(self.candidate_paths)


def _path_to_leaf(leaf: int) -> tuple:
    path = [leaf]
    while leaf > 0:
        leaf = (leaf - 1) // 2
        path.append(leaf)
    return tuple(reversed(path))


def pra_candidates(
    tree: DecisionTree, part: VerticalPartition, x_adv: Vector, k: int
) -> PraResult:
    """Restrict the tree's prediction paths using adversary features and class."""
    x_adv = np.asarray(x_adv, dtype=np.float64)
    if x_adv.shape != (part.d_adv,):
        raise ShapeError(f"x_adv must have shape ({part.d_adv},)")
    adv_pos = {f: i for i, f in enumerate(part.adv_indices)}
    n_f = tree.n_nodes
    beta = np.zeros(n_f, dtype=np.int64)
    alpha = np.zeros(n_f, dtype=np.int64)
    beta[0] = 1
    queue = [0]
    while queue:
        i = queue.pop(0)
        node = tree.nodes[i]
        if node.is_leaf:
            if node.label == k:
                alpha[i] = 1
            continue
        if node.feature in adv_pos:
            if x_adv[adv_pos[node.feature]] <= node.threshold:
                beta[2 * i + 1], beta[2 * i + 2] = beta[i], 0
            else:
                beta[2 * i + 1], beta[2 * i + 2] = 0, beta[i]
        else:
            beta[2 * i + 1] = beta[2 * i + 2] = beta[i]
        queue.append(2 * i + 1)
        queue.append(2 * i + 2)
    surviving = np.nonzero(alpha * beta)[0]
    paths = [_path_to_leaf(int(leaf)) for leaf in surviving]
    return PraResult(tree, part, k, beta, alpha, paths)


def path_constraints(
    tree: DecisionTree, part: VerticalPartition, path
) -> list:
    """Target-feature constraints implied by walking one concrete path."""
    adv = set(part.adv_indices)
    out = []
    for i, nxt in zip(path, path[1:]):
        node = tree.nodes[i]
        if node.feature in adv:
            continue
        out.append(
            BranchConstraint(node.feature, node.threshold, is_leq=(nxt == 2 * i + 1))
        )
    return out


def pra_infer(result: PraResult, rng: Rng) -> PraResult:
    """Pick one candidate uniformly and read off its target constraints."""
    if not result.candidate_paths:
        raise AttackInfeasibleError(
            f"no prediction path is consistent with class {result.observed_class}"
        )
    pick = int(rng.integers(0, len(result.candidate_paths)))
    chosen = result.candidate_paths[pick]
    constraints = path_constraints(result.tree, result.partition, chosen)
    return replace(result, chosen_path=chosen, branch_constraints=constraints)


def constraint_matches(constraints, x_full: Vector):
    """(matched, total) target-node comparisons against a ground-truth sample."""
    x_full = np.asarray(x_full, dtype=np.float64)
    matched = sum(1 for c in constraints if c.satisfied_by(x_full[c.feature]))
    return matched, len(constraints)
