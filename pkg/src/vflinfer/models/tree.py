"""CART decision trees in a full-binary array layout, plus random forests.

Trees are materialized into an array of 2^(depth+1)-1 nodes with the
children of node i at 2i+1 and 2i+2; subtrees below an early leaf are
filled by replicating that leaf so the indexing is total. Prediction
stops at the first leaf reached, so replicas are never visited. The
branch rule everywhere is: go left iff feature value <= threshold.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..data import Dataset
from ..errors import InputError, ShapeError
from ..linalg import Rng


@dataclass(frozen=True)
class TreeNode:
    is_leaf: bool
    feature: int = -1
    threshold: float = float("nan")
    label: int = -1


@dataclass
class DecisionTree:
    depth: int
    num_classes: int
    nodes: list  # length 2^(depth+1) - 1

    def __post_init__(self):
        if len(self.nodes) != 2 ** (self.depth + 1) - 1:
            raise ShapeError(
                f"depth {self.depth} requires {2 ** (self.depth + 1) - 1} nodes, "
                f"got {len(self.nodes)}"
            )

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    def reachable_indices(self):
        """Structurally reachable node indices (walks stop below leaves)."""
        queue, seen = [0], []
        while queue:
            i = queue.pop(0)
            seen.append(i)
            if not self.nodes[i].is_leaf:
                queue.extend((2 * i + 1, 2 * i + 2))
        return seen

    def leaf_paths(self):
        """All root-to-leaf paths of the real (reachable) tree."""
        paths = []

        def walk(i, prefix):
            prefix = prefix + (i,)
            if self.nodes[i].is_leaf:
                paths.append(prefix)
            else:
                walk(2 * i + 1, prefix)
                walk(2 * i + 2, prefix)

        walk(0, ())
        return paths


@dataclass
class TreeConfig:
    max_depth: int = 5
    min_leaf: int = 1
    seed: int = 0


@dataclass
class ForestConfig:
    num_trees: int = 100
    max_depth: int = 3
    feature_subsample: int = None  # None -> ceil(sqrt(d)) per split
    bootstrap: bool = True
    seed: int = 0


@dataclass
class RandomForest:
    trees: list
    num_classes: int


def gini(counts: np.ndarray) -> float:
    total = counts.sum()
    if total == 0:
        return 0.0
    p = counts / total
    return float(1.0 - np.sum(p * p))


def _best_split(x: np.ndarray, y: np.ndarray, c: int, features, min_leaf: int):
    """Lowest weighted-Gini split over midpoint thresholds.

    Ties keep the first candidate in (feature asc, threshold asc) order.
    Returns (feature, threshold) or None when no valid split exists.
    """
    n = x.shape[0]
    best = None
    best_score = np.inf
    for f in features:
        order = np.argsort(x[:, f], kind="stable")
        xs, ys = x[order, f], y[order]
        onehot = np.zeros((n, c))
        onehot[np.arange(n), ys] = 1.0
        left = np.cumsum(onehot, axis=0)  # counts with first i+1 samples on the left
        total = left[-1]
        boundary = np.nonzero(np.diff(xs) > 0)[0]  # split after position i
        for i in boundary:
            nl = i + 1
            nr = n - nl
            if nl < min_leaf or nr < min_leaf:
                continue
            score = (nl * gini(left[i]) + nr * gini(total - left[i])) / n
            if score < best_score - 1e-15:
                best_score = score
                best = (int(f), float((xs[i] + xs[i + 1]) / 2.0))
    return best


def _majority(y: np.ndarray, c: int) -> int:
    counts = np.bincount(y, minlength=c)
    return int(np.argmax(counts))  # argmax breaks ties toward the lowest label


def _grow(x, y, c, depth_left, cfg: TreeConfig, rng: Rng, subsample: int):
    if depth_left == 0 or np.all(y == y[0]):
        return {"leaf": _majority(y, c)}
    d = x.shape[1]
    if subsample is not None and subsample < d:
        features = np.sort(rng.choice(d, size=subsample, replace=False))
    else:
        features = np.arange(d)
    found = _best_split(x, y, c, features, cfg.min_leaf)
    if found is None:
        return {"leaf": _majority(y, c)}
    f, thr = found
    go_left = x[:, f] <= thr
    return {
        "feature": f,
        "threshold": thr,
        "left": _grow(x[go_left], y[go_left], c, depth_left - 1, cfg, rng, subsample),
        "right": _grow(x[~go_left], y[~go_left], c, depth_left - 1, cfg, rng, subsample),
    }


def _tree_depth(node) -> int:
    if "leaf" in node:
        return 0
    return 1 + max(_tree_depth(node["left"]), _tree_depth(node["right"]))


def _materialize(root) -> DecisionTree:
    depth = _tree_depth(root)
    nodes = [None] * (2 ** (depth + 1) - 1)

    def fill(node, i):
        if "leaf" in node:
            nodes[i] = TreeNode(is_leaf=True, label=node["leaf"])
            if 2 * i + 2 < len(nodes):  # replicate the leaf downward
                fill(node, 2 * i + 1)
                fill(node, 2 * i + 2)
        else:
            nodes[i] = TreeNode(is_leaf=False, feature=node["feature"], threshold=node["threshold"])
            fill(node["left"], 2 * i + 1)
            fill(node["right"], 2 * i + 2)

    fill(root, 0)
    return nodes, depth


def train_tree(ds: Dataset, max_depth: int = None, cfg: TreeConfig = None) -> DecisionTree:
    """Deterministic CART with Gini impurity and midpoint thresholds."""
    cfg = cfg or TreeConfig()
    if max_depth is not None:
        cfg = TreeConfig(max_depth=max_depth, min_leaf=cfg.min_leaf, seed=cfg.seed)
    if cfg.max_depth < 0:
        raise InputError("max_depth must be >= 0")
    if ds.n == 0:
        raise InputError("cannot train on an empty dataset")
    root = _grow(ds.features, ds.labels, ds.num_classes, cfg.max_depth, cfg, Rng(cfg.seed), None)
    nodes, depth = _materialize(root)
    return DecisionTree(depth=depth, num_classes=ds.num_classes, nodes=nodes)


def predict_tree(tree: DecisionTree, x: np.ndarray):
    """Walk from the root; returns (label, visited node-index path)."""
    x = np.asarray(x, dtype=np.float64)
    i, path = 0, [0]
    while not tree.nodes[i].is_leaf:
        node = tree.nodes[i]
        if node.feature >= x.shape[0]:
            raise ShapeError(
                f"sample of width {x.shape[0]} lacks feature {node.feature}"
            )
        i = 2 * i + 1 if x[node.feature] <= node.threshold else 2 * i + 2
        path.append(i)
    return tree.nodes[i].label, path


def train_forest(ds: Dataset, cfg: ForestConfig) -> RandomForest:
    """Bootstrap-resampled trees with per-split feature subsampling."""
    if cfg.num_trees < 1:
        raise InputError("need at least one tree")
    if ds.n == 0:
        raise InputError("cannot train on an empty dataset")
    rng = Rng(cfg.seed)
    subsample = cfg.feature_subsample
    if subsample is None:
        subsample = int(np.ceil(np.sqrt(ds.d)))
    trees = []
    tree_cfg = TreeConfig(max_depth=cfg.max_depth)
    for t in range(cfg.num_trees):
        tree_rng = rng.fork(f"tree/{t}")
        if cfg.bootstrap:
            idx = tree_rng.fork("bootstrap").integers(0, ds.n, size=ds.n)
            x, y = ds.features[idx], ds.labels[idx]
        else:
            x, y = ds.features, ds.labels
        root = _grow(
            x, y, ds.num_classes, cfg.max_depth, tree_cfg, tree_rng.fork("splits"), subsample
        )
        nodes, depth = _materialize(root)
        trees.append(DecisionTree(depth=depth, num_classes=ds.num_classes, nodes=nodes))
    return RandomForest(trees=trees, num_classes=ds.num_classes)


def predict_forest(forest: RandomForest, x: np.ndarray) -> np.ndarray:
    """Vote-fraction confidence vector: v_k = (#trees predicting k) / W."""
    votes = np.zeros(forest.num_classes)
    for tree in forest.trees:
        label, _ = predict_tree(tree, x)
        votes[label] += 1.0
    return votes / len(forest.trees)
