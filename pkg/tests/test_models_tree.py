import numpy as np
import pytest

from vflinfer.data import Dataset, SynthConfig, synth_generate
from vflinfer.errors import InputError
from vflinfer.models import (
    ForestConfig,
    TreeConfig,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_forest,
    predict_tree,
    save_model,
    train_forest,
    train_tree,
)
from vflinfer.models.tree import DecisionTree, TreeNode, gini


def random_dataset(seed, n=120, d=5, c=3):
    rng = np.random.default_rng(seed)
    return Dataset(rng.uniform(size=(n, d)), rng.integers(0, c, size=n), c)


class TestTrain:
    def test_pure_dataset_gives_single_leaf(self):
        ds = Dataset(np.random.default_rng(0).uniform(size=(10, 3)), np.full(10, 2), 4)
        tree = train_tree(ds, max_depth=5)
        assert tree.depth == 0
        assert tree.nodes[0].is_leaf and tree.nodes[0].label == 2

    def test_one_dimensional_split_at_midpoint(self):
        # exhaustive check: candidate thresholds are 0.15, 0.5, 0.85 and
        # only 0.5 separates the classes perfectly (weighted gini 0)
        ds = Dataset(
            np.array([[0.1], [0.2], [0.8], [0.9]]), np.array([0, 0, 1, 1]), 2
        )
        tree = train_tree(ds, max_depth=1)
        assert not tree.nodes[0].is_leaf
        assert tree.nodes[0].threshold == 0.5
        assert tree.nodes[1].label == 0 and tree.nodes[2].label == 1

    def test_gini_pure_node_zero(self):
        assert gini(np.array([7.0, 0.0, 0.0])) == 0.0
        assert gini(np.array([5.0, 5.0])) == 0.5

    def test_deterministic(self):
        ds = random_dataset(1)
        a = train_tree(ds, cfg=TreeConfig(max_depth=4, seed=3))
        b = train_tree(ds, cfg=TreeConfig(max_depth=4, seed=3))
        assert a.nodes == b.nodes

    def test_full_binary_materialization(self):
        ds = random_dataset(2)
        tree = train_tree(ds, max_depth=4)
        assert len(tree.nodes) == 2 ** (tree.depth + 1) - 1
        assert all(node is not None for node in tree.nodes)

    def test_empty_dataset_rejected(self):
        ds = Dataset(np.zeros((0, 2)), np.zeros(0, dtype=int), 2)
        with pytest.raises(InputError):
            train_tree(ds, max_depth=2)


class TestPredict:
    def test_depth_zero_path(self):
        tree = DecisionTree(0, 2, [TreeNode(is_leaf=True, label=1)])
        label, path = predict_tree(tree, np.array([0.4]))
        assert label == 1 and path == [0]

    def test_path_consistent_with_independent_comparisons(self):
        # oracle: re-evaluate every branching decision from scratch
        for seed in range(15):
            ds = random_dataset(seed, n=200, d=6, c=3)
            tree = train_tree(ds, max_depth=4)
            x = np.random.default_rng(seed + 100).uniform(size=6)
            label, path = predict_tree(tree, x)
            assert path[0] == 0
            for i, nxt in zip(path, path[1:]):
                node = tree.nodes[i]
                expected = 2 * i + 1 if x[node.feature] <= node.threshold else 2 * i + 2
                assert nxt == expected
            assert tree.nodes[path[-1]].is_leaf
            assert tree.nodes[path[-1]].label == label


class TestForest:
    def test_single_tree_forest_matches_tree(self):
        ds = random_dataset(3)
        forest = train_forest(ds, ForestConfig(num_trees=1, max_depth=3, bootstrap=False, feature_subsample=ds.d, seed=0))
        tree = train_tree(ds, cfg=TreeConfig(max_depth=3))
        x = np.random.default_rng(0).uniform(size=ds.d)
        label, _ = predict_tree(tree, x)
        v = predict_forest(forest, x)
        assert v[label] == 1.0 and v.sum() == 1.0

    def test_vote_fractions(self):
        # 40 trees voting class 0 and 60 voting class 1 -> v = (0.4, 0.6)
        leaf0 = DecisionTree(0, 2, [TreeNode(is_leaf=True, label=0)])
        leaf1 = DecisionTree(0, 2, [TreeNode(is_leaf=True, label=1)])
        from vflinfer.models.tree import RandomForest

        forest = RandomForest(trees=[leaf0] * 40 + [leaf1] * 60, num_classes=2)
        assert np.allclose(predict_forest(forest, np.zeros(1)), [0.4, 0.6])

    def test_identical_trees_one_hot(self):
        ds = Dataset(np.random.default_rng(1).uniform(size=(30, 3)), np.full(30, 1), 2)
        forest = train_forest(ds, ForestConfig(num_trees=5, max_depth=2, seed=0))
        v = predict_forest(forest, np.array([0.5, 0.5, 0.5]))
        assert np.array_equal(v, [0.0, 1.0])

    def test_prediction_sums_to_one_in_vote_units(self):
        ds = random_dataset(4)
        forest = train_forest(ds, ForestConfig(num_trees=10, max_depth=3, seed=1))
        v = predict_forest(forest, ds.features[0])
        assert abs(v.sum() - 1.0) < 1e-12
        assert np.all(np.abs(np.round(v * 10) - v * 10) < 1e-9)  # multiples of 1/W

    def test_forest_deterministic(self):
        ds = random_dataset(5)
        fa = train_forest(ds, ForestConfig(num_trees=4, max_depth=3, seed=2))
        fb = train_forest(ds, ForestConfig(num_trees=4, max_depth=3, seed=2))
        for ta, tb in zip(fa.trees, fb.trees):
            assert ta.nodes == tb.nodes


class TestSerialization:
    def test_tree_roundtrip(self, tmp_path):
        tree = train_tree(random_dataset(6), max_depth=3)
        path = tmp_path / "tree.json"
        save_model(tree, path)
        back = load_model(path)
        assert back.nodes == tree.nodes and back.depth == tree.depth

    def test_forest_roundtrip(self):
        forest = train_forest(random_dataset(7), ForestConfig(num_trees=3, max_depth=2, seed=0))
        back = model_from_dict(model_to_dict(forest))
        for ta, tb in zip(forest.trees, back.trees):
            assert ta.nodes == tb.nodes

    def test_logreg_and_mlp_roundtrip(self, tmp_path):
        from vflinfer.linalg import Rng
        from vflinfer.models import LogRegModel, init_mlp, mlp_forward

        lr = LogRegModel(3, np.random.default_rng(0).normal(size=(3, 4)))
        back = model_from_dict(model_to_dict(lr))
        assert np.array_equal(back.weights, lr.weights)

        mlp = init_mlp([4, 6, 3], layer_norm=True, rng=Rng(1))
        path = tmp_path / "mlp.json"
        save_model(mlp, path)
        restored = load_model(path)
        x = np.random.default_rng(2).normal(size=(5, 4))
        assert np.array_equal(mlp_forward(restored, x), mlp_forward(mlp, x))
