import numpy as np
import pytest

from vflinfer.attacks import esa
from vflinfer.errors import InputError, ShapeError
from vflinfer.linalg import Rng
from vflinfer.metrics import (
    cbr,
    corr_adv,
    corr_v,
    feature_correlation_profile,
    mse_per_feature,
    mse_upper_bound,
    pearson,
)
from vflinfer.models import LogRegModel, predict_logreg
from vflinfer.models.tree import DecisionTree, TreeNode
from vflinfer.partition import VerticalPartition, sample_partition


def leaf(label):
    return TreeNode(is_leaf=True, label=label)


def internal(feature, threshold):
    return TreeNode(is_leaf=False, feature=feature, threshold=threshold)


class TestMse:
    def test_perfect_inference(self):
        truth = np.random.default_rng(0).uniform(size=(5, 3))
        assert mse_per_feature(truth.copy(), truth).mse == 0.0

    def test_hand_value(self):
        score = mse_per_feature(np.array([[0.5]]), np.array([[0.3]]))
        assert abs(score.mse - 0.04) < 1e-15

    def test_against_double_loop(self):
        rng = np.random.default_rng(1)
        inferred = rng.normal(size=(7, 4))
        truth = rng.normal(size=(7, 4))
        total = 0.0
        for t in range(7):
            for i in range(4):
                total += (inferred[t, i] - truth[t, i]) ** 2
        expected = total / (7 * 4)
        score = mse_per_feature(inferred, truth)
        assert abs(score.mse - expected) < 1e-12
        assert np.allclose(score.per_feature_mse.mean(), score.mse, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeError):
            mse_per_feature(np.ones((2, 2)), np.ones((3, 2)))


class TestCbr:
    def half_tree(self):
        # every split is on a target feature at threshold 0.5
        nodes = [internal(1, 0.5), internal(2, 0.5), internal(2, 0.5)] + [leaf(i % 2) for i in range(4)]
        return DecisionTree(depth=2, num_classes=2, nodes=nodes)

    def test_exact_inference_scores_one(self):
        part = VerticalPartition(3, (0,), (1, 2))
        truth = np.random.default_rng(0).uniform(size=(50, 3))
        assert cbr(self.half_tree(), part, truth[:, 1:], truth) == 1.0

    def test_mirrored_inference_scores_zero(self):
        part = VerticalPartition(3, (0,), (1, 2))
        truth = np.random.default_rng(1).uniform(size=(50, 3))
        mirrored = 1.0 - truth[:, 1:]  # flips every comparison at 0.5
        assert cbr(self.half_tree(), part, mirrored, truth) == 0.0

    def test_random_guess_near_half(self):
        part = VerticalPartition(3, (0,), (1, 2))
        rng = np.random.default_rng(2)
        truth = rng.uniform(size=(5000, 3))
        guess = rng.uniform(size=(5000, 2))
        rate = cbr(self.half_tree(), part, guess, truth)  # 10^4 comparisons
        assert abs(rate - 0.5) < 0.03

    def test_no_target_nodes_returns_absent(self):
        nodes = [internal(0, 0.5), leaf(0), leaf(1)]
        tree = DecisionTree(depth=1, num_classes=2, nodes=nodes)
        part = VerticalPartition(2, (0,), (1,))
        truth = np.random.default_rng(3).uniform(size=(10, 2))
        assert cbr(tree, part, truth[:, 1:], truth) is None

    def test_invariant_to_class_relabeling(self):
        part = VerticalPartition(3, (0,), (1, 2))
        rng = np.random.default_rng(4)
        truth = rng.uniform(size=(100, 3))
        guess = rng.uniform(size=(100, 2))
        tree = self.half_tree()
        relabeled = DecisionTree(
            tree.depth,
            tree.num_classes,
            [leaf(1 - n.label) if n.is_leaf else n for n in tree.nodes],
        )
        assert cbr(tree, part, guess, truth) == cbr(relabeled, part, guess, truth)


class TestUpperBound:
    def test_extremes(self):
        assert mse_upper_bound(np.ones((3, 2))) == 2.0
        assert mse_upper_bound(np.zeros((3, 2))) == 0.0

    def test_requires_normalized_input(self):
        with pytest.raises(InputError):
            mse_upper_bound(np.array([[1.5]]))
        with pytest.raises(InputError):
            mse_upper_bound(np.array([[-0.1]]))

    def test_bounds_pseudo_inverse_solutions(self):
        # with exact scores the estimate is a projection of the truth, so
        # its error can never exceed the analytic ceiling
        rng = np.random.default_rng(5)
        for trial in range(40):
            c, d = int(rng.integers(3, 6)), int(rng.integers(6, 12))
            model = LogRegModel(c, rng.normal(size=(c, d)))
            part = sample_partition(d, 0.6, Rng(trial))
            x = rng.uniform(size=d)
            v = predict_logreg(model, x)
            x_adv, x_target = part.split(x)
            inferred = esa(model, part, x_adv, v)
            measured = float(np.mean((inferred - x_target) ** 2))
            assert measured <= mse_upper_bound(x_target[None, :]) + 1e-12


class TestPearson:
    def test_anti_correlation(self):
        a = np.random.default_rng(6).normal(size=100)
        assert abs(pearson(a, -a) + 1.0) < 1e-12

    def test_symmetry_and_affine(self):
        rng = np.random.default_rng(7)
        a, b = rng.normal(size=50), rng.normal(size=50)
        assert pearson(a, b) == pytest.approx(pearson(b, a), abs=1e-12)
        assert pearson(a, 3.0 * a + 2.0) == pytest.approx(1.0, abs=1e-12)
        assert pearson(a, -0.5 * a + 1.0) == pytest.approx(-1.0, abs=1e-12)

    def test_independent_columns_weakly_correlated(self):
        rng = np.random.default_rng(8)
        assert abs(pearson(rng.normal(size=10_000), rng.normal(size=10_000))) < 0.05

    def test_zero_variance_warns_and_returns_zero(self):
        with pytest.warns(RuntimeWarning):
            assert pearson(np.ones(10), np.arange(10.0)) == 0.0


class TestAggregateCorrelations:
    def test_self_correlation_included(self):
        rng = np.random.default_rng(9)
        adv = rng.normal(size=(200, 3))
        target = adv[:, 1].copy()
        # one of the three |r| terms is exactly 1
        assert corr_adv(adv, target) >= 1.0 / 3.0

    def test_corr_v_averages_over_classes(self):
        rng = np.random.default_rng(10)
        v_cols = rng.uniform(size=(300, 4))
        target = v_cols[:, 0] * 2.0
        assert corr_v(v_cols, target) >= 1.0 / 4.0

    def test_profile_shape(self):
        rng = np.random.default_rng(11)
        adv = rng.normal(size=(100, 2))
        v_cols = rng.uniform(size=(100, 3))
        truth = rng.uniform(size=(100, 4))
        inferred = rng.uniform(size=(100, 4))
        profile = feature_correlation_profile(adv, v_cols, inferred, truth)
        assert len(profile) == 4
        assert all(len(entry) == 3 for entry in profile)
