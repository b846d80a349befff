import numpy as np
import pytest

from vflinfer.data import Dataset
from vflinfer.errors import InputError, ShapeError
from vflinfer.models import (
    LogRegConfig,
    LogRegModel,
    logreg_loss_and_grad,
    predict_logreg,
    predict_logreg_batch,
    train_logreg,
)

# 3-class, 4-feature weights used across the equality-solving tests
THETA_3x4 = np.array(
    [
        [0.08, 0.0002, 0.0005, 0.09],
        [0.06, 0.0005, 0.0002, 0.08],
        [0.01, 0.0001, 0.0004, 0.05],
    ]
)


class TestPredict:
    def test_zero_weights_uniform(self):
        model = LogRegModel(3, np.zeros((3, 5)))
        v = predict_logreg(model, np.array([4.0, -2.0, 0.1, 9.0, 3.0]))
        assert np.allclose(v, np.full(3, 1 / 3), atol=1e-12)

    def test_reference_three_class_scores(self):
        model = LogRegModel(3, THETA_3x4)
        v = predict_logreg(model, np.array([25.0, 2000.0, 8000.0, 3.0]))
        assert np.max(np.abs(v - np.array([0.867, 0.084, 0.049]))) < 5e-3

    def test_binary_midpoint(self):
        model = LogRegModel(2, np.array([[1.0]]))
        assert np.allclose(predict_logreg(model, np.array([0.0])), [0.5, 0.5])

    def test_confidences_sum_to_one(self):
        rng = np.random.default_rng(0)
        model = LogRegModel(4, rng.normal(size=(4, 6)))
        v = predict_logreg_batch(model, rng.normal(size=(50, 6)))
        assert np.allclose(v.sum(axis=1), 1.0, atol=1e-9)
        assert np.all(v >= 0) and np.all(v <= 1)

    def test_log_ratio_matches_weight_difference(self):
        rng = np.random.default_rng(1)
        model = LogRegModel(5, rng.normal(size=(5, 7)))
        for _ in range(20):
            x = rng.normal(size=7)
            v = predict_logreg(model, x)
            for k in range(4):
                lhs = np.log(v[k]) - np.log(v[k + 1])
                rhs = (model.weights[k] - model.weights[k + 1]) @ x
                assert abs(lhs - rhs) < 1e-9

    def test_shape_mismatch(self):
        model = LogRegModel(2, np.array([[1.0, 2.0]]))
        with pytest.raises(ShapeError):
            predict_logreg(model, np.array([1.0, 2.0, 3.0]))


class TestTrain:
    def test_zero_epochs_keeps_zero_init(self):
        ds = Dataset(np.array([[1.0, 0.0], [0.0, 1.0]]), np.array([0, 1]), 2)
        model = train_logreg(ds, LogRegConfig(epochs=0))
        assert np.array_equal(model.weights, np.zeros((1, 2)))

    def test_separable_points_reach_full_accuracy(self):
        ds = Dataset(np.array([[1.0, -1.0], [-1.0, 1.0]]), np.array([0, 1]), 2)
        model = train_logreg(ds, LogRegConfig(lr=0.5, epochs=500, batch=2, seed=0))
        v = predict_logreg_batch(model, ds.features)
        assert np.array_equal(np.argmax(v, axis=1), ds.labels)

    def test_empty_dataset_rejected(self):
        ds = Dataset(np.zeros((0, 3)), np.zeros(0, dtype=int), 2)
        with pytest.raises(InputError):
            train_logreg(ds, LogRegConfig())

    def test_deterministic(self):
        rng = np.random.default_rng(2)
        ds = Dataset(rng.normal(size=(60, 4)), rng.integers(0, 3, size=60), 3)
        a = train_logreg(ds, LogRegConfig(epochs=5, seed=7))
        b = train_logreg(ds, LogRegConfig(epochs=5, seed=7))
        assert np.array_equal(a.weights, b.weights)

    @pytest.mark.parametrize("c", [2, 4])
    def test_gradient_matches_finite_differences(self, c):
        rng = np.random.default_rng(3)
        rows = 1 if c == 2 else c
        model = LogRegModel(c, rng.normal(scale=0.5, size=(rows, 5)))
        x = rng.normal(size=(8, 5))
        y = rng.integers(0, c, size=8)
        _, grad = logreg_loss_and_grad(model, x, y)
        h = 1e-6
        for i in range(rows):
            for j in range(5):
                bumped = model.weights.copy()
                bumped[i, j] += h
                up, _ = logreg_loss_and_grad(LogRegModel(c, bumped), x, y)
                bumped[i, j] -= 2 * h
                down, _ = logreg_loss_and_grad(LogRegModel(c, bumped), x, y)
                numeric = (up - down) / (2 * h)
                denom = max(abs(numeric), abs(grad[i, j]), 1e-8)
                assert abs(numeric - grad[i, j]) / denom < 1e-4
