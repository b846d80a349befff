import numpy as np
import pytest

from vflinfer.attacks import esa, esa_batch, esa_problem
from vflinfer.errors import DegenerateProblemError
from vflinfer.linalg import Rng
from vflinfer.models import LogRegModel, predict_logreg, predict_logreg_batch
from vflinfer.partition import VerticalPartition, sample_partition

THETA_3x4 = np.array(
    [
        [0.08, 0.0002, 0.0005, 0.09],
        [0.06, 0.0005, 0.0002, 0.08],
        [0.01, 0.0001, 0.0004, 0.05],
    ]
)


def test_three_class_worked_example():
    model = LogRegModel(3, THETA_3x4)
    part = VerticalPartition(4, (0, 1), (2, 3))
    x_adv = np.array([25.0, 2000.0])
    v = np.array([0.867, 0.084, 0.049])
    log_ratios = np.log(v[:-1]) - np.log(v[1:])
    assert abs(log_ratios[0] - 2.334) < 1e-3
    assert abs(log_ratios[1] - 0.539) < 1e-3
    inferred = esa(model, part, x_adv, v)
    expected = np.array([8011.8, 3.046])
    assert np.max(np.abs(inferred - expected) / np.abs(expected)) < 0.01


def test_single_unknown_binary_is_exact():
    rng = np.random.default_rng(0)
    for _ in range(20):
        weights = rng.normal(size=(1, 4))
        model = LogRegModel(2, weights)
        part = VerticalPartition(4, (0, 1, 2), (3,))
        x = rng.normal(size=4)
        v = predict_logreg(model, x)
        inferred = esa(model, part, x[:3], v)
        assert abs(inferred[0] - x[3]) < 1e-9


def test_underdetermined_matches_ridge_limit():
    # minimum-norm least squares == ridge solution in the lambda -> 0 limit
    rng = np.random.default_rng(1)
    model = LogRegModel(4, rng.normal(size=(4, 10)))
    part = VerticalPartition(10, tuple(range(4)), tuple(range(4, 10)))  # d_target 6 > c-1
    x = rng.uniform(size=10)
    v = predict_logreg(model, x)
    problem = esa_problem(model, part, x[:4], v)
    inferred = esa(model, part, x[:4], v)
    theta, a = problem.theta_target_diff, problem.rhs

    def ridge(lam):
        return np.linalg.solve(theta.T @ theta + lam * np.eye(6), theta.T @ a)

    # shrinking lambda walks the ridge solution onto the pseudo-inverse one
    assert np.max(np.abs(inferred - ridge(1e-4))) > np.max(np.abs(inferred - ridge(1e-8)))
    assert np.max(np.abs(inferred - ridge(1e-8))) < 1e-6


def test_exact_recovery_when_enough_classes():
    # full-rank systems with d_target <= c-1 recover the truth exactly
    rng = np.random.default_rng(2)
    for trial in range(30):
        c, d = 11, 12
        model = LogRegModel(c, rng.normal(size=(c, d)))
        d_target = int(rng.integers(1, 11))
        part = sample_partition(d, d_target / d, Rng(trial))
        if part.d_target > 10:
            continue
        x = rng.uniform(size=d)
        v = predict_logreg(model, x)
        x_adv, x_target = part.split(x)
        inferred = esa(model, part, x_adv, v)
        assert float(np.mean((inferred - x_target) ** 2)) < 1e-10


def test_minimum_norm_never_exceeds_truth():
    # with exact scores the estimate is a projection of the truth
    rng = np.random.default_rng(3)
    for _ in range(50):
        c, d = 4, 9
        model = LogRegModel(c, rng.normal(size=(c, d)))
        part = VerticalPartition(d, tuple(range(4)), tuple(range(4, 9)))
        x = rng.uniform(size=d)
        v = predict_logreg(model, x)
        x_adv, x_target = part.split(x)
        inferred = esa(model, part, x_adv, v)
        assert np.linalg.norm(inferred) <= np.linalg.norm(x_target) + 1e-9


def test_all_zero_target_weights_degenerate():
    weights = np.array([[1.0, 2.0, 0.0], [0.5, -1.0, 0.0], [0.1, 0.4, 0.0]])
    model = LogRegModel(3, weights)
    part = VerticalPartition(3, (0, 1), (2,))
    with pytest.raises(DegenerateProblemError):
        esa(model, part, np.array([1.0, 1.0]), np.array([0.5, 0.3, 0.2]))


def test_clamped_scores_stay_finite():
    model = LogRegModel(2, np.array([[0.5, 0.5]]))
    part = VerticalPartition(2, (0,), (1,))
    inferred = esa(model, part, np.array([1.0]), np.array([0.0, 1.0]))
    assert np.all(np.isfinite(inferred))


def test_batch_matches_per_sample():
    rng = np.random.default_rng(4)
    model = LogRegModel(5, rng.normal(size=(5, 8)))
    part = VerticalPartition(8, (0, 2, 4, 6), (1, 3, 5, 7))
    xs = rng.uniform(size=(12, 8))
    vs = predict_logreg_batch(model, xs)
    x_adv_rows, _ = part.split(xs)
    batch = esa_batch(model, part, x_adv_rows, vs)
    for i in range(12):
        single = esa(model, part, x_adv_rows[i], vs[i])
        assert np.max(np.abs(batch[i] - single)) < 1e-12
