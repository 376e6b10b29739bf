import numpy as np
import pytest
import scipy.sparse as sp

from sgdc.errors import EvaluationError, InvalidParameterError, UnsupportedConfigurationError
from sgdc.losses import (
    LinearOperator,
    LossModel,
    estimate_Lf,
    eval_loss,
    grad_loss,
    smoothness_constant,
)
from sgdc.models import BoxConstraint


def _models(rng, m=6, n=4, l1_extra=0.0):
    A = rng.standard_normal((m, n))
    return [
        LossModel.least_squares(A, rng.standard_normal(m), l1_extra),
        LossModel.logistic(A, np.where(rng.random(m) < 0.5, -1.0, 1.0), l1_extra),
        LossModel.poisson(0.3 * A, rng.integers(0, 4, m), l1_extra),
    ]


def test_eval_loss_examples():
    model = LossModel.least_squares(np.eye(2), [1.0, 0.0])
    assert eval_loss(model, np.array([1.0, 0.0])) == 0.0
    assert eval_loss(model, np.zeros(2)) == 1.0
    assert eval_loss(LossModel.logistic([[1.0]], [1.0]), np.zeros(1)) == pytest.approx(np.log(2))


def test_elastic_net_term_is_added():
    model = LossModel.least_squares(np.eye(2), [1.0, 0.0], l1_extra=0.5)
    assert eval_loss(model, np.array([1.0, -2.0])) == pytest.approx(4.0 + 1.5)


def test_grad_loss_examples():
    model = LossModel.least_squares(np.eye(2), [1.0, 0.0])
    assert grad_loss(model, np.zeros(2)).tolist() == [-2.0, 0.0]
    assert grad_loss(LossModel.poisson([[1.0]], [1.0]), np.zeros(1)).tolist() == [0.0]


def test_gradients_match_finite_differences():
    rng = np.random.default_rng(1)
    for model in _models(rng):
        for _ in range(20):
            x = rng.uniform(-1.0, 1.0, model.n)
            fd = np.empty(model.n)
            for j in range(model.n):
                h = 1e-6 * (1 + abs(x[j]))
                e = np.zeros(model.n)
                e[j] = h
                fd[j] = (eval_loss(model, x + e) - eval_loss(model, x - e)) / (2 * h)
            assert np.abs(fd - grad_loss(model, x)).max() <= 1e-5


def test_poisson_overflow_names_the_row():
    model = LossModel.poisson([[1.0], [1000.0]], [0.0, 0.0])
    with pytest.raises(EvaluationError) as info:
        eval_loss(model, np.ones(1))
    assert info.value.row == 1


def test_label_validation():
    with pytest.raises(InvalidParameterError):
        LossModel.logistic([[1.0]], [0.5])
    with pytest.raises(InvalidParameterError):
        LossModel.poisson([[1.0]], [-1.0])
    with pytest.raises(InvalidParameterError):
        LossModel.least_squares(np.eye(2), [1.0])


def test_adjoint_consistency():
    rng = np.random.default_rng(2)
    dense = rng.standard_normal((7, 5))
    for A in (LinearOperator.from_matrix(dense), LinearOperator.from_matrix(sp.csr_matrix(dense))):
        for _ in range(10):
            x, y = rng.standard_normal(5), rng.standard_normal(7)
            assert A.apply(x) @ y == pytest.approx(x @ A.adjoint(y), rel=1e-10)


@pytest.mark.parametrize(
    "model, expected",
    [
        (LossModel.least_squares(np.eye(2), [0.0, 0.0]), 2.0),
        (LossModel.least_squares([[3.0]], [0.0]), 18.0),
        (LossModel.logistic([[2.0]], [1.0]), 1.0),
    ],
)
def test_smoothness_constant_examples(model, expected):
    box = BoxConstraint.uniform(model.n, -1.0, 1.0)
    assert smoothness_constant(model, box) == pytest.approx(expected, rel=1e-8)


def test_poisson_needs_a_finite_box():
    model = LossModel.poisson([[1.0]], [1.0])
    with pytest.raises(UnsupportedConfigurationError):
        smoothness_constant(model, BoxConstraint.unbounded(1))
    with pytest.raises(UnsupportedConfigurationError):
        estimate_Lf(model, BoxConstraint.unbounded(1))


def test_smoothness_constant_bounds_gradient_changes():
    rng = np.random.default_rng(3)
    box = BoxConstraint.uniform(4, -1.0, 2.0)
    for model in _models(rng):
        Ls = smoothness_constant(model, box)
        for _ in range(1000):
            x, y = rng.uniform(-1.0, 2.0, (2, 4))
            change = np.linalg.norm(grad_loss(model, x) - grad_loss(model, y))
            assert change <= Ls * np.linalg.norm(x - y) * (1 + 1e-9)


def test_Lf_reproduces_the_box_snippet():
    model = LossModel.least_squares([[1.0, -1.0], [2.0, 0.0]], [1.0, 1.0])
    assert estimate_Lf(model, BoxConstraint.uniform(2, 0.0, 10.0)) == pytest.approx(126.0)


def test_Lf_rejects_degenerate_operator():
    model = LossModel.least_squares(np.zeros((2, 2)), [0.0, 0.0])
    with pytest.raises(InvalidParameterError):
        estimate_Lf(model, BoxConstraint.uniform(2, 0.0, 10.0))


def test_logistic_Lf_is_column_sum():
    model = LossModel.logistic([[1.0], [-2.0]], [1.0, -1.0])
    assert estimate_Lf(model, BoxConstraint.unbounded(1)) >= 3.0


def test_Lf_bounds_gradients_on_the_box():
    rng = np.random.default_rng(4)
    for lower in (0.0, -1.0):
        box = BoxConstraint.uniform(4, lower, 2.0)
        for model in _models(rng, l1_extra=0.25):
            Lf = estimate_Lf(model, box)
            for _ in range(1000):
                x = rng.uniform(lower, 2.0, 4)
                subgradient = grad_loss(model, x) + 0.25 * np.sign(x)
                assert np.abs(subgradient).max() <= Lf * (1 + 1e-12)


def test_least_squares_Lf_on_unbounded_box_is_unsupported():
    model = LossModel.least_squares(np.eye(2), [1.0, 1.0])
    with pytest.raises(UnsupportedConfigurationError):
        estimate_Lf(model, BoxConstraint.unbounded(2))


def test_losses_are_convex_along_segments():
    rng = np.random.default_rng(5)
    for model in _models(rng):
        for _ in range(200):
            x, y = rng.uniform(-1.0, 1.0, (2, model.n))
            mid = eval_loss(model, (x + y) / 2)
            assert mid <= (eval_loss(model, x) + eval_loss(model, y)) / 2 + 1e-12
