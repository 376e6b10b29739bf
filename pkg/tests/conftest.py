import numpy as np
import pytest

from sgdc.losses import LossModel
from sgdc.models import BoxConstraint, GroupStructure, ProblemSpec


def make_spec(
    A, b, lower, upper, lambda1=1.0, lambda2=0.0, groups=None, kind="least_squares", l1_extra=0.0
):
    A = np.atleast_2d(np.asarray(A, dtype=float))
    n = A.shape[1]
    loss = LossModel(kind, A, b, l1_extra)
    box = BoxConstraint(np.broadcast_to(lower, n), np.broadcast_to(upper, n))
    if groups is None:
        groups = GroupStructure.singletons(n)
    return ProblemSpec(loss=loss, box=box, groups=groups, lambda1=lambda1, lambda2=lambda2)


@pytest.fixture
def toy_spec():
    "f = (x1 - 2)^2 + (x2 - 0.1)^2 on [0, 10]^2 with lambda1 = 1"
    return make_spec(np.eye(2), [2.0, 0.1], 0.0, 10.0)


@pytest.fixture
def line_spec():
    "f = (x - 2)^2 on [0, 10] with lambda1 = 1"
    return make_spec([[1.0]], [2.0], 0.0, 10.0)


@pytest.fixture
def zero_loss_spec():
    "f = 0 in three variables, groups {0, 1} and {2}"
    groups = GroupStructure.from_lists(3, [[0, 1], [2]], [1.0, 1.0], 1)
    return make_spec(np.zeros((1, 3)), [0.0], -10.0, 10.0, lambda1=1.0, lambda2=2.0, groups=groups)


def random_instance(seed, n=5, p=1, lambda2=None):
    """A small, well-conditioned problem; p = 2 uses an elastic-net logistic loss on R^n."""
    rng = np.random.default_rng(seed)
    lambda1 = rng.uniform(0.05, 0.5)
    if lambda2 is None:
        lambda2 = rng.uniform(0.0, 0.5)
    if p == 1:
        groups = GroupStructure.from_lists(
            n, [list(range(0, 3)), list(range(2, n)), [0, n - 1]], rng.uniform(0.5, 1.5, 3), 1
        )
        A = rng.standard_normal((4 * n, n))
        x_true = np.where(rng.random(n) < 0.5, rng.uniform(0.5, 2.0, n), 0.0)
        b = A @ x_true + 0.1 * rng.standard_normal(4 * n)
        return make_spec(A, b, -3.0, 3.0, lambda1, lambda2, groups)
    half = n // 2
    groups = GroupStructure.from_lists(n, [list(range(half)), list(range(half, n))], [1.0, 1.0], 2)
    A = rng.standard_normal((8 * n, n))
    b = np.where(A @ rng.standard_normal(n) + 0.5 * rng.standard_normal(8 * n) > 0, 1.0, -1.0)
    return make_spec(
        A, b, -np.inf, np.inf, lambda1, lambda2, groups, kind="logistic", l1_extra=0.5
    )


@pytest.fixture
def make_problem():
    return make_spec


@pytest.fixture
def random_problem():
    return random_instance
