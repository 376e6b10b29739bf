import numpy as np
import pytest

from sgdc.errors import ContractViolationError, InvalidParameterError
from sgdc.models import (
    BoxConstraint,
    GroupStructure,
    IndexVectors,
    MuSchedule,
    ProblemSpec,
    capped_theta,
    derive_relaxation,
    eval_primal,
    eval_relaxed,
    evaluate_point,
    index_vectors,
    mu_at,
    theta_subgradient,
    theta_value,
)
from sgdc.models.capped import theta_pieces


@pytest.mark.parametrize(
    "t, mu, expected", [(0.25, 0.5, 0.5), (-2.0, 0.5, 1.0), (0.0, 0.5, 0.0)]
)
def test_capped_theta(t, mu, expected):
    assert capped_theta(t, mu) == pytest.approx(expected)


def test_capped_theta_rejects_nonpositive_mu():
    with pytest.raises(InvalidParameterError):
        capped_theta(1.0, 0.0)


def test_dc_identity():
    mu = 0.7
    t = np.concatenate([np.linspace(-3, 3, 2001), [mu, -mu]])
    dc = np.abs(t) / mu - theta_pieces(t, mu).max(axis=0)
    assert np.allclose(dc, capped_theta(t, mu), atol=1e-14)


def test_box_validation():
    with pytest.raises(InvalidParameterError):
        BoxConstraint([0.5], [1.0])
    with pytest.raises(InvalidParameterError):
        BoxConstraint([0.0], [0.0])
    with pytest.raises(InvalidParameterError):
        BoxConstraint([np.nan], [1.0])


def test_box_vartheta():
    assert BoxConstraint([0.0, -2.0], [10.0, 3.0]).vartheta == 2.0
    assert BoxConstraint([0.0, -np.inf], [np.inf, 0.0]).vartheta == np.inf
    box = BoxConstraint.uniform(3, 0.0, 10.0)
    assert box.vartheta == 10.0
    assert box.is_finite and not box.is_unbounded
    assert BoxConstraint.unbounded(2).is_unbounded


def test_groups_must_cover_and_be_sorted():
    with pytest.raises(InvalidParameterError):
        GroupStructure.from_lists(3, [[0, 1]], [1.0], 1)
    with pytest.raises(InvalidParameterError):
        GroupStructure.from_lists(2, [[1, 0]], [1.0], 1)
    with pytest.raises(InvalidParameterError):
        GroupStructure.from_lists(2, [[0], []], [1.0, 1.0], 1)


def test_p2_requires_disjoint_groups():
    with pytest.raises(InvalidParameterError):
        GroupStructure.from_lists(3, [[0, 1], [1, 2]], [1.0, 1.0], 2)
    assert GroupStructure.from_lists(3, [[0, 1], [2]], [1.0, 1.0], 2).disjoint


def test_overlap_aware_column_weights():
    groups = GroupStructure.from_lists(3, [[0, 1], [1, 2]], [1.0, 2.0], 1)
    assert groups.column_weights.tolist() == [1.0, 3.0, 2.0]
    assert not groups.disjoint
    assert groups.norms(np.array([1.0, -2.0, 3.0])).tolist() == [3.0, 5.0]


def test_problem_dimensions_must_agree(make_problem):
    spec = make_problem(np.eye(2), [0.0, 0.0], 0.0, 1.0)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(spec.loss, BoxConstraint.uniform(3, 0.0, 1.0), spec.groups, 1.0)
    with pytest.raises(InvalidParameterError):
        ProblemSpec(spec.loss, spec.box, spec.groups, -1.0)


def test_index_vectors_case_split():
    groups = GroupStructure.singletons(3)
    iv = index_vectors(np.array([0.2, -0.7, 0.5]), 0.5, groups)
    assert iv.I.tolist() == [1, 3, 2]


def test_index_vector_ties_resolve_to_larger_index():
    iv = index_vectors(np.array([0.5, -0.5]), 0.5, GroupStructure.singletons(2))
    assert iv.I.tolist() == [2, 3]
    assert iv.J.tolist() == [2, 2]


def test_group_index_vector():
    groups = GroupStructure.from_lists(2, [[0, 1]], [1.0], 1)
    iv = index_vectors(np.array([0.3, 0.3]), 0.5, groups)
    assert iv.I.tolist() == [1, 1]
    assert iv.J.tolist() == [2]


def test_subgradient_examples(make_problem):
    spec = make_problem([[1.0]], [0.0], -10.0, 10.0, lambda1=1.0)
    for x, expected in ((0.2, 0.0), (0.7, 2.0)):
        x = np.array([x])
        iv = index_vectors(x, 0.5, spec.groups)
        assert theta_subgradient(x, 0.5, iv, spec) == pytest.approx([expected])

    groups = GroupStructure.from_lists(2, [[0, 1]], [1.0], 2)
    spec = make_problem(np.eye(2), [0.0, 0.0], -np.inf, np.inf, 0.0, 1.0, groups)
    x = np.array([0.6, 0.8])
    iv = index_vectors(x, 0.5, groups)
    assert theta_subgradient(x, 0.5, iv, spec) == pytest.approx([1.2, 1.6])


def test_subgradient_rejects_inconsistent_index_vectors(make_problem):
    spec = make_problem([[1.0]], [0.0], -10.0, 10.0)
    iv = IndexVectors(I=np.array([2], dtype=np.int8), J=np.array([1], dtype=np.int8))
    with pytest.raises(ContractViolationError):
        theta_subgradient(np.array([0.1]), 0.5, iv, spec)


@pytest.mark.parametrize("p", [1, 2])
def test_subgradient_inequality(make_problem, p):
    rng = np.random.default_rng(p)
    n = 6
    if p == 1:
        groups = GroupStructure.from_lists(n, [[0, 1, 2], [2, 3], [3, 4, 5]], [1.0, 0.5, 2.0], 1)
    else:
        groups = GroupStructure.from_lists(n, [[0, 1, 2], [3, 4, 5]], [1.0, 2.0], 2)
    spec = make_problem(np.eye(n), np.zeros(n), -np.inf, np.inf, 0.7, 0.4, groups)
    mu = 0.8
    for _ in range(1000):
        x = rng.normal(scale=1.5, size=n)
        y = rng.normal(scale=1.5, size=n)
        iv = index_vectors(x, mu, groups)
        xi = theta_subgradient(x, mu, iv, spec)
        lhs = theta_value(y, mu, iv, spec)
        rhs = theta_value(x, mu, iv, spec) + xi @ (y - x)
        assert lhs >= rhs - 1e-10


def test_eval_primal_examples(zero_loss_spec, make_problem):
    x = np.array([0.0, 0.0, 3.0])
    assert eval_primal(zero_loss_spec, x) == 3.0
    spec = make_problem(np.zeros((1, 3)), [0.0], -10.0, 10.0)
    assert eval_primal(spec, x) == 1.0
    assert eval_primal(spec, np.zeros(3)) == 0.0


def test_relaxation_minorizes_primal(zero_loss_spec):
    rng = np.random.default_rng(0)
    nu = 0.3
    for _ in range(200):
        x = rng.normal(size=3) * (rng.random(3) < 0.6)
        point = evaluate_point(zero_loss_spec, x)
        assert point.relaxed(zero_loss_spec, nu) <= point.primal(zero_loss_spec) + 1e-12
        if ((x == 0) | (np.abs(x) >= nu)).all():
            assert point.relaxed(zero_loss_spec, nu) == pytest.approx(point.primal(zero_loss_spec))


def test_relaxed_value_at_several_mu(toy_spec):
    rp = derive_relaxation(toy_spec)
    x = np.array([2.0, 0.01])
    point = evaluate_point(toy_spec, x)
    for mu in (5.0, 1.0, rp.nu):
        expected = 0.0081 + min(2.0 / mu, 1.0) + min(0.01 / mu, 1.0)
        assert point.relaxed(toy_spec, mu) == pytest.approx(expected)
    assert eval_relaxed(toy_spec, rp, x) == pytest.approx(point.relaxed(toy_spec, rp.nu))


@pytest.mark.parametrize(
    "M, k, expected", [(5.0, 0, 5.0), (5.0, 1000, 0.01), (0.0, 0, 0.01), (5.0, 5, 4.0)]
)
def test_mu_at(M, k, expected):
    assert mu_at(MuSchedule(M=M, step_divisor=5.0, nu=0.01), k) == pytest.approx(expected)


def test_schedule_is_nonincreasing_and_pinned():
    schedule = MuSchedule(M=5.0, step_divisor=5.0, nu=0.01)
    values = [schedule.mu_at(k) for k in range(60)]
    assert all(a >= b for a, b in zip(values, values[1:]))
    K = schedule.continuation_end
    assert K == 25
    assert all(v == 0.01 for v in values[K:])
    assert values[K - 1] > 0.01


def test_derived_nu(toy_spec):
    rp = derive_relaxation(toy_spec)
    assert rp.Lf == pytest.approx(24.0)
    assert rp.nu == pytest.approx(0.99 / 24.0)
    assert rp.nu < rp.nu_bound


def test_relaxation_requires_positive_lambda1(make_problem):
    spec = make_problem(np.eye(2), [1.0, 1.0], 0.0, 10.0, lambda1=0.0)
    with pytest.raises(InvalidParameterError):
        derive_relaxation(spec)


def test_explicit_nu_must_respect_bound(toy_spec):
    with pytest.raises(InvalidParameterError):
        derive_relaxation(toy_spec, nu=1.0)
