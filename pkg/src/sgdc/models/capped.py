"""Capped-l1 machinery: the relaxation min(|t|/mu, 1) written as a DC function.

For mu > 0 the capped term is |t|/mu - max_i theta_i(t; mu) with
theta_1 = 0, theta_2 = t/mu - 1 and theta_3 = -t/mu - 1 (the group version uses
theta_1, theta_2 on the group norm). Fixing the active pieces through index
vectors (I, J) gives the convex function Theta_{I,J} that the solvers linearize.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from sgdc.errors import ContractViolationError, InvalidParameterError
from sgdc.losses import eval_loss
from sgdc.models.groups import GroupStructure
from sgdc.models.problem import ProblemSpec

# s(1) = 0, s(2) = +1, s(3) = -1
_PIECE_SLOPES = np.array([0.0, 0.0, 1.0, -1.0])


def _check_mu(mu: float):
    if not mu > 0:
        raise InvalidParameterError(f"mu must be positive, got {mu}")


def capped_theta(t, mu: float):
    "min(|t|/mu, 1), elementwise"
    _check_mu(mu)
    return np.minimum(np.abs(t) / mu, 1.0)


def theta_pieces(t, mu: float) -> np.ndarray:
    "The three affine pieces theta_1..theta_3 stacked on a leading axis"
    _check_mu(mu)
    t = np.asarray(t, dtype=float)
    return np.stack([np.zeros_like(t), t / mu - 1.0, -t / mu - 1.0])


@dataclass(frozen=True, eq=False)
class IndexVectors:
    "I in {1,2,3}^n selects coordinate pieces, J in {1,2}^L selects group pieces"

    I: np.ndarray
    J: np.ndarray


def index_vectors(x: np.ndarray, mu: float, groups: GroupStructure) -> IndexVectors:
    """Largest index of an active piece; ties at |x_j| = mu resolve to 2 or 3."""
    _check_mu(mu)
    I = np.ones(x.size, dtype=np.int8)
    I[x >= mu] = 2
    I[x <= -mu] = 3
    J = np.where(groups.norms(x) >= mu, 2, 1).astype(np.int8)
    return IndexVectors(I=I, J=J)


def _check_consistent(x: np.ndarray, mu: float, iv: IndexVectors, groups: GroupStructure):
    norms = groups.norms(x)
    if iv.I.size != x.size or iv.J.size != groups.count:
        raise ContractViolationError("Index vectors do not match the problem dimensions")
    consistent = (
        np.all(x[iv.I == 2] >= mu)
        and np.all(x[iv.I == 3] <= -mu)
        and np.all(np.abs(x[iv.I == 1]) < mu)
        and np.all(norms[iv.J == 2] >= mu)
        and np.all(norms[iv.J == 1] < mu)
    )
    if not consistent:
        raise ContractViolationError(f"Index vectors are inconsistent with x at mu={mu}")


def theta_value(x: np.ndarray, mu: float, iv: IndexVectors, spec: ProblemSpec) -> float:
    "Theta_{I,J}(x; mu), a convex function of x for fixed (I, J)"
    _check_mu(mu)
    coordinate = theta_pieces(x, mu)[iv.I - 1, np.arange(x.size)]
    group_norms = spec.groups.norms(x)
    group = np.where(iv.J == 2, group_norms / mu - 1.0, 0.0)
    return float(
        spec.lambda1 * coordinate.sum() + spec.lambda2 * (spec.groups.weights @ group)
    )


def theta_subgradient(
    x: np.ndarray, mu: float, iv: IndexVectors, spec: ProblemSpec
) -> np.ndarray:
    """A deterministic element xi of the subdifferential of Theta_{I,J}(.; mu) at x.

    For p = 1 groups the sign of a zero coordinate is taken as 0.
    """
    _check_mu(mu)
    groups = spec.groups
    _check_consistent(x, mu, iv, groups)
    xi = spec.lambda1 * _PIECE_SLOPES[iv.I] / mu
    if spec.lambda2 == 0 or groups.count == 0:
        return xi
    coef = np.where(iv.J == 2, spec.lambda2 * groups.weights / mu, 0.0)
    values = x[groups.members]
    if groups.p == 1:
        direction = np.sign(values)
    else:
        norms = groups.norms(x)
        # J_l = 2 implies a group norm of at least mu > 0
        safe = np.where(iv.J == 2, norms, 1.0)
        direction = values / safe[groups.owners]
    return xi + groups.scatter(coef[groups.owners] * direction)


@dataclass(frozen=True, eq=False)
class EvaluatedPoint:
    """An iterate together with the quantities F(x; mu) needs for any mu.

    Re-evaluating the relaxed objective at another mu costs O(n + L) and never
    touches the loss again.
    """

    x: np.ndarray
    loss: float
    abs_x: np.ndarray
    group_norms: np.ndarray

    def relaxed(self, spec: ProblemSpec, mu: float) -> float:
        _check_mu(mu)
        value = self.loss + spec.lambda1 * float(np.minimum(self.abs_x / mu, 1.0).sum())
        if spec.lambda2:
            capped = np.minimum(self.group_norms / mu, 1.0)
            value += spec.lambda2 * float(spec.groups.weights @ capped)
        return value

    def primal(self, spec: ProblemSpec) -> float:
        value = self.loss + spec.lambda1 * float(np.count_nonzero(self.abs_x))
        if spec.lambda2:
            active = (self.group_norms != 0).astype(float)
            value += spec.lambda2 * float(spec.groups.weights @ active)
        return value

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.abs_x)


def evaluate_point(spec: ProblemSpec, x: np.ndarray) -> EvaluatedPoint:
    x = np.asarray(x, dtype=float)
    return EvaluatedPoint(
        x=x,
        loss=eval_loss(spec.loss, x),
        abs_x=np.abs(x),
        group_norms=spec.groups.norms(x),
    )


def eval_primal(spec: ProblemSpec, x: np.ndarray) -> float:
    "F_0(x), with exact zero tests"
    return evaluate_point(spec, x).primal(spec)


def eval_relaxed(spec: ProblemSpec, rp, x: np.ndarray, mu: float | None = None) -> float:
    "F(x; mu) through the capped identity; mu defaults to rp.nu"
    if mu is None:
        mu = rp.nu
    return evaluate_point(spec, x).relaxed(spec, mu)
