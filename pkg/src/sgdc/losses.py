"""Smooth convex losses f_s, the optional l1 term f_n, and their constants.

All three losses act through a sensing operator A: least squares ||Ax - b||^2
(no 1/2 factor), logistic sum log(1 + exp(-b_i A_i x)) and Poisson
sum(-b_i A_i x + exp(A_i x)).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import StrEnum
from functools import cached_property
from typing import TYPE_CHECKING

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from sgdc.errors import (
    EvaluationError,
    InvalidParameterError,
    UnsupportedConfigurationError,
)

if TYPE_CHECKING:
    from sgdc.models.box import BoxConstraint

logger = logging.getLogger(__name__)

# largest argument exp() takes without overflowing a float64
MAX_EXP_ARG = float(np.log(np.finfo(float).max))
EXACT_SIGMA_DIMENSION = 2000


def _split_infinite(v: np.ndarray):
    return (
        np.where(np.isfinite(v), v, 0.0),
        np.isposinf(v).astype(float),
        np.isneginf(v).astype(float),
    )


@dataclass(frozen=True, eq=False)
class LinearOperator:
    """A sensing matrix, dense or CSR, with the elementwise sign-split views
    interval arithmetic needs."""

    matrix: np.ndarray | sp.csr_matrix

    @classmethod
    def from_matrix(cls, matrix) -> LinearOperator:
        if sp.issparse(matrix):
            return cls(sp.csr_matrix(matrix, dtype=float))
        dense = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(dense)

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def is_sparse(self) -> bool:
        return sp.issparse(self.matrix)

    def apply(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix @ x, dtype=float).reshape(-1)

    def adjoint(self, y: np.ndarray) -> np.ndarray:
        return np.asarray(self.matrix.T @ y, dtype=float).reshape(-1)

    @cached_property
    def positive(self):
        if self.is_sparse:
            return self.matrix.maximum(0).tocsr()
        return np.maximum(self.matrix, 0.0)

    @cached_property
    def negative(self):
        if self.is_sparse:
            return self.matrix.minimum(0).tocsr()
        return np.minimum(self.matrix, 0.0)

    @cached_property
    def absolute(self):
        return abs(self.matrix)

    def abs_apply(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.absolute @ v, dtype=float).reshape(-1)

    def abs_adjoint(self, v: np.ndarray) -> np.ndarray:
        return np.asarray(self.absolute.T @ v, dtype=float).reshape(-1)

    def to_dense(self) -> np.ndarray:
        return self.matrix.toarray() if self.is_sparse else np.array(self.matrix)

    def interval_apply(self, lo: np.ndarray, hi: np.ndarray, transpose: bool = False):
        """Elementwise range of A v (or A^T v) over lo <= v <= hi, with 0 * inf = 0."""
        pos, neg = self.positive, self.negative
        if transpose:
            pos, neg = pos.T, neg.T
        lo_f, lo_pinf, lo_ninf = _split_infinite(lo)
        hi_f, hi_pinf, hi_ninf = _split_infinite(hi)
        lower = np.asarray(pos @ lo_f + neg @ hi_f, dtype=float).reshape(-1)
        upper = np.asarray(pos @ hi_f + neg @ lo_f, dtype=float).reshape(-1)
        to_minus = np.asarray(pos @ lo_ninf - neg @ hi_pinf).reshape(-1) > 0
        to_plus = np.asarray(pos @ hi_pinf - neg @ lo_ninf).reshape(-1) > 0
        lower[to_minus] = -np.inf
        upper[to_plus] = np.inf
        return lower, upper

    def sigma_max(self, max_iter: int = 50, rtol: float = 1e-8, seed: int = 0) -> float:
        """Largest singular value.

        Exact for dense operators whose short side is at most
        EXACT_SIGMA_DIMENSION, power iteration on A^T A otherwise.
        """
        m, n = self.shape
        if m == 0 or n == 0:
            return 0.0
        if not self.is_sparse and min(m, n) <= EXACT_SIGMA_DIMENSION:
            return float(np.linalg.norm(self.matrix, 2))
        v = np.random.default_rng(seed).standard_normal(n)
        v /= np.linalg.norm(v)
        estimate = 0.0
        for _ in range(max_iter):
            w = self.adjoint(self.apply(v))
            norm = float(np.linalg.norm(w))
            if norm == 0.0:
                return 0.0
            v = w / norm
            if abs(norm - estimate) < rtol * norm:
                estimate = norm
                break
            estimate = norm
        return float(np.sqrt(estimate))


class LossKind(StrEnum):
    least_squares = "least_squares"
    logistic = "logistic"
    poisson = "poisson"


@dataclass(frozen=True, eq=False)
class LossModel:
    """f = f_s + l1_extra * ||x||_1 where f_s is one of the smooth losses."""

    kind: LossKind
    A: LinearOperator
    b: np.ndarray
    l1_extra: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", LossKind(self.kind))
        if not isinstance(self.A, LinearOperator):
            object.__setattr__(self, "A", LinearOperator.from_matrix(self.A))
        b = np.array(self.b, dtype=float).reshape(-1)
        if b.size != self.A.shape[0]:
            raise InvalidParameterError(
                f"Observation length {b.size} does not match operator rows {self.A.shape[0]}"
            )
        if not (self.l1_extra >= 0 and np.isfinite(self.l1_extra)):
            raise InvalidParameterError("l1_extra must be finite and nonnegative")
        if self.kind is LossKind.logistic and not np.isin(b, (-1.0, 1.0)).all():
            raise InvalidParameterError("Logistic labels must be -1 or 1")
        if self.kind is LossKind.poisson and ((b < 0).any() or (b != np.round(b)).any()):
            raise InvalidParameterError("Poisson observations must be nonnegative integers")
        b.flags.writeable = False
        object.__setattr__(self, "b", b)

    @classmethod
    def least_squares(cls, A, b, l1_extra: float = 0.0) -> LossModel:
        return cls(LossKind.least_squares, LinearOperator.from_matrix(A), b, l1_extra)

    @classmethod
    def logistic(cls, A, b, l1_extra: float = 0.0) -> LossModel:
        return cls(LossKind.logistic, LinearOperator.from_matrix(A), b, l1_extra)

    @classmethod
    def poisson(cls, A, b, l1_extra: float = 0.0) -> LossModel:
        return cls(LossKind.poisson, LinearOperator.from_matrix(A), b, l1_extra)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]


def _check_exponent(Ax: np.ndarray):
    overflow = np.flatnonzero(Ax > MAX_EXP_ARG)
    if overflow.size:
        row = int(overflow[0])
        raise EvaluationError(
            f"exp(A_i x) overflows at row {row} (A_i x = {Ax[row]:.6g})", row=row
        )


def smooth_value(model: LossModel, x: np.ndarray) -> float:
    "f_s(x)"
    Ax = model.A.apply(x)
    match model.kind:
        case LossKind.least_squares:
            r = Ax - model.b
            value = float(r @ r)
        case LossKind.logistic:
            value = float(np.logaddexp(0.0, -model.b * Ax).sum())
        case LossKind.poisson:
            _check_exponent(Ax)
            value = float((np.exp(Ax) - model.b * Ax).sum())
    if not np.isfinite(value):
        raise EvaluationError(f"The {model.kind} loss is not finite at this point")
    return value


def eval_loss(model: LossModel, x: np.ndarray) -> float:
    "f(x) = f_s(x) + l1_extra * ||x||_1"
    value = smooth_value(model, x)
    if model.l1_extra:
        value += model.l1_extra * float(np.abs(x).sum())
    return value


def grad_loss(model: LossModel, x: np.ndarray) -> np.ndarray:
    "The gradient of f_s"
    Ax = model.A.apply(x)
    match model.kind:
        case LossKind.least_squares:
            return 2.0 * model.A.adjoint(Ax - model.b)
        case LossKind.logistic:
            return model.A.adjoint(-model.b * expit(-model.b * Ax))
        case LossKind.poisson:
            _check_exponent(Ax)
            return model.A.adjoint(np.exp(Ax) - model.b)


def smoothness_constant(model: LossModel, box: BoxConstraint) -> float:
    "Ls, the Lipschitz modulus of grad f_s over the box"
    sigma = model.A.sigma_max()
    match model.kind:
        case LossKind.least_squares:
            return 2.0 * sigma**2
        case LossKind.logistic:
            return sigma**2 / 4.0
        case LossKind.poisson:
            if not box.is_finite:
                raise UnsupportedConfigurationError(
                    "The Poisson loss needs a finite box: its gradient is not "
                    "globally Lipschitz"
                )
            if model.m == 0:
                return 0.0
            _, upper = model.A.interval_apply(box.lower, box.upper)
            if upper.max() > MAX_EXP_ARG:
                raise UnsupportedConfigurationError(
                    "The box is too wide for a finite Poisson smoothness bound"
                )
            return sigma**2 * float(np.exp(upper.max()))


def _is_snippet_box(box: BoxConstraint) -> bool:
    return bool(
        box.n > 0
        and (box.lower == 0).all()
        and np.isfinite(box.upper[0])
        and (box.upper == box.upper[0]).all()
    )


def _max_abs(lower: np.ndarray, upper: np.ndarray) -> float:
    return float(np.maximum(np.abs(lower), np.abs(upper)).max())


def estimate_Lf(model: LossModel, box: BoxConstraint) -> float:
    """A bound on |[grad f_s(x)]_j + [d f_n(y)]_j| over the box.

    Least squares on [0, w]^n uses t = |A|^T |A| 1 and
    2 * max(||w t - A^T b||_inf, ||-w t - A^T b||_inf); other boxes fall back
    to interval arithmetic on the gradient.
    """
    if model.n == 0:
        raise InvalidParameterError("Lf is undefined for an empty problem")
    A = model.A
    match model.kind:
        case LossKind.least_squares:
            if _is_snippet_box(box):
                w = float(box.upper[0])
                t = A.abs_adjoint(A.abs_apply(np.ones(model.n)))
                Atb = A.adjoint(model.b)
                bound = 2.0 * max(
                    float(np.abs(w * t - Atb).max()), float(np.abs(-w * t - Atb).max())
                )
            else:
                lo, hi = A.interval_apply(box.lower, box.upper)
                g_lo, g_hi = A.interval_apply(lo - model.b, hi - model.b, transpose=True)
                bound = 2.0 * _max_abs(g_lo, g_hi)
        case LossKind.logistic:
            bound = float(A.abs_adjoint(np.ones(model.m)).max()) if model.m else 0.0
        case LossKind.poisson:
            if not box.is_finite:
                raise UnsupportedConfigurationError("The Poisson loss needs a finite box")
            lo, hi = A.interval_apply(box.lower, box.upper)
            if hi.max(initial=-np.inf) > MAX_EXP_ARG:
                raise UnsupportedConfigurationError(
                    "The box is too wide for a finite Poisson gradient bound"
                )
            g_lo, g_hi = A.interval_apply(
                np.exp(lo) - model.b, np.exp(hi) - model.b, transpose=True
            )
            bound = _max_abs(g_lo, g_hi)
    if not np.isfinite(bound):
        raise UnsupportedConfigurationError(
            f"The {model.kind} gradient is unbounded on this box"
        )
    bound += model.l1_extra
    if bound <= 0:
        raise InvalidParameterError("Lf = 0: nu = lambda1 / Lf would be undefined")
    logger.debug("Estimated Lf = %.6g for the %s loss", bound, model.kind)
    return bound
