"""Closed-form solutions of the per-iteration subproblem

    argmin_{x in box}  fbar_n(x; mu) + (alpha/2) ||x - z||^2,

where fbar_n(x; mu) = l1_extra ||x||_1 + (lambda1/mu) ||x||_1
+ (lambda2/mu) sum_l w_l ||x_(l)||_p. Thresholded coordinates are exact zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from sgdc.errors import (
    InvalidParameterError,
    OracleRefusedError,
    UnsupportedConfigurationError,
    WrongDispatchError,
)
from sgdc.models.problem import ProblemSpec

ORACLE_MAX_DIMENSION = 4


@dataclass(frozen=True, eq=False)
class ProxRequest:
    z: np.ndarray
    alpha: float
    mu: float
    spec: ProblemSpec

    def __post_init__(self):
        if not self.alpha > 0:
            raise InvalidParameterError(f"alpha must be positive, got {self.alpha}")
        if not self.mu > 0:
            raise InvalidParameterError(f"mu must be positive, got {self.mu}")


def _soft_threshold(z: np.ndarray, tau) -> np.ndarray:
    return np.where(np.abs(z) > tau, np.sign(z) * (np.abs(z) - tau), 0.0)


def prox_p1_box(req: ProxRequest) -> np.ndarray:
    """Componentwise shrink by tau_j = lambda_bar_j/(mu alpha) + l1_extra/alpha, then clip."""
    spec = req.spec
    if spec.groups.p != 1:
        raise WrongDispatchError("prox_p1_box handles p = 1 only")
    z = req.z
    tau = spec.lambda_bar / (req.mu * req.alpha) + spec.loss.l1_extra / req.alpha
    shrunk = np.clip(np.sign(z) * (np.abs(z) - tau), spec.box.lower, spec.box.upper)
    return np.where(np.abs(z) > tau, shrunk, 0.0)


def prox_p2_disjoint(req: ProxRequest) -> np.ndarray:
    """Elementwise soft threshold at lambda1/(mu alpha), then a per-group radial shrink."""
    spec = req.spec
    groups = spec.groups
    if groups.p != 2:
        raise WrongDispatchError("prox_p2_disjoint handles p = 2 only")
    if not groups.disjoint:
        raise UnsupportedConfigurationError("p = 2 needs disjoint groups")
    if not spec.box.is_unbounded:
        raise UnsupportedConfigurationError("p = 2 has no closed form on a finite box")
    scale = req.mu * req.alpha
    stage = _soft_threshold(req.z, spec.lambda1 / scale + spec.loss.l1_extra / req.alpha)
    if groups.count == 0:
        return stage
    norms = groups.norms(stage)
    thresholds = spec.lambda2 * groups.weights / scale
    keep = norms > thresholds
    factor = np.where(keep, 1.0 - thresholds / np.where(keep, norms, 1.0), 0.0)
    member_factor = factor[groups.owners]
    out = np.zeros_like(stage)
    out[groups.members] = np.where(
        member_factor > 0, stage[groups.members] * member_factor, 0.0
    )
    return out


def solve_subproblem(req: ProxRequest) -> np.ndarray:
    if req.spec.groups.p == 1:
        return prox_p1_box(req)
    return prox_p2_disjoint(req)


def subproblem_objective(req: ProxRequest, x: np.ndarray) -> float:
    spec = req.spec
    abs_sum = float(np.abs(x).sum())
    value = (spec.loss.l1_extra + spec.lambda1 / req.mu) * abs_sum
    if spec.lambda2 and spec.groups.count:
        value += spec.lambda2 / req.mu * float(spec.groups.weights @ spec.groups.norms(x))
    diff = x - req.z
    return value + 0.5 * req.alpha * float(diff @ diff)


def _line_minimum(fun, lo: float, hi: float, tol: float, start: float | None = None) -> float:
    "Bounded Brent search on [lo, hi], checked against the endpoints, 0 and `start`"
    result = minimize_scalar(
        fun, bounds=(lo, hi), method="bounded", options={"xatol": tol, "maxiter": 2_000}
    )
    candidates = [lo, hi, float(result.x)]
    if lo <= 0.0 <= hi:
        candidates.append(0.0)
    if start is not None and lo <= start <= hi:
        candidates.append(start)
    return min(candidates, key=fun)


def _objective_batch(req: ProxRequest, points: np.ndarray) -> np.ndarray:
    "subproblem_objective over the rows of `points`"
    spec = req.spec
    values = (spec.loss.l1_extra + spec.lambda1 / req.mu) * np.abs(points).sum(axis=1)
    if spec.lambda2 and spec.groups.count:
        incidence = np.zeros((spec.groups.count, spec.n))
        incidence[spec.groups.owners, spec.groups.members] = 1.0
        if spec.groups.p == 1:
            norms = np.abs(points) @ incidence.T
        else:
            norms = np.sqrt(points**2 @ incidence.T)
        values += spec.lambda2 / req.mu * (norms @ spec.groups.weights)
    return values + 0.5 * req.alpha * ((points - req.z) ** 2).sum(axis=1)


def _radial_step(req, x, members, lo, hi, tol):
    "Rescale x_(l) along its own direction"
    block = x[members].copy()
    if not block.any():
        return
    with np.errstate(divide="ignore", invalid="ignore"):
        limits = np.where(block > 0, hi[members] / block, lo[members] / block)
    s_hi = float(np.min(limits[block != 0]))
    if s_hi <= 0:
        return

    def along(s):
        x[members] = s * block
        return subproblem_objective(req, x)

    x[members] = _line_minimum(along, 0.0, s_hi, tol, start=1.0) * block


def prox_oracle(
    req: ProxRequest,
    grid_density: int = 11,
    tol: float = 1e-8,
    max_sweeps: int = 2_000,
) -> np.ndarray:
    """Brute-force minimizer of the subproblem for tiny n.

    Starts from the best point of a coarse grid, then runs bounded scalar
    coordinate descent, with a radial rescaling of every group, until a sweep
    moves no coordinate by more than tol or stops lowering the objective.
    Coordinate j is searched between 0 and z_j (the minimizer never
    overshoots z_j) intersected with the box.
    """
    spec = req.spec
    n = spec.n
    if n > ORACLE_MAX_DIMENSION:
        raise OracleRefusedError(
            f"prox_oracle handles n <= {ORACLE_MAX_DIMENSION}, got n = {n}"
        )
    if grid_density < 2:
        raise InvalidParameterError("grid_density must be at least 2")
    if n == 0:
        return np.zeros(0)
    z = np.asarray(req.z, dtype=float)
    lo = np.maximum(spec.box.lower, np.minimum(z, 0.0))
    hi = np.minimum(spec.box.upper, np.maximum(z, 0.0))

    axes = [
        np.unique(np.append(np.linspace(lo[j], hi[j], grid_density), 0.0))
        for j in range(n)
    ]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
    x = mesh[np.argmin(_objective_batch(req, mesh))].copy()

    value = subproblem_objective(req, x)
    for _ in range(max_sweeps):
        previous, previous_value = x.copy(), value
        for j in range(n):
            if hi[j] <= lo[j]:
                x[j] = lo[j]
                continue

            def along(t, j=j):
                x[j] = t
                return subproblem_objective(req, x)

            x[j] = _line_minimum(along, lo[j], hi[j], tol * 1e-3, start=x[j])
        for members in spec.groups.groups:
            _radial_step(req, x, members, lo, hi, tol * 1e-3)
        value = subproblem_objective(req, x)
        # bounded searches cannot resolve below sqrt(eps), so a stalled objective also stops
        stalled = previous_value - value <= 4 * np.finfo(float).eps * max(1.0, abs(value))
        if np.abs(x - previous).max() <= tol or stalled:
            break
    return x
