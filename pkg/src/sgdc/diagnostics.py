"""Certification of solver outputs and post-hoc checks of solver mechanics.

A point with the nu-lower-bound property whose gradient vanishes on its
support (up to the box normal cone) is an sw-d-stationary point of the relaxed
problem, and therefore a nu-strong local minimizer of the l0 problem.
"""

from __future__ import annotations

import csv
import itertools
import logging
from dataclasses import dataclass, field
from typing import IO

import numpy as np

from sgdc.config import settings
from sgdc.errors import InvalidParameterError, OracleRefusedError
from sgdc.losses import grad_loss, smoothness_constant
from sgdc.models import ProblemSpec, RelaxationParams, evaluate_point
from sgdc.schemas.certificate import Certificate, RateRow

logger = logging.getLogger(__name__)

ORACLE_MAX_DIMENSION = 12


def check_lower_bound(x: np.ndarray, nu: float) -> tuple[bool, list[int]]:
    "Every x_j is 0 or has |x_j| >= nu"
    if not nu > 0:
        raise InvalidParameterError(f"nu must be positive, got {nu}")
    x = np.asarray(x, dtype=float)
    violations = np.flatnonzero((x != 0) & (np.abs(x) < nu)).tolist()
    return not violations, violations


def stationarity_residual(
    spec: ProblemSpec, x: np.ndarray, grad: np.ndarray | None = None
) -> float:
    """Distance of 0 from grad f(x) + N_box(x), restricted to the support of x.

    The l1 term of f contributes l1_extra * sign(x_j), its only subgradient on
    the support.
    """
    x = np.asarray(x, dtype=float)
    support = np.flatnonzero(x)
    if support.size == 0:
        return 0.0
    if grad is None:
        grad = grad_loss(spec.loss, x)
    g = grad[support] + spec.loss.l1_extra * np.sign(x[support])
    xs = x[support]
    at_upper = xs >= spec.box.upper[support]
    at_lower = xs <= spec.box.lower[support]
    dist = np.abs(g)
    # N = [0, inf) at an upper bound, (-inf, 0] at a lower one
    dist = np.where(at_upper, np.maximum(g, 0.0), dist)
    dist = np.where(at_lower, np.maximum(-g, 0.0), dist)
    return float(np.linalg.norm(dist))


def certify(
    spec: ProblemSpec, rp: RelaxationParams, x: np.ndarray, tol: float | None = None
) -> Certificate:
    if tol is None:
        tol = settings.certify_tol
    x = np.asarray(x, dtype=float)
    if x.size != spec.n:
        raise InvalidParameterError(f"x has {x.size} entries, expected {spec.n}")
    feasible = spec.box.contains(x)
    lower_ok, violations = check_lower_bound(x, rp.nu)
    residual = stationarity_residual(spec, x)
    point = evaluate_point(spec, x)
    certificate = Certificate(
        feasible=feasible,
        lower_bound_ok=lower_ok,
        violations=violations,
        stationarity_residual=residual,
        is_sw_d_stationary=bool(feasible and lower_ok and residual <= tol),
        support=point.support.tolist(),
        F_primal=point.primal(spec),
        F_relaxed=point.relaxed(spec, rp.nu),
        nu=rp.nu,
        tol=tol,
    )
    if not certificate.is_sw_d_stationary:
        logger.info(
            "Not certified: feasible=%s lower bound violations=%d residual=%.3g",
            feasible,
            len(violations),
            residual,
        )
    return certificate


@dataclass(frozen=True, eq=False)
class LocalMinimizer:
    support: tuple[int, ...]
    x: np.ndarray
    F_primal: float
    nu_strong: bool


@dataclass(frozen=True, eq=False)
class OracleResult:
    x_global: np.ndarray
    F_global: float
    local_minimizers: list[LocalMinimizer] = field(default_factory=list)

    @property
    def nu_strong(self) -> list[LocalMinimizer]:
        return [entry for entry in self.local_minimizers if entry.nu_strong]


def _restricted_minimizer(spec, support, step, tol, max_steps) -> np.ndarray:
    "Projected (proximal, when l1_extra > 0) gradient on the box with x_j = 0 off the support"
    x = np.zeros(spec.n)
    if not support:
        return x
    idx = np.array(support)
    lower, upper = spec.box.lower[idx], spec.box.upper[idx]
    shrink = spec.loss.l1_extra * step
    for _ in range(max_steps):
        z = x[idx] - step * grad_loss(spec.loss, x)[idx]
        if shrink:
            z = np.sign(z) * np.maximum(np.abs(z) - shrink, 0.0)
        update = np.clip(z, lower, upper)
        change = float(np.abs(update - x[idx]).max())
        x[idx] = update
        if change <= tol:
            break
    else:
        logger.debug("Restricted minimization on %s hit the %d step cap", support, max_steps)
    return x


def global_oracle(
    spec: ProblemSpec,
    rp: RelaxationParams | None = None,
    tol: float = 1e-10,
    max_steps: int = 100_000,
) -> OracleResult:
    """Enumerate every support S and minimize f over the box face x_{S^c} = 0.

    A minimizer whose support is exactly S is a local minimizer of the l0
    problem; those with the nu-lower-bound property are nu-strong. Minimizers
    with extra zeros are reached again from their own, smaller support.
    """
    n = spec.n
    if n > ORACLE_MAX_DIMENSION:
        raise OracleRefusedError(
            f"global_oracle enumerates 2^n supports and handles n <= {ORACLE_MAX_DIMENSION}"
        )
    Ls = smoothness_constant(spec.loss, spec.box)
    step = 1.0 / Ls if Ls > 0 else 1.0
    entries = []
    for size in range(n + 1):
        for support in itertools.combinations(range(n), size):
            x = _restricted_minimizer(spec, support, step, tol, max_steps)
            if tuple(np.flatnonzero(x).tolist()) != support:
                continue
            nu_strong = rp is not None and check_lower_bound(x, rp.nu)[0]
            entries.append(
                LocalMinimizer(
                    support=support,
                    x=x,
                    F_primal=evaluate_point(spec, x).primal(spec),
                    nu_strong=nu_strong,
                )
            )
    best = min(entries, key=lambda entry: entry.F_primal)
    return OracleResult(x_global=best.x, F_global=best.F_primal, local_minimizers=entries)


def rate_trace(report, F_star: float | None = None) -> list[RateRow]:
    "Objective gaps |F(x^k) - F_star| beside the reference curves k^-1, k^-2, k^-3"
    trace = report.objective_trace
    if F_star is None:
        F_star = trace[-1].F_relaxed
    return [
        RateRow(
            k=record.k,
            gap=abs(record.F_relaxed - F_star),
            k_inv1=record.k**-1.0,
            k_inv2=record.k**-2.0,
            k_inv3=record.k**-3.0,
        )
        for record in trace
        if record.k >= 1
    ]


def write_rate_csv(rows: list[RateRow], stream: IO[str]):
    writer = csv.writer(stream)
    writer.writerow(["k", "gap", "k^-1", "k^-2", "k^-3"])
    for row in rows:
        writer.writerow([row.k, row.gap, row.k_inv1, row.k_inv2, row.k_inv3])


def _slack(report, value: float) -> float:
    return report.acceptance_slack * max(1.0, abs(value))


def check_acceptance(report) -> list[int]:
    "Line-search steps whose recorded values break the acceptance inequality"
    if report.acceptance is None or report.c is None:
        return []
    return [
        record.k
        for record in report.acceptance
        if record.candidate
        > record.reference - 0.5 * report.c * record.step_sq + _slack(report, record.reference)
    ]


def check_step_bound(report) -> list[int]:
    "Accepted steps above max(alpha_hi, rho Ls)"
    if report.Ls is None:
        return []
    cap = max(report.alpha_hi, report.rho * report.Ls)
    return [k for k, alpha in enumerate(report.alpha_trace) if alpha > cap]


def _increases(values: list[float], start: int, report) -> list[int]:
    return [
        k
        for k in range(start, len(values) - 1)
        if values[k + 1] > values[k] + _slack(report, values[k])
    ]


def check_monotone_descent(report) -> list[int]:
    "Iterations k >= K with F(x^{k+1}; nu) > F(x^k; nu)"
    values = [record.F_relaxed for record in report.objective_trace]
    return _increases(values, report.continuation_end, report)


def check_lyapunov(report) -> list[int]:
    "Iterations k >= K where F(x^k; nu) + (Ls/2) ||x^k - x^{k-1}||^2 increases"
    if report.lyapunov_trace is None:
        return []
    return _increases(report.lyapunov_trace, report.continuation_end, report)


def check_support_identification(report) -> bool:
    """The support froze before the last iteration and the final iterate has the
    nu-lower-bound property."""
    identified = report.support_identified_at
    if identified is None or report.nu is None:
        return False
    if report.iterations and identified >= report.iterations:
        return False
    return check_lower_bound(report.x, report.nu)[0]
