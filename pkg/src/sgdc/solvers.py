"""The two DC algorithms for the capped-l1 relaxation.

`dca_line_search` picks the step of every proximal subproblem by a nonmonotone
backtracking search; `dca_extrapolation` uses the fixed modulus Ls and an
extrapolated gradient point. Both follow the continuation schedule mu_k.
"""

from __future__ import annotations

import logging
import math
import time
from collections import deque

import numpy as np

from sgdc.diagnostics import stationarity_residual
from sgdc.errors import (
    ConfigError,
    ContractViolationError,
    InvalidParameterError,
    LsInvalidError,
)
from sgdc.losses import grad_loss, smoothness_constant
from sgdc.models import (
    EvaluatedPoint,
    ProblemSpec,
    RelaxationParams,
    derive_relaxation,
    evaluate_point,
    index_vectors,
    theta_subgradient,
)
from sgdc.prox import ProxRequest, solve_subproblem
from sgdc.schemas.solver import (
    AcceptanceRecord,
    Algorithm,
    ObjectiveRecord,
    SolveReport,
    SolverConfig,
    StopReason,
    SupportRecord,
)

logger = logging.getLogger(__name__)

# relative rounding allowance of the acceptance and descent tests
ACCEPTANCE_SLACK = 8 * np.finfo(float).eps


def acceptance_slack(reference: float) -> float:
    return ACCEPTANCE_SLACK * max(1.0, abs(reference))


def max_inner_iterations(rho: float, alpha_lo: float, alpha_hi: float, Ls: float) -> int:
    "Upper bound on the trial steps of one line search when Ls is a true smoothness constant"
    cap = max(alpha_hi, rho * Ls)
    return math.floor((math.log(cap) - math.log(alpha_lo)) / math.log(rho)) + 1


def _initial_point(spec: ProblemSpec, cfg: SolverConfig) -> np.ndarray:
    if cfg.x0 is None:
        return np.zeros(spec.n)
    x0 = np.array(cfg.x0, dtype=float)
    if x0.size != spec.n:
        raise InvalidParameterError(f"x0 has {x0.size} entries, expected {spec.n}")
    if not np.isfinite(x0).all():
        raise InvalidParameterError("x0 must be finite")
    if not spec.box.contains(x0):
        logger.warning("x0 lies outside the box; starting from its projection")
        x0 = spec.box.project(x0)
    return x0


class _Recorder:
    "Collects per-iterate traces and assembles the SolveReport"

    def __init__(self, spec: ProblemSpec, rp: RelaxationParams, algorithm: Algorithm):
        self.spec = spec
        self.rp = rp
        self.algorithm = algorithm
        self.objective: list[ObjectiveRecord] = []
        self.alphas: list[float] = []
        self.inner: list[int] = []
        self.steps: list[float] = []
        self.sizes: list[int] = []
        self.supports: list[SupportRecord] = []
        self.stationarity: list[float] = []
        self.lyapunov: list[float] | None = None
        self.acceptance: list[AcceptanceRecord] | None = None
        self.started = time.perf_counter()

    def iterate(self, k: int, point: EvaluatedPoint, grad: np.ndarray):
        spec = self.spec
        mu = self.rp.schedule.mu_at(k)
        relaxed = point.relaxed(spec, mu)
        self.objective.append(
            ObjectiveRecord(k=k, mu=mu, F_relaxed=relaxed, F_primal=point.primal(spec))
        )
        if not spec.box.contains(point.x):
            raise ContractViolationError(f"Iterate {k} left the box")
        support = point.support
        self.sizes.append(int(support.size))
        if not self.supports or self.supports[-1].support != support.tolist():
            self.supports.append(SupportRecord(k=k, support=support.tolist()))
        self.stationarity.append(stationarity_residual(spec, point.x, grad=grad))
        return relaxed

    def step(self, alpha: float, inner: int, step_norm: float):
        self.alphas.append(float(alpha))
        self.inner.append(inner)
        self.steps.append(step_norm)

    def report(self, x: np.ndarray, iterations: int, stop: StopReason, **extra) -> SolveReport:
        identified = self.supports[-1].k if self.supports else None
        report = SolveReport(
            algorithm=self.algorithm,
            x_final=x.tolist(),
            iterations=iterations,
            stop_reason=stop,
            wall_time=time.perf_counter() - self.started,
            objective_trace=self.objective,
            alpha_trace=self.alphas,
            inner_counts=self.inner,
            step_norms=self.steps,
            support_sizes=self.sizes,
            support_trace=self.supports,
            support_identified_at=identified,
            stationarity_trace=self.stationarity,
            lyapunov_trace=self.lyapunov,
            acceptance=self.acceptance,
            nu=self.rp.nu,
            Lf=self.rp.Lf,
            continuation_end=self.rp.schedule.continuation_end,
            acceptance_slack=ACCEPTANCE_SLACK,
            **extra,
        )
        logger.info(
            "%s stopped (%s) after %d iterations: F=%.12g, support %d, %.3fs",
            self.algorithm,
            stop,
            iterations,
            self.objective[-1].F_relaxed,
            len(report.support),
            report.wall_time,
        )
        return report


def _converged(k: int, K: int, tol: float, spec, nu, old: EvaluatedPoint, new: EvaluatedPoint):
    "|F(x^{k+1}; nu) - F(x^k; nu)| <= tol, tested only once the schedule is pinned at nu"
    if k < K:
        return False
    return abs(new.relaxed(spec, nu) - old.relaxed(spec, nu)) <= tol


def dca_line_search(
    spec: ProblemSpec, rp: RelaxationParams, cfg: SolverConfig
) -> SolveReport:
    """DC algorithm with a nonmonotone line search.

    At outer iteration k the trial steps alpha = alpha_base * rho^m grow until
    F(candidate; mu_k) <= max of F(x^j; mu_k) over the last N+1 iterates
    minus (c/2) ||candidate - x^k||^2. Window values are re-evaluated at the
    current mu_k from cached norms.
    """
    if cfg.beta > 0:
        raise ConfigError("beta > 0 only applies to the extrapolation algorithm")
    Ls = smoothness_constant(spec.loss, spec.box)
    if not Ls > 0:
        raise InvalidParameterError(f"The smoothness constant must be positive, got {Ls}")
    c = Ls / 2 if cfg.c is None else cfg.c
    if c > Ls:
        raise ConfigError(f"c = {c} must not exceed Ls = {Ls}")
    alpha_base = cfg.alpha_base
    if alpha_base is None:
        alpha_base = min(max(Ls / 2, cfg.alpha_lo), cfg.alpha_hi)
    cap = max(cfg.alpha_hi, cfg.rho * Ls)
    max_inner = max_inner_iterations(cfg.rho, cfg.alpha_lo, cfg.alpha_hi, Ls)
    schedule = rp.schedule
    K = schedule.continuation_end

    rec = _Recorder(spec, rp, Algorithm.line_search)
    rec.acceptance = []
    x = _initial_point(spec, cfg)
    point = evaluate_point(spec, x)
    grad = grad_loss(spec.loss, x)
    rec.iterate(0, point, grad)
    window = deque([point], maxlen=cfg.window + 1)
    stop = StopReason.max_outer
    k = 0
    while k < cfg.max_outer:
        mu = schedule.mu_at(k)
        iv = index_vectors(x, mu, spec.groups)
        xi = theta_subgradient(x, mu, iv, spec)
        shift = grad - xi
        reference = max(p.relaxed(spec, mu) for p in window)
        slack = acceptance_slack(reference)
        alpha = alpha_base
        for inner in range(1, max_inner + 1):
            candidate_x = solve_subproblem(ProxRequest(x - shift / alpha, alpha, mu, spec))
            candidate = evaluate_point(spec, candidate_x)
            step_sq = float((candidate_x - x) @ (candidate_x - x))
            value = candidate.relaxed(spec, mu)
            if value <= reference - 0.5 * c * step_sq + slack:
                break
            alpha *= cfg.rho
        else:
            raise LsInvalidError(
                f"Line search at k={k} exceeded {max_inner} trial steps; "
                f"Ls = {Ls:.6g} does not bound the gradient's Lipschitz modulus"
            )
        if alpha > cap:
            raise ContractViolationError(
                f"Accepted step {alpha:.6g} exceeds max(alpha_hi, rho Ls) = {cap:.6g}"
            )
        rec.acceptance.append(
            AcceptanceRecord(k=k, candidate=value, reference=reference, step_sq=step_sq)
        )
        rec.step(alpha, inner, math.sqrt(step_sq))
        logger.debug(
            "k=%d mu=%.6g F=%.12g support=%d alpha=%.6g inner=%d",
            k,
            mu,
            value,
            candidate.support.size,
            alpha,
            inner,
        )
        done = _converged(k, K, cfg.tol, spec, rp.nu, point, candidate)
        x, point = candidate_x, candidate
        grad = grad_loss(spec.loss, x)
        k += 1
        rec.iterate(k, point, grad)
        window.append(point)
        if done:
            stop = StopReason.tol
            break
    return rec.report(
        x,
        k,
        stop,
        Ls=Ls,
        c=c,
        rho=cfg.rho,
        alpha_hi=cfg.alpha_hi,
        window=cfg.window,
        beta=0.0,
    )


def dca_extrapolation(
    spec: ProblemSpec, rp: RelaxationParams, cfg: SolverConfig
) -> SolveReport:
    """DC algorithm with extrapolation.

    y^k = x^k + beta (x^k - x^{k-1}); the subgradient xi^k is taken at x^k and
    the gradient at y^k; the subproblem uses the fixed modulus Ls.
    """
    Ls = smoothness_constant(spec.loss, spec.box)
    if not Ls > 0:
        raise InvalidParameterError(f"The smoothness constant must be positive, got {Ls}")
    beta = cfg.beta
    schedule = rp.schedule
    K = schedule.continuation_end

    rec = _Recorder(spec, rp, Algorithm.extrapolation)
    rec.lyapunov = []
    x = _initial_point(spec, cfg)
    x_prev = x
    point = evaluate_point(spec, x)
    rec.lyapunov.append(rec.iterate(0, point, None))
    stop = StopReason.max_outer
    k = 0
    while k < cfg.max_outer:
        mu = schedule.mu_at(k)
        iv = index_vectors(x, mu, spec.groups)
        xi = theta_subgradient(x, mu, iv, spec)
        y = x + beta * (x - x_prev) if beta else x
        z = y - (grad_loss(spec.loss, y) - xi) / Ls
        new_x = solve_subproblem(ProxRequest(z, Ls, mu, spec))
        new_point = evaluate_point(spec, new_x)
        step_sq = float((new_x - x) @ (new_x - x))
        rec.step(Ls, 1, math.sqrt(step_sq))
        logger.debug(
            "k=%d mu=%.6g F=%.12g support=%d",
            k,
            mu,
            new_point.relaxed(spec, mu),
            new_point.support.size,
        )
        done = _converged(k, K, cfg.tol, spec, rp.nu, point, new_point)
        x_prev, x, point = x, new_x, new_point
        k += 1
        relaxed = rec.iterate(k, point, None)
        rec.lyapunov.append(relaxed + 0.5 * Ls * step_sq)
        if done:
            stop = StopReason.tol
            break
    return rec.report(
        x, k, stop, Ls=Ls, c=None, rho=cfg.rho, alpha_hi=cfg.alpha_hi, window=0, beta=beta
    )


def _empty_report(spec: ProblemSpec, rp, cfg: SolverConfig, algorithm: Algorithm):
    point = evaluate_point(spec, np.zeros(0))
    mu = rp.nu if rp is not None else cfg.M
    return SolveReport(
        algorithm=algorithm,
        x_final=[],
        iterations=0,
        stop_reason=StopReason.tol,
        wall_time=0.0,
        objective_trace=[ObjectiveRecord(k=0, mu=mu, F_relaxed=point.loss, F_primal=point.loss)],
        support_sizes=[0],
        support_trace=[SupportRecord(k=0, support=[])],
        support_identified_at=0,
        stationarity_trace=[0.0],
        nu=rp.nu if rp is not None else None,
    )


def solve(
    spec: ProblemSpec,
    rp: RelaxationParams | None = None,
    cfg: SolverConfig | None = None,
    algorithm: Algorithm | str = Algorithm.line_search,
) -> SolveReport:
    """Run one of the two algorithms.

    Missing relaxation parameters are derived from the problem with the
    schedule and safety factor of `cfg`.
    """
    cfg = cfg if cfg is not None else SolverConfig()
    algorithm = Algorithm(algorithm)
    if algorithm is Algorithm.line_search and cfg.beta > 0:
        raise ConfigError("beta > 0 only applies to the extrapolation algorithm")
    if spec.n == 0:
        return _empty_report(spec, rp, cfg, algorithm)
    if rp is None:
        rp = derive_relaxation(
            spec, M=cfg.M, step_divisor=cfg.step_divisor, safety=cfg.safety
        )
    logger.info(
        "Solving n=%d with %s: nu=%.6g Lf=%.6g K=%d",
        spec.n,
        algorithm,
        rp.nu,
        rp.Lf,
        rp.schedule.continuation_end,
    )
    if algorithm is Algorithm.line_search:
        return dca_line_search(spec, rp, cfg)
    return dca_extrapolation(spec, rp, cfg)
