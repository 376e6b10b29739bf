"""Synthetic recovery experiments: l0 signal recovery on [0, 10]^n and a
group-sparse model with groups of three on [-10, 10]^n.

Every trial draws from its own counter-based Philox stream seeded by
(seed, trial), so results do not depend on how trials are scheduled.
"""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import IO, Iterable

import numpy as np

from sgdc.diagnostics import (
    certify,
    check_acceptance,
    check_lower_bound,
    check_lyapunov,
    check_monotone_descent,
    check_step_bound,
)
from sgdc.errors import ConfigError, InvalidParameterError
from sgdc.losses import LossModel
from sgdc.models import BoxConstraint, GroupStructure, ProblemSpec, derive_relaxation
from sgdc.schemas.bench import (
    GROUP_SIZE,
    BenchModel,
    BenchRow,
    ExperimentSpec,
    NoiseKind,
    TrialResult,
)
from sgdc.schemas.solver import Algorithm
from sgdc.solvers import solve

logger = logging.getLogger(__name__)

SIGNAL_BOUND = 10.0
DIMENSION_TIERS = {
    BenchModel.l0_signal: (160, 1600, 16000),
    BenchModel.group_l0: (150, 1500, 15000),
}
M_VALUES = (0.0, 4.0, 5.0, 20.0, 50.0)
X0_VALUES = (0.0, 1.0, 2.0, "random", -1.0)
NOISE_LEVELS = (0.0, 1e-4, 1e-2)
SWEEPS = ("none", "dimension", "M", "x0", "noise")

ROW_COLUMNS = (
    "label",
    "model",
    "algorithm",
    "n",
    "m",
    "s",
    "noise_kind",
    "sigma",
    "M",
    "x0",
    "trials",
    "mean_iterations",
    "mean_time",
    "mean_mse",
    "mean_psnr",
    "mean_last_step",
    "mean_support",
    "exact_support",
    "certified",
)


@dataclass(frozen=True, eq=False)
class Instance:
    A: np.ndarray
    b: np.ndarray
    x_true: np.ndarray


def trial_rng(seed: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, trial])))


def mse(y: np.ndarray, x_true: np.ndarray) -> float:
    "||y - x_true||^2 / n"
    y, x_true = np.asarray(y, dtype=float), np.asarray(x_true, dtype=float)
    if y.shape != x_true.shape:
        raise InvalidParameterError(f"Shapes differ: {y.shape} and {x_true.shape}")
    if y.size == 0:
        raise InvalidParameterError("The MSE of empty vectors is undefined")
    diff = y - x_true
    return float(diff @ diff) / y.size


def psnr(y: np.ndarray, x_true: np.ndarray) -> float:
    """10 log10(V^2 / MSE) with V the largest magnitude of the reconstruction y.

    An exact reconstruction gives +inf; a zero reconstruction of a nonzero
    signal gives -inf.
    """
    error = mse(y, x_true)
    if error == 0:
        return math.inf
    peak = float(np.abs(y).max())
    if peak == 0:
        return -math.inf
    return 10.0 * math.log10(peak**2 / error)


def _noise(rng: np.random.Generator, kind: NoiseKind, size: int) -> np.ndarray:
    match kind:
        case NoiseKind.gaussian:
            return rng.standard_normal(size)
        case NoiseKind.rayleigh:
            return rng.rayleigh(1.0, size)
        case NoiseKind.gamma:
            return rng.gamma(2.0, 1.0, size)
        case NoiseKind.exponential:
            return rng.exponential(1.0, size)
        case NoiseKind.uniform:
            return rng.uniform(-1.0, 1.0, size)
        case NoiseKind.none:
            return np.zeros(size)


def generate_instance(es: ExperimentSpec, rng: np.random.Generator) -> Instance:
    """Gaussian A with unit columns, a planted sparse x_true and b = A x_true + sigma * noise."""
    n, m, s = es.n, es.m, es.s
    A = rng.standard_normal((m, n))
    A /= np.linalg.norm(A, axis=0)
    x_true = np.zeros(n)
    if es.model is BenchModel.l0_signal:
        support = rng.choice(n, size=s, replace=False)
        x_true[support] = rng.uniform(es.signal_low, es.signal_high, size=s)
    else:
        active = rng.choice(n // GROUP_SIZE, size=s, replace=False)
        support = (GROUP_SIZE * active[:, None] + np.arange(GROUP_SIZE)).ravel()
        signs = rng.choice([-1.0, 1.0], size=support.size)
        magnitudes = rng.uniform(es.signal_low, es.signal_high, size=support.size)
        x_true[support] = signs * magnitudes
    b = A @ x_true
    if es.sigma > 0 and es.noise_kind is not NoiseKind.none:
        b = b + es.sigma * _noise(rng, es.noise_kind, m)
    return Instance(A=A, b=b, x_true=x_true)


def build_problem(es: ExperimentSpec, instance: Instance) -> ProblemSpec:
    n = es.n
    loss = LossModel.least_squares(instance.A, instance.b)
    if es.model is BenchModel.l0_signal:
        return ProblemSpec(
            loss=loss,
            box=BoxConstraint.uniform(n, 0.0, SIGNAL_BOUND),
            groups=GroupStructure.singletons(n),
            lambda1=es.lambda1,
            lambda2=es.lambda2,
        )
    return ProblemSpec(
        loss=loss,
        box=BoxConstraint.uniform(n, -SIGNAL_BOUND, SIGNAL_BOUND),
        groups=GroupStructure.consecutive(n, GROUP_SIZE),
        lambda1=es.lambda1,
        lambda2=es.lambda2,
    )


def _start(es: ExperimentSpec, rng: np.random.Generator) -> np.ndarray:
    if es.x0 == "random":
        return rng.uniform(-1.0, 2.0, size=es.n)
    return np.full(es.n, float(es.x0))


def run_trial(es: ExperimentSpec, trial: int) -> TrialResult:
    rng = trial_rng(es.seed, trial)
    instance = generate_instance(es, rng)
    x0 = _start(es, rng)
    spec = build_problem(es, instance)
    rp = derive_relaxation(spec, M=es.M, step_divisor=es.step_divisor)
    report = solve(spec, rp, es.solver_config(x0.tolist()), es.algorithm)
    x = report.x
    certificate = certify(spec, rp, x, tol=es.certify_tol)
    broken = check_acceptance(report) + check_step_bound(report) + check_lyapunov(report)
    if es.algorithm is Algorithm.line_search and es.window == 0:
        broken += check_monotone_descent(report)
    mechanics_ok = not broken
    result = TrialResult(
        trial=trial,
        mse=mse(x, instance.x_true),
        psnr=psnr(x, instance.x_true),
        support_size=len(certificate.support),
        support_exact=bool(
            np.array_equal(np.flatnonzero(x), np.flatnonzero(instance.x_true))
        ),
        iterations=report.iterations,
        inner_mean=float(np.mean(report.inner_counts)) if report.inner_counts else 0.0,
        last_step_norm=report.step_norms[-1] if report.step_norms else 0.0,
        wall_time=report.wall_time,
        certified=certificate.is_sw_d_stationary,
        lower_bound_ok=check_lower_bound(x, rp.nu)[0],
        mechanics_ok=mechanics_ok,
        support_identified_at=report.support_identified_at,
        stop_reason=report.stop_reason,
    )
    logger.info(
        "trial %d: mse=%.3g support=%d iterations=%d certified=%s",
        trial,
        result.mse,
        result.support_size,
        result.iterations,
        result.certified,
    )
    return result


def run_trials(es: ExperimentSpec, jobs: int = 1) -> list[TrialResult]:
    "Results ordered by trial index whatever the number of worker processes"
    trials = range(es.trials)
    if jobs <= 1:
        return [run_trial(es, trial) for trial in trials]
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        return list(pool.map(partial(run_trial, es), trials))


def aggregate(es: ExperimentSpec, results: list[TrialResult]) -> BenchRow:
    def mean(values: Iterable[float]) -> float:
        return float(np.mean(list(values)))

    return BenchRow(
        label=es.label,
        model=es.model,
        algorithm=es.algorithm,
        n=es.n,
        m=es.m,
        s=es.s,
        noise_kind=es.noise_kind,
        sigma=es.sigma,
        M=es.M,
        x0=es.x0,
        trials=len(results),
        mean_iterations=mean(r.iterations for r in results),
        mean_time=mean(r.wall_time for r in results),
        mean_mse=mean(r.mse for r in results),
        mean_psnr=mean(r.psnr for r in results),
        mean_last_step=mean(r.last_step_norm for r in results),
        mean_support=mean(r.support_size for r in results),
        exact_support=sum(r.support_exact for r in results),
        certified=sum(r.certified for r in results),
        results=results,
    )


def run_signal_recovery(es: ExperimentSpec, jobs: int = 1) -> BenchRow:
    "l0 signal recovery: min over [0, 10]^n of ||Ax - b||^2 + lambda1 ||x||_0"
    if es.model is not BenchModel.l0_signal:
        raise ConfigError(f"run_signal_recovery needs model l0_signal, got {es.model}")
    return aggregate(es, run_trials(es, jobs))


def run_group_recovery(es: ExperimentSpec, jobs: int = 1) -> BenchRow:
    "Group recovery with lambda1 ||x||_0 + lambda2 * (number of nonzero groups of three)"
    if es.model is not BenchModel.group_l0:
        raise ConfigError(f"run_group_recovery needs model group_l0, got {es.model}")
    return aggregate(es, run_trials(es, jobs))


def run_experiment(es: ExperimentSpec, jobs: int = 1) -> BenchRow:
    if es.model is BenchModel.l0_signal:
        return run_signal_recovery(es, jobs)
    return run_group_recovery(es, jobs)


def sweep_specs(es: ExperimentSpec, sweep: str) -> list[ExperimentSpec]:
    """The experiment rows of a sweep, each a copy of `es` with one setting varied."""

    def vary(label, **changes):
        data = es.model_dump()
        data.update(changes, label=label)
        if "n" in changes:
            data.update(m=None, s=None)
        return ExperimentSpec.model_validate(data)

    match sweep:
        case "none":
            return [es]
        case "dimension":
            return [vary(f"n={n}", n=n) for n in DIMENSION_TIERS[es.model]]
        case "M":
            return [vary(f"M={M:g}", M=M) for M in M_VALUES]
        case "x0":
            return [vary(f"x0={x0}", x0=x0) for x0 in X0_VALUES]
        case "noise":
            return [
                vary(f"{kind}/{sigma:g}", noise_kind=kind, sigma=sigma)
                for kind in NoiseKind
                if kind is not NoiseKind.none
                for sigma in NOISE_LEVELS
            ]
    raise ConfigError(f"Unknown sweep {sweep!r}; expected one of {', '.join(SWEEPS)}")


def run_sweep(es: ExperimentSpec, sweep: str = "none", jobs: int = 1) -> list[BenchRow]:
    return [run_experiment(row, jobs) for row in sweep_specs(es, sweep)]


def write_rows_csv(rows: list[BenchRow], stream: IO[str]):
    writer = csv.DictWriter(stream, fieldnames=ROW_COLUMNS, extrasaction="ignore")
    writer.writeheader()
    for row in rows:
        writer.writerow(row.model_dump(exclude={"results"}, mode="json"))


def write_rows_json(rows: list[BenchRow], path: Path):
    "Full per-trial detail"
    payload = "[\n" + ",\n".join(row.model_dump_json(indent=2) for row in rows) + "\n]\n"
    path.write_text(payload)
