"""Command-line front end.

    sgdc solve --problem p.json --out report.json [--trace trace.csv]
    sgdc bench-signal --n 160 --sigma 1e-2 --trials 10 --seed 7 --out table.csv
    sgdc bench-group --n 150 --sigma 0 --out table.csv
    sgdc certify --problem p.json --x report.json

Exit status is 0 on success, 1 for configuration errors and 2 for numerical
failures.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from sgdc import __version__
from sgdc.bench import SWEEPS, run_sweep, write_rows_csv, write_rows_json
from sgdc.config import settings
from sgdc.diagnostics import certify
from sgdc.errors import ConfigError, SgdcError
from sgdc.io import describe_validation_error, load_problem, load_vector, write_document
from sgdc.models import derive_relaxation
from sgdc.schemas.bench import BenchModel, ExperimentSpec, NoiseKind
from sgdc.schemas.solver import Algorithm, SolverConfig
from sgdc.solvers import solve

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(levelname)-5.5s [%(name)s] %(message)s"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise ConfigError(f"{self.prog}: {message}")


def _algorithm(value: str) -> Algorithm:
    try:
        return Algorithm(value.replace("-", "_"))
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"invalid algorithm {value!r} (choose line-search or extrapolation)"
        ) from None


def _x0(value: str):
    return value if value == "random" else float(value)


def _add_solver_flags(parser: argparse.ArgumentParser):
    parser.add_argument("--algorithm", type=_algorithm, default=Algorithm.line_search)
    parser.add_argument("--M", type=float, default=None)
    parser.add_argument("--step-divisor", type=float, default=None)
    parser.add_argument("--N", dest="window", type=int, default=None)
    parser.add_argument("--rho", type=float, default=None)
    parser.add_argument("--beta", type=float, default=None)
    parser.add_argument("--tol", type=float, default=None)
    parser.add_argument("--max-outer", type=int, default=None)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="sgdc", description="Sparse group l0 solvers and benchmarks")
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("-v", "--verbose", action="count", default=0)
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    solve_cmd = commands.add_parser("solve", help="Solve a problem document")
    solve_cmd.add_argument("--problem", type=Path, required=True)
    solve_cmd.add_argument("--x0", type=Path, default=None, help="Start point file")
    solve_cmd.add_argument("--out", type=Path, required=True, help="SolveReport JSON")
    solve_cmd.add_argument("--trace", type=Path, default=None, help="Per-iteration CSV")
    _add_solver_flags(solve_cmd)

    bench_models = (("bench-signal", BenchModel.l0_signal), ("bench-group", BenchModel.group_l0))
    for name, model in bench_models:
        bench = commands.add_parser(name, help=f"Run {model} recovery trials")
        bench.set_defaults(model=model)
        bench.add_argument("--n", type=int, default=None)
        bench.add_argument("--m", type=int, default=None)
        bench.add_argument("--s", type=int, default=None)
        bench.add_argument("--trials", type=int, default=None)
        bench.add_argument("--seed", type=int, default=None)
        bench.add_argument("--sigma", type=float, default=None)
        bench.add_argument("--noise", type=NoiseKind, default=None, choices=list(NoiseKind))
        bench.add_argument("--x0", type=_x0, default=None)
        bench.add_argument("--sweep", choices=SWEEPS, default="none")
        bench.add_argument("--jobs", type=int, default=None)
        bench.add_argument("--out", type=Path, default=None, help="Table CSV")
        bench.add_argument("--json", type=Path, default=None, help="Per-trial JSON")
        _add_solver_flags(bench)

    certify_cmd = commands.add_parser("certify", help="Certify a candidate point")
    certify_cmd.add_argument("--problem", type=Path, required=True)
    certify_cmd.add_argument("--x", type=Path, required=True)
    certify_cmd.add_argument("--tol", type=float, default=None)
    certify_cmd.add_argument("--safety", type=float, default=0.99)
    certify_cmd.add_argument("--out", type=Path, default=None)
    return parser


def _overrides(args: argparse.Namespace, names) -> dict:
    return {
        name: getattr(args, name)
        for name in names
        if getattr(args, name, None) is not None
    }


SOLVER_FLAGS = ("M", "step_divisor", "window", "rho", "beta", "tol", "max_outer")


def _solve(args) -> int:
    spec = load_problem(args.problem)
    fields = _overrides(args, SOLVER_FLAGS)
    if args.x0 is not None:
        fields["x0"] = load_vector(args.x0).tolist()
    cfg = SolverConfig(**fields)
    report = solve(spec, cfg=cfg, algorithm=args.algorithm)
    write_document(report, args.out)
    if args.trace is not None:
        with args.trace.open("w", newline="") as stream:
            report.write_csv(stream)
    print(
        f"{report.algorithm}: {report.stop_reason} after {report.iterations} iterations, "
        f"F = {report.objective_trace[-1].F_primal:.12g}, support {len(report.support)}"
    )
    return 0


def _bench(args) -> int:
    fields = _overrides(args, ("n", "m", "s", "trials", "sigma", "x0", *SOLVER_FLAGS))
    if args.noise is not None:
        fields["noise_kind"] = args.noise
    seed = settings.seed if settings.seed is not None else args.seed
    if seed is not None:
        fields["seed"] = seed
    es = ExperimentSpec(model=args.model, algorithm=args.algorithm, **fields)
    jobs = args.jobs if args.jobs is not None else settings.jobs
    rows = run_sweep(es, args.sweep, jobs)
    if args.out is not None:
        with args.out.open("w", newline="") as stream:
            write_rows_csv(rows, stream)
    else:
        write_rows_csv(rows, sys.stdout)
    if args.json is not None:
        write_rows_json(rows, args.json)
    return 0


def _certify(args) -> int:
    spec = load_problem(args.problem)
    x = load_vector(args.x)
    rp = derive_relaxation(spec, safety=args.safety)
    certificate = certify(spec, rp, x, tol=args.tol)
    for name, value in certificate.model_dump().items():
        print(f"{name}: {str(value).lower() if isinstance(value, bool) else value}")
    if args.out is not None:
        write_document(certificate, args.out)
    return 0


COMMANDS = {"solve": _solve, "bench-signal": _bench, "bench-group": _bench, "certify": _certify}


def _configure_logging(verbosity: int):
    level = {0: settings.log_level, 1: "INFO"}.get(verbosity, "DEBUG")
    logging.basicConfig(level=level, format=LOG_FORMAT, stream=sys.stderr, force=True)


def main(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        _configure_logging(args.verbose)
        return COMMANDS[args.command](args)
    except ValidationError as error:
        print(f"sgdc: configuration error: {describe_validation_error(error)}", file=sys.stderr)
        return ConfigError.exit_code
    except OSError as error:
        print(f"sgdc: configuration error: {error}", file=sys.stderr)
        return ConfigError.exit_code
    except SgdcError as error:
        print(f"sgdc: {type(error).__name__}: {error}", file=sys.stderr)
        return error.exit_code


def run():
    sys.exit(main())
