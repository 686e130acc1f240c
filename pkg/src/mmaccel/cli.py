"""Command-line front end: ``run``, ``bench``, ``list`` and ``trace``.

Exit codes: 0 on success, 1 when a solve fails or does not converge, 2 on
usage errors.
"""

import argparse
import json
import os
import re
import sys
from pathlib import Path
from typing import List, Optional, Tuple

import numpy as np

from .core import METHODS, SolverConfig, solve
from .exceptions import ConfigError, MMAccelError
from .harness import ExperimentSpec, export_results, export_trace, run_experiment
from .problems import CATEGORIES, MODES, PROBLEMS, build_instance

SEED_ENV = "MM_ACCEL_SEED"

_PROBLEM_FLAGS = ("dataset", "dim", "mode", "nu", "px")

_TOKEN = re.compile(r"^(mm|lbqn|broyden-classic|bqn|zal|squarem)(\d*)$")


class UsageError(Exception):
    pass


def parse_method(token: str, base: SolverConfig) -> Tuple[str, SolverConfig]:
    """Turn ``bqn2``, ``squarem1``, ``zal`` ... into a labelled config.

    A trailing number is ``secant_count`` for bqn/zal and the steplength
    variant for squarem; other methods take none.
    """
    m = _TOKEN.match(token.strip())
    if not m:
        raise UsageError(f"unknown method {token!r}; expected one of {', '.join(METHODS)} (e.g. bqn2, squarem1)")
    method, num = m.group(1), m.group(2)
    if not num:
        return token.strip(), base.with_(method=method)
    n = int(num)
    if method in ("bqn", "zal"):
        if n < 1:
            raise UsageError(f"{method} needs at least one secant, got {token!r}")
        return token, base.with_(method=method, secant_count=n)
    if method == "squarem":
        if n not in (1, 2, 3):
            raise UsageError(f"squarem variant must be 1, 2 or 3, got {token!r}")
        return token, base.with_(method=method, squarem_variant=n)
    raise UsageError(f"method {method!r} takes no numeric suffix, got {token!r}")


def _positive_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {v}")
    return v


def _nonneg_int(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"expected a non-negative integer, got {v}")
    return v


def _positive_float(s: str) -> float:
    try:
        v = float(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {s!r}") from None
    if not v > 0:
        raise argparse.ArgumentTypeError(f"expected a positive number, got {v}")
    return v


def _vector(s: str) -> np.ndarray:
    try:
        return np.array([float(t) for t in s.split(",")], dtype=float)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {s!r}") from None


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    d = SolverConfig()
    p.add_argument("--problem", required=True, choices=sorted(PROBLEMS))
    p.add_argument("--tol", type=_positive_float, default=d.tolerance, help="residual tolerance (default %(default)g)")
    p.add_argument("--max-iter", type=_positive_int, default=d.max_iterations)
    p.add_argument("--memory", type=_nonneg_int, default=d.memory, help="L-BQN memory m")
    p.add_argument("--no-safeguard", action="store_true", help="disable the monotonicity safeguard")
    p.add_argument("--no-scaling", action="store_true", help="disable BQN/L-BQN step scaling")
    p.add_argument("--seed", type=_nonneg_int, default=0, help=f"base seed; {SEED_ENV} overrides it")
    g = p.add_argument_group("problem-specific")
    g.add_argument("--dataset", choices=CATEGORIES, help="trunc-bb household category")
    g.add_argument("--dim", type=_positive_int, help="quadratic / rayleigh dimension")
    g.add_argument("--mode", choices=MODES, help="rayleigh: which extreme eigenvalue")
    g.add_argument("--nu", type=_positive_float, help="mvt degrees of freedom")
    g.add_argument("--px", action="store_const", const=True, help="mvt: parameter-expanded EM")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mmaccel", description="Accelerated MM / fixed-point solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="solve one problem with one method")
    _add_solver_flags(run)
    run.add_argument("--method", default="bqn", help="mm, bqn[q], lbqn, squarem[1-3], zal[q], broyden-classic")
    run.add_argument("--x0", type=_vector, help="comma-separated start (default: the problem's)")
    run.add_argument("--json", action="store_true", help="print the report as JSON")

    bench = sub.add_parser("bench", help="replicated multi-method benchmark")
    _add_solver_flags(bench)
    bench.add_argument("--methods", required=True, help="comma-separated method tokens")
    bench.add_argument("--reps", type=_positive_int, default=1)
    bench.add_argument("--start", choices=("random", "fixed"), default="random")
    bench.add_argument("--out", help="output path; .json writes JSON, anything else CSV")
    bench.add_argument("--threads", type=_positive_int, default=1)

    trace = sub.add_parser("trace", help="solve once and write the iterate trace as CSV")
    _add_solver_flags(trace)
    trace.add_argument("--method", default="bqn")
    trace.add_argument("--x0", type=_vector)
    trace.add_argument("--out", required=True)

    sub.add_parser("list", help="list methods and problems")
    return parser


def _problem_params(args) -> dict:
    given = {k: getattr(args, k) for k in _PROBLEM_FLAGS if getattr(args, k) is not None}
    accepted = PROBLEMS[args.problem][1]
    bad = sorted(set(given) - set(accepted))
    if bad:
        flags = ", ".join(f"--{b}" for b in bad)
        raise UsageError(f"{flags} not accepted by problem {args.problem!r}")
    return given


def _seed(args) -> int:
    env = os.environ.get(SEED_ENV)
    if env is None or env == "":
        return args.seed
    try:
        v = int(env)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be a non-negative integer, got {env!r}") from None
    if v < 0:
        raise UsageError(f"{SEED_ENV} must be a non-negative integer, got {env!r}")
    return v


def _base_config(args) -> SolverConfig:
    return SolverConfig(
        tolerance=args.tol,
        max_iterations=args.max_iter,
        memory=args.memory,
        safeguard=not args.no_safeguard,
        step_scaling=not args.no_scaling,
    )


def _format_report(problem: str, report) -> str:
    obj = "n/a" if report.objective_value is None else f"{report.objective_value:.10g}"
    rows = [
        ("problem", problem),
        ("method", report.method),
        ("converged", str(report.converged)),
        ("iterations", str(report.iterations)),
        ("F evals", str(report.f_evals)),
        ("fallbacks", str(report.fallback_count)),
        ("objective", obj),
        ("residual", f"{report.residual_norm:.3e}"),
        ("elapsed (s)", f"{report.elapsed_seconds:.3f}"),
    ]
    if report.solution.size <= 10:
        rows.append(("solution", " ".join(f"{v:.8g}" for v in report.solution)))
    width = max(len(k) for k, _ in rows)
    return "\n".join(f"{k:<{width}}  {v}" for k, v in rows)


def _format_summary(records) -> str:
    lines = [f"{'method':<18}{'metric':<12}{'min':>14}{'q1':>14}{'median':>14}{'q3':>14}{'max':>14}  ok/total"]
    for rec in records:
        for name, q in sorted(rec.metrics.items()):
            cells = "".join(f"{v:>14.6g}" for v in q) if q is not None else f"{'-':>14}" * 5
            lines.append(f"{rec.method:<18}{name:<12}{cells}  {rec.successes}/{rec.replications}")
    return "\n".join(lines)


def _single_solve(args, seed):
    _, cfg = parse_method(args.method, _base_config(args))
    params = _problem_params(args)
    instance = build_instance(args.problem, seed=seed, **params)
    x0 = instance.default_start if args.x0 is None else args.x0
    if x0.size != instance.problem.dimension:
        raise UsageError(f"--x0 has {x0.size} entries, problem {args.problem!r} has dimension {instance.problem.dimension}")
    return instance, cfg, x0


def execute(args) -> int:
    if args.command == "list":
        print("methods:")
        for m in METHODS:
            print(f"  {m}")
        print("problems:")
        for name, (_, accepted) in PROBLEMS.items():
            extra = " ".join(f"--{a}" for a in accepted)
            print(f"  {name}" + (f"  ({extra})" if extra else ""))
        return 0

    seed = _seed(args)
    if args.command in ("run", "trace"):
        instance, cfg, x0 = _single_solve(args, seed)
        if args.command == "trace":
            cfg = cfg.with_(record_trace=True)
        try:
            report = solve(instance.problem, cfg, x0)
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
        except (MMAccelError, ArithmeticError) as exc:
            print(f"error: solve failed: {exc}", file=sys.stderr)
            return 1
        if args.command == "trace":
            export_trace(report, args.out)
            print(f"wrote {len(report.trace)} iterates to {args.out}")
        elif args.json:
            print(json.dumps({"problem": args.problem, **report.scalars()}, indent=2))
        else:
            print(_format_report(args.problem, report))
        return 0 if report.converged else 1

    # bench
    base = _base_config(args)
    methods = [parse_method(tok, base) for tok in args.methods.split(",") if tok.strip()]
    if not methods:
        raise UsageError("--methods is empty")
    params = _problem_params(args)
    instance = build_instance(args.problem, seed=seed, **params)
    for _, cfg in methods:
        try:
            cfg.validate(instance.problem)
        except ConfigError as exc:
            raise UsageError(str(exc)) from None
    spec = ExperimentSpec(
        problem=args.problem,
        methods=methods,
        replications=args.reps,
        problem_params=params,
        problem_seed=seed,
        start=args.start,
        base_seed=seed,
        threads=args.threads,
    )
    records = run_experiment(spec)
    print(_format_summary(records))
    if args.out:
        fmt = "json" if Path(args.out).suffix.lower() == ".json" else "csv"
        export_results(records, fmt, args.out)
        print(f"wrote {args.out}")
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return execute(args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        # bad problem parameters surface from the factories
        print(f"{parser.prog}: error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
