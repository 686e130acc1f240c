"""Matched-start experiments, quantile summaries, rate diagnostics and export."""

import csv
import hashlib
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .core import SolveReport, SolverConfig, solve
from .exceptions import ConfigError, MMAccelError
from .linalg import quantiles
from .problems import BenchmarkInstance, build_instance

METRICS = ("iterations", "f_evals", "objective", "residual", "elapsed")
QUANTILE_PROBS = (0.0, 0.25, 0.5, 0.75, 1.0)
CSV_HEADER = ("method", "metric", "min", "q1", "median", "q3", "max", "replications")


@dataclass
class ExperimentSpec:
    """One benchmark: a problem, the methods to compare, and how starts are drawn.

    ``start`` is ``"fixed"`` (the problem's default start), ``"random"`` (the
    problem's seeded sampler, replication ``r`` seeded with ``base_seed + r``),
    or an explicit vector used for every replication.
    """

    problem: str
    methods: Sequence[Tuple[str, SolverConfig]]
    replications: int = 1
    problem_params: Dict[str, object] = field(default_factory=dict)
    problem_seed: int = 0
    start: Union[str, Sequence[float]] = "random"
    base_seed: int = 0
    threads: int = 1

    def validate(self) -> None:
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if not self.methods:
            raise ConfigError("at least one method is required")
        labels = [label for label, _ in self.methods]
        if len(set(labels)) != len(labels):
            raise ConfigError(f"method labels must be unique, got {labels}")
        first = self.methods[0][1]
        for label, cfg in self.methods:
            if cfg.tolerance != first.tolerance or cfg.max_iterations != first.max_iterations:
                raise ConfigError(f"method {label!r} does not share the experiment's tolerance and iteration cap")
        if isinstance(self.start, str) and self.start not in ("fixed", "random"):
            raise ConfigError(f"start must be 'fixed', 'random' or a vector, got {self.start!r}")
        if self.threads < 1:
            raise ConfigError(f"threads must be >= 1, got {self.threads}")


@dataclass
class RunCell:
    """Outcome of one method on one replication."""

    replication: int
    method: str
    start_hash: str
    report: Optional[SolveReport] = None
    error: Optional[str] = None

    @property
    def succeeded(self) -> bool:
        return self.report is not None and self.report.converged


@dataclass
class SummaryRecord:
    """Quantiles of each metric over the successful runs of one method.

    ``metrics[name]`` is ``(min, q1, median, q3, max)``, or None when no run
    succeeded.
    """

    method: str
    metrics: Dict[str, Optional[Tuple[float, ...]]]
    replications: int
    successes: int
    failures: int
    fallback_total: int

    @property
    def success_fraction(self) -> float:
        return self.successes / self.replications

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "replications": self.replications,
            "successes": self.successes,
            "failures": self.failures,
            "success_fraction": self.success_fraction,
            "fallback_total": self.fallback_total,
            "metrics": {
                name: None if q is None else dict(zip(CSV_HEADER[2:7], q)) for name, q in self.metrics.items()
            },
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SummaryRecord":
        metrics = {
            name: None if q is None else tuple(q[k] for k in CSV_HEADER[2:7]) for name, q in d["metrics"].items()
        }
        return cls(d["method"], metrics, d["replications"], d["successes"], d["failures"], d["fallback_total"])


def _start_hash(x: np.ndarray) -> str:
    return hashlib.sha256(np.ascontiguousarray(x, dtype=float).tobytes()).hexdigest()[:16]


def _draw_start(spec: ExperimentSpec, instance: BenchmarkInstance, r: int) -> np.ndarray:
    if isinstance(spec.start, str):
        if spec.start == "fixed":
            return np.array(instance.default_start, dtype=float)
        return np.asarray(instance.draw_start(np.random.default_rng(spec.base_seed + r)), dtype=float)
    return np.array(spec.start, dtype=float)


def _run_replication(spec: ExperimentSpec, instance: BenchmarkInstance, r: int) -> List[RunCell]:
    x0 = _draw_start(spec, instance, r)
    h = _start_hash(x0)
    cells = []
    for label, cfg in spec.methods:
        try:
            report = solve(instance.problem, cfg, x0)
            cells.append(RunCell(r, label, h, report=report))
        except (MMAccelError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            cells.append(RunCell(r, label, h, error=f"{type(exc).__name__}: {exc}"))
    return cells


def run_replications(spec: ExperimentSpec) -> List[RunCell]:
    """Run every method on every replication; cells ordered by (replication, method)."""
    spec.validate()
    instance = build_instance(spec.problem, seed=spec.problem_seed, **spec.problem_params)
    reps = range(spec.replications)
    if spec.threads == 1:
        groups = [_run_replication(spec, instance, r) for r in reps]
    else:
        with ThreadPoolExecutor(max_workers=spec.threads) as pool:
            groups = list(pool.map(lambda r: _run_replication(spec, instance, r), reps))
    return [cell for group in groups for cell in group]


def _metric_values(report: SolveReport) -> Dict[str, float]:
    obj = report.objective_value
    return {
        "iterations": float(report.iterations),
        "f_evals": float(report.f_evals),
        "objective": math.nan if obj is None else float(obj),
        "residual": float(report.residual_norm),
        "elapsed": float(report.elapsed_seconds),
    }


def summarize(cells: Sequence[RunCell], methods: Sequence[str]) -> List[SummaryRecord]:
    records = []
    for method in methods:
        mine = [c for c in cells if c.method == method]
        ok = [c for c in mine if c.succeeded]
        metrics = {}
        for name in METRICS:
            vals = [_metric_values(c.report)[name] for c in ok]
            vals = [v for v in vals if not math.isnan(v)]
            metrics[name] = tuple(quantiles(vals, QUANTILE_PROBS)) if vals else None
        fallbacks = sum(c.report.fallback_count for c in mine if c.report is not None)
        records.append(SummaryRecord(method, metrics, len(mine), len(ok), len(mine) - len(ok), fallbacks))
    return sorted(records, key=lambda rec: rec.method)


def run_experiment(spec: ExperimentSpec) -> List[SummaryRecord]:
    """Run ``spec`` and summarize per method.

    Failed runs (solver errors or no convergence within the cap) are counted
    in ``failures`` and left out of the quantiles.
    """
    cells = run_replications(spec)
    return summarize(cells, [label for label, _ in spec.methods])


def estimate_rate(trace) -> Tuple[float, List[float]]:
    """Residual ratios ``|G(x_{k+1})| / |G(x_k)|`` and the geometric mean of the last five.

    ``trace`` is a sequence of :class:`~mmaccel.core.TraceRecord` or of
    residual norms. Ratios with a zero denominator are skipped.
    """
    norms = [float(getattr(t, "residual_norm", t)) for t in trace]
    if len(norms) < 4:
        raise ValueError(f"need at least 4 iterates to estimate a rate, got {len(norms)}")
    ratios = [b / a for a, b in zip(norms, norms[1:]) if a > 0.0]
    tail = ratios[-5:]
    if not tail or any(r <= 0.0 for r in tail):
        return 0.0, ratios
    return float(np.exp(np.mean(np.log(tail)))), ratios


def _fmt(v: Optional[float]) -> str:
    return "" if v is None else "%.17g" % v


def _open_for_write(path):
    path = Path(path)
    try:
        return path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def export_results(records: Sequence[SummaryRecord], fmt: str, path, include_elapsed: bool = True) -> None:
    """Write summaries as CSV (one row per method and metric) or JSON.

    The CSV ``replications`` column counts the runs the quantiles were taken
    over, i.e. the successful ones.
    """
    records = sorted(records, key=lambda rec: rec.method)
    metrics = [m for m in METRICS if include_elapsed or m != "elapsed"]
    if fmt == "csv":
        with _open_for_write(path) as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(CSV_HEADER)
            for rec in records:
                for name in sorted(metrics):
                    q = rec.metrics.get(name)
                    cols = [_fmt(v) for v in q] if q is not None else [""] * 5
                    w.writerow([rec.method, name, *cols, rec.successes])
    elif fmt == "json":
        payload = []
        for rec in records:
            d = rec.to_dict()
            d["metrics"] = {k: v for k, v in sorted(d["metrics"].items()) if k in metrics}
            payload.append(d)
        with _open_for_write(path) as fh:
            json.dump(payload, fh, indent=2)
            fh.write("\n")
    else:
        raise ValueError(f"format must be 'csv' or 'json', got {fmt!r}")


def load_results_json(path) -> List[SummaryRecord]:
    with open(path, encoding="utf-8") as fh:
        return [SummaryRecord.from_dict(d) for d in json.load(fh)]


def export_trace(report: SolveReport, path) -> None:
    """Write ``iteration,x_1..x_p,residual_norm,objective``, one row per iterate."""
    if not report.trace:
        raise ValueError("report has no trace; solve with record_trace=True")
    p = report.trace[0].iterate.size
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["iteration", *[f"x_{i + 1}" for i in range(p)], "residual_norm", "objective"])
        for k, rec in enumerate(report.trace):
            w.writerow([k, *[_fmt(float(v)) for v in rec.iterate], _fmt(rec.residual_norm), _fmt(rec.objective)])
