import csv
import json
import math

import numpy as np
import pytest

from mmaccel import ConfigError, SolverConfig, solve
from mmaccel.harness import (
    CSV_HEADER,
    METRICS,
    ExperimentSpec,
    SummaryRecord,
    estimate_rate,
    export_results,
    export_trace,
    load_results_json,
    run_experiment,
    run_replications,
)
from mmaccel.linalg import spectral_norm_upper_bound
from mmaccel.problems import TRUNC_BB_START, lidwell_data, random_quadratic, trunc_bb_problem, build_instance


def _spec(**kw):
    base = dict(
        problem="quadratic",
        problem_params={"dim": 10},
        methods=[("mm", SolverConfig(method="mm")), ("bqn", SolverConfig(method="bqn"))],
        replications=5,
        base_seed=3,
    )
    base.update(kw)
    return ExperimentSpec(**base)


def test_summary_quantile_order():
    for rec in run_experiment(_spec()):
        assert rec.successes == 5 and rec.failures == 0
        for q in rec.metrics.values():
            assert list(q) == sorted(q)


def test_single_replication_degenerate_summary():
    spec = _spec(replications=1, start="fixed")
    for rec in run_experiment(spec):
        for name in ("iterations", "f_evals", "objective"):
            q = rec.metrics[name]
            assert q[0] == q[2] == q[4]


def test_starts_matched_across_methods():
    cells = run_replications(_spec())
    by_rep = {}
    for c in cells:
        by_rep.setdefault(c.replication, set()).add(c.start_hash)
    assert all(len(h) == 1 for h in by_rep.values())
    assert len({next(iter(h)) for h in by_rep.values()}) == 5


def test_quadratic_all_methods_reach_oracle():
    spec = _spec(
        problem_params={"dim": 30},
        methods=[(m, SolverConfig(method=m)) for m in ("mm", "bqn", "lbqn", "squarem", "zal", "broyden-classic")],
        replications=10,
    )
    ref = build_instance("quadratic", dim=30).reference_objective
    for rec in run_experiment(spec):
        assert rec.successes == 10
        assert abs(rec.metrics["objective"][0] - ref) <= 1e-3
        assert abs(rec.metrics["objective"][4] - ref) <= 1e-3


def test_failures_are_recorded_not_raised():
    spec = _spec(methods=[("mm", SolverConfig(method="mm", max_iterations=3))], replications=3)
    (rec,) = run_experiment(spec)
    assert rec.failures == 3 and rec.successes == 0
    assert all(q is None for q in rec.metrics.values())
    assert rec.success_fraction == 0.0


def test_solver_error_becomes_failed_cell():
    spec = _spec(problem="trunc-bb", problem_params={"dataset": "a"},
                 methods=[("bqn2", SolverConfig(method="bqn", secant_count=2))], start="fixed")
    cells = run_replications(spec)
    assert cells[0].error and "ConfigError" in cells[0].error


def test_spec_validation():
    with pytest.raises(ConfigError):
        _spec(replications=0).validate()
    with pytest.raises(ConfigError):
        _spec(methods=[("a", SolverConfig(tolerance=1e-7)), ("b", SolverConfig(tolerance=1e-5))]).validate()
    with pytest.raises(ConfigError):
        _spec(start="sometimes").validate()
    with pytest.raises(ConfigError):
        _spec(methods=[("a", SolverConfig()), ("a", SolverConfig())]).validate()


def test_threads_do_not_change_results(tmp_path):
    a = run_experiment(_spec(threads=1))
    b = run_experiment(_spec(threads=4))
    export_results(a, "csv", tmp_path / "a.csv", include_elapsed=False)
    export_results(b, "csv", tmp_path / "b.csv", include_elapsed=False)
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_rerun_exports_identical_bytes(tmp_path):
    for fmt in ("csv", "json"):
        export_results(run_experiment(_spec()), fmt, tmp_path / f"1.{fmt}", include_elapsed=False)
        export_results(run_experiment(_spec()), fmt, tmp_path / f"2.{fmt}", include_elapsed=False)
        assert (tmp_path / f"1.{fmt}").read_bytes() == (tmp_path / f"2.{fmt}").read_bytes()


def test_estimate_rate_geometric():
    rate, ratios = estimate_rate([1, 0.5, 0.25, 0.125, 0.0625, 0.03125])
    assert rate == pytest.approx(0.5)
    assert ratios == pytest.approx([0.5] * 5)
    with pytest.raises(ValueError):
        estimate_rate([1.0, 0.5, 0.25])


def test_mm_rate_inside_contraction_interval():
    A, b = random_quadratic(20, 1)
    L = spectral_norm_upper_bound(A)
    ev = np.linalg.eigvalsh(A)
    inst = build_instance("quadratic", dim=20, seed=1)
    rep = solve(inst.problem, SolverConfig(method="mm", record_trace=True), inst.draw_start(np.random.default_rng(0)))
    rate, _ = estimate_rate(rep.trace)
    assert 1 - ev[-1] / L - 0.05 <= rate <= 1 - ev[0] / L + 0.05
    rep_b = solve(inst.problem, SolverConfig(method="bqn", record_trace=True), inst.draw_start(np.random.default_rng(0)))
    assert estimate_rate(rep_b.trace)[0] < rate


def test_export_csv_schema(tmp_path):
    records = run_experiment(_spec())
    path = tmp_path / "out.csv"
    export_results(records, "csv", path)
    rows = list(csv.reader(path.open()))
    assert tuple(rows[0]) == CSV_HEADER
    assert len(rows) == len(records) * len(METRICS) + 1
    keys = [(r[0], r[1]) for r in rows[1:]]
    assert keys == sorted(keys)
    # 17 significant digits round-trip
    for r in rows[1:]:
        for v in r[2:7]:
            assert float("%.17g" % float(v)) == float(v)


def test_export_empty_csv(tmp_path):
    path = tmp_path / "empty.csv"
    export_results([], "csv", path)
    assert path.read_text() == ",".join(CSV_HEADER) + "\n"


def test_json_roundtrip(tmp_path):
    records = run_experiment(_spec(replications=2))
    path = tmp_path / "out.json"
    export_results(records[:1], "json", path)
    (back,) = load_results_json(path)
    assert back == records[0]


def test_export_errors(tmp_path):
    with pytest.raises(ValueError):
        export_results([], "xml", tmp_path / "x")
    with pytest.raises(OSError) as info:
        export_results([], "csv", tmp_path / "missing" / "x.csv")
    assert "missing" in str(info.value)


def test_export_trace(tmp_path):
    prob = trunc_bb_problem(lidwell_data("a"))
    rep = solve(prob, SolverConfig(method="bqn", record_trace=True), TRUNC_BB_START)
    path = tmp_path / "trace.csv"
    export_trace(rep, path)
    rows = list(csv.reader(path.open()))
    assert rows[0] == ["iteration", "x_1", "x_2", "residual_norm", "objective"]
    assert len(rows) == len(rep.trace) + 1
    assert abs(float(rows[-1][-1]) - 25.229) <= 5e-3


def test_export_trace_single_point(tmp_path):
    prob = trunc_bb_problem(lidwell_data("a"))
    rep = solve(prob, SolverConfig(method="bqn", record_trace=True, max_iterations=1, tolerance=1e3), TRUNC_BB_START)
    path = tmp_path / "t.csv"
    export_trace(rep, path)
    assert len(path.read_text().splitlines()) == 2


def test_export_trace_requires_trace(tmp_path):
    rep = solve(trunc_bb_problem(lidwell_data("a")), SolverConfig(method="mm", max_iterations=2), TRUNC_BB_START)
    with pytest.raises(ValueError):
        export_trace(rep, tmp_path / "t.csv")
