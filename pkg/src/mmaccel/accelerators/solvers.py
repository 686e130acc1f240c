"""The six solver engines and the shared monotonicity safeguard."""

import time
from typing import Callable, Optional, Tuple

import numpy as np

from ..core import (
    EvalCounter,
    FixedPointProblem,
    SolveReport,
    SolverConfig,
    TraceRecord,
    check_convergence,
    evaluate_map,
    evaluate_objective,
    monotone_slack,
    residual,
)
from ..exceptions import SingularUpdateError, ZeroDenominator
from ..linalg import norm2
from .updates import (
    DENOM_FLOOR,
    SecantPair,
    SecantPairBuffer,
    bqn_update_dense,
    lbqn_apply,
    lbqn_scaling,
    squarem_candidate,
    squarem_steplength,
    steplength_omega,
    zal_candidate,
)

_DEGENERATE = (ZeroDenominator, SingularUpdateError)


def _guard(problem, x_candidate, fallback, counter, f_current, check_objective):
    """Return ``(accepted, fell_back, f_accepted)``; ``f_accepted`` may be None."""
    ok = np.all(np.isfinite(x_candidate)) and problem.valid(x_candidate)
    f_cand = None
    if ok and check_objective:
        f_cand = evaluate_objective(problem, x_candidate, counter)
        ok = np.isfinite(f_cand) and f_cand <= f_current + monotone_slack(f_current)
    if ok:
        return x_candidate, False, f_cand
    return fallback, True, None


def apply_safeguard(
    problem: FixedPointProblem,
    x_current,
    x_candidate,
    ffx,
    counter: EvalCounter,
    f_current: Optional[float] = None,
) -> Tuple[np.ndarray, bool]:
    """Accept ``x_candidate`` if it is valid and does not increase the objective.

    Otherwise return ``ffx`` (two plain MM steps from ``x_current``, already
    computed by the caller) and flag the fallback.
    """
    check = problem.objective is not None
    if check and f_current is None:
        f_current = evaluate_objective(problem, x_current, counter)
    accepted, fell_back, _ = _guard(problem, x_candidate, ffx, counter, f_current, check)
    return accepted, fell_back


class _Run:
    """Bookkeeping shared by every solver: counters, trace, objective cache."""

    def __init__(self, problem: FixedPointProblem, config: SolverConfig, method: str):
        self.problem = problem
        self.config = config
        self.method = method
        self.counter = EvalCounter()
        self.iterations = 0
        self.fallbacks = 0
        self.trace = [] if config.record_trace else None
        self.check_objective = config.safeguard and problem.objective is not None
        self.t0 = time.perf_counter()

    def objective(self, x):
        return evaluate_objective(self.problem, x, self.counter)

    def record(self, x, rnorm, fval):
        if self.trace is None:
            return fval
        if fval is None and self.problem.objective is not None:
            fval = self.objective(x)
        self.trace.append(TraceRecord(x.copy(), rnorm, fval))
        return fval

    def done(self, x, rnorm) -> bool:
        return check_convergence(rnorm, self.config) or self.iterations >= self.config.max_iterations

    def report(self, x, rnorm, fval) -> SolveReport:
        if fval is None and self.problem.objective is not None:
            fval = self.objective(x)
        return SolveReport(
            method=self.method,
            solution=x,
            residual_norm=rnorm,
            objective_value=fval,
            iterations=self.iterations,
            f_evals=self.counter.f_evals,
            objective_evals=self.counter.objective_evals,
            fallback_count=self.fallbacks,
            converged=check_convergence(rnorm, self.config),
            elapsed_seconds=time.perf_counter() - self.t0,
            trace=self.trace,
        )


def mm_solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """Plain MM iteration ``x <- F(x)``; one map evaluation per iteration."""
    run = _Run(problem, config, "mm")
    x = np.array(x0, dtype=float)
    while True:
        g, fx = residual(problem, x, run.counter)
        rnorm = norm2(g)
        run.record(x, rnorm, None)
        if run.done(x, rnorm):
            return run.report(x, rnorm, None)
        x = fx
        run.iterations += 1


Proposal = Callable[[np.ndarray, np.ndarray, np.ndarray, SecantPair], np.ndarray]


def _extrapolation_loop(problem, config, x0, method: str, propose: Proposal) -> SolveReport:
    """Outer loop for methods that evaluate ``F(x)`` and ``F(F(x))`` per iteration.

    ``propose(x, fx, ffx, pair)`` returns the accelerated candidate, or raises
    a degenerate-update error, in which case the iteration takes ``F(F(x))``.
    """
    run = _Run(problem, config, method)
    x = np.array(x0, dtype=float)
    f_x = run.objective(x) if run.check_objective else None
    while True:
        g, fx = residual(problem, x, run.counter)
        rnorm = norm2(g)
        f_x = run.record(x, rnorm, f_x)
        if run.done(x, rnorm):
            return run.report(x, rnorm, f_x)
        ffx = evaluate_map(problem, fx, run.counter)
        pair = SecantPair(g, ffx - 2.0 * fx + x)
        try:
            candidate = propose(x, fx, ffx, pair)
        except _DEGENERATE:
            candidate = None
        if candidate is None:
            x_new, fell_back, f_new = ffx, True, None
        else:
            x_new, fell_back, f_new = _guard(problem, candidate, ffx, run.counter, f_x, run.check_objective)
        if fell_back:
            run.fallbacks += 1
            if run.check_objective:
                f_new = run.objective(x_new)
        x, f_x = x_new, f_new
        run.iterations += 1


def _scaled_step(x, direction, pair: SecantPair, scale: bool) -> np.ndarray:
    if not scale:
        return x + direction
    nd = norm2(direction)
    if nd < DENOM_FLOOR:
        raise ZeroDenominator("search direction vanishes")
    return x + (steplength_omega(pair.u, pair.v) / nd) * direction


def bqn_solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """Dense BQN with ``q = config.secant_count`` secant conditions."""
    p = problem.dimension
    q = config.secant_count
    H = -np.eye(p)
    buffer = SecantPairBuffer(q)

    def propose(x, fx, ffx, pair):
        nonlocal H
        buffer.push(pair)
        while True:
            U, V = buffer.matrices()
            try:
                H = bqn_update_dense(H, U, V)
                break
            except SingularUpdateError:
                if len(buffer) == 1:
                    buffer.clear()
                    raise
                buffer.drop_oldest()
        return _scaled_step(x, -(H @ pair.u), pair, config.step_scaling)

    return _extrapolation_loop(problem, config, x0, "bqn", propose)


def lbqn_solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """Limited-memory BQN keeping the ``memory + 1`` most recent pairs."""
    buffer = SecantPairBuffer(config.memory + 1)

    def propose(x, fx, ffx, pair):
        buffer.push(pair)
        nu = lbqn_scaling(pair)
        if nu == 0.0 or not np.isfinite(nu):
            nu = -1.0
        return _scaled_step(x, -lbqn_apply(buffer, nu, pair.u), pair, config.step_scaling)

    return _extrapolation_loop(problem, config, x0, "lbqn", propose)


def squarem_solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """First-order squared extrapolation with steplength variant 1, 2 or 3."""
    variant = config.squarem_variant

    def propose(x, fx, ffx, pair):
        alpha = squarem_steplength(pair.u, pair.v, variant)
        return squarem_candidate(x, pair.u, pair.v, alpha)

    return _extrapolation_loop(problem, config, x0, "squarem", propose)


def zal_solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """ZAL extrapolation using the ``secant_count`` most recent pairs."""
    buffer = SecantPairBuffer(config.secant_count)

    def propose(x, fx, ffx, pair):
        buffer.push(pair)
        while True:
            U, V = buffer.matrices()
            try:
                return zal_candidate(x, fx, ffx, U, V)
            except SingularUpdateError:
                if len(buffer) == 1:
                    raise
                buffer.drop_oldest()

    return _extrapolation_loop(problem, config, x0, "zal", propose)


def broyden_classic_solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """Broyden's root finder on ``G`` with secants between consecutive iterates.

    One map evaluation per iteration. ``H`` starts at ``-I`` so the first
    step is the MM step; degenerate updates and safeguard rejections also
    take the MM step ``F(x)``.
    """
    run = _Run(problem, config, "broyden-classic")
    p = problem.dimension
    H = -np.eye(p)
    x = np.array(x0, dtype=float)
    f_x = run.objective(x) if run.check_objective else None
    x_prev = g_prev = None
    while True:
        g, fx = residual(problem, x, run.counter)
        rnorm = norm2(g)
        f_x = run.record(x, rnorm, f_x)
        if run.done(x, rnorm):
            return run.report(x, rnorm, f_x)
        candidate = x - H @ g
        if g_prev is not None:
            try:
                H = bqn_update_dense(H, x - x_prev, g - g_prev)
                candidate = x - H @ g
            except SingularUpdateError:
                candidate = None
        if candidate is None:
            x_new, fell_back, f_new = fx, True, None
        else:
            x_new, fell_back, f_new = _guard(problem, candidate, fx, run.counter, f_x, run.check_objective)
        if fell_back:
            run.fallbacks += 1
            if run.check_objective:
                f_new = run.objective(x_new)
        x_prev, g_prev = x, g
        x, f_x = x_new, f_new
        run.iterations += 1
