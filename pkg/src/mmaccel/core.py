"""Problem and solver abstractions, evaluation accounting, and method dispatch."""

from dataclasses import dataclass, replace
from typing import Callable, List, Optional

import numpy as np

from .exceptions import ConfigError, MapEvaluationError

METHODS = ("mm", "bqn", "lbqn", "squarem", "zal", "broyden-classic")


@dataclass(frozen=True)
class FixedPointProblem:
    """A fixed-point problem ``x = F(x)`` arising from an MM algorithm.

    Attributes
    ----------
    dimension : int
        Length ``p`` of the parameter vector.
    map : callable
        One MM update, ``x -> F(x)``.
    objective : callable, optional
        The function the MM map descends (negative log-likelihood for MLE
        problems). Needed by the monotonicity safeguard.
    is_valid : callable, optional
        Domain membership predicate, e.g. positive-definiteness of an
        embedded covariance matrix.
    name : str
    """

    dimension: int
    map: Callable[[np.ndarray], np.ndarray]
    objective: Optional[Callable[[np.ndarray], float]] = None
    is_valid: Optional[Callable[[np.ndarray], bool]] = None
    name: str = "problem"

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise ValueError(f"dimension must be positive, got {self.dimension}")

    def valid(self, x) -> bool:
        return self.is_valid is None or bool(self.is_valid(x))


@dataclass
class SolverConfig:
    method: str = "bqn"
    tolerance: float = 1e-7
    max_iterations: int = 100_000
    secant_count: int = 1
    memory: int = 5
    squarem_variant: int = 3
    safeguard: bool = True
    step_scaling: bool = True
    record_trace: bool = False
    rng_seed: int = 0

    def with_(self, **changes) -> "SolverConfig":
        return replace(self, **changes)

    def validate(self, problem: Optional[FixedPointProblem] = None) -> None:
        """Raise :class:`ConfigError` for invalid settings or combinations."""
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r}; expected one of {', '.join(METHODS)}")
        if not self.tolerance > 0:
            raise ConfigError(f"tolerance must be positive, got {self.tolerance}")
        if int(self.max_iterations) < 1:
            raise ConfigError(f"max_iterations must be positive, got {self.max_iterations}")
        if int(self.secant_count) < 1:
            raise ConfigError(f"secant_count must be >= 1, got {self.secant_count}")
        if int(self.memory) < 0:
            raise ConfigError(f"memory must be >= 0, got {self.memory}")
        if self.squarem_variant not in (1, 2, 3):
            raise ConfigError(f"squarem_variant must be 1, 2 or 3, got {self.squarem_variant}")
        if self.rng_seed < 0:
            raise ConfigError("rng_seed must be unsigned")
        if problem is None:
            return
        if self.safeguard and problem.objective is None:
            raise ConfigError(f"safeguard requires an objective, but problem {problem.name!r} has none")
        if self.method == "bqn" and self.secant_count > 1 and self.secant_count >= problem.dimension:
            raise ConfigError(
                f"multi-secant BQN needs secant_count < dimension ({self.secant_count} >= {problem.dimension})"
            )


@dataclass
class TraceRecord:
    iterate: np.ndarray
    residual_norm: float
    objective: Optional[float]


@dataclass
class SolveReport:
    method: str
    solution: np.ndarray
    residual_norm: float
    objective_value: Optional[float]
    iterations: int
    f_evals: int
    objective_evals: int
    fallback_count: int
    converged: bool
    elapsed_seconds: float = 0.0
    trace: Optional[List[TraceRecord]] = None

    def scalars(self) -> dict:
        """All scalar fields, JSON-friendly."""
        return {
            "method": self.method,
            "solution": [float(v) for v in self.solution],
            "residual_norm": float(self.residual_norm),
            "objective_value": None if self.objective_value is None else float(self.objective_value),
            "iterations": int(self.iterations),
            "f_evals": int(self.f_evals),
            "objective_evals": int(self.objective_evals),
            "fallback_count": int(self.fallback_count),
            "converged": bool(self.converged),
            "elapsed_seconds": float(self.elapsed_seconds),
        }


@dataclass
class EvalCounter:
    f_evals: int = 0
    objective_evals: int = 0


def evaluate_map(problem: FixedPointProblem, x: np.ndarray, counter: EvalCounter) -> np.ndarray:
    """Evaluate ``F(x)``, counting the call and rejecting non-finite output."""
    counter.f_evals += 1
    fx = np.asarray(problem.map(x), dtype=float)
    if fx.shape != (problem.dimension,):
        raise MapEvaluationError(
            f"{problem.name}: map returned shape {fx.shape}, expected ({problem.dimension},)"
        )
    bad = ~np.isfinite(fx)
    if bad.any():
        i = int(np.flatnonzero(bad)[0])
        raise MapEvaluationError(f"{problem.name}: map output coordinate {i} is {fx[i]}", coordinate=i)
    return fx


def evaluate_objective(problem: FixedPointProblem, x: np.ndarray, counter: EvalCounter) -> float:
    counter.objective_evals += 1
    return float(problem.objective(x))


def residual(problem: FixedPointProblem, x, counter: EvalCounter):
    """Return ``(G(x), F(x))`` where ``G(x) = F(x) - x``."""
    x = np.asarray(x, dtype=float)
    fx = evaluate_map(problem, x, counter)
    return fx - x, fx


def check_convergence(residual_norm: float, config: SolverConfig) -> bool:
    return residual_norm <= config.tolerance


def monotone_slack(fx: float) -> float:
    """Allowed objective increase when checking monotonicity at value ``fx``."""
    return 1e-10 * (1.0 + abs(fx))


def solve(problem: FixedPointProblem, config: SolverConfig, x0) -> SolveReport:
    """Run the configured accelerator from ``x0``.

    Raises
    ------
    ConfigError
        Invalid configuration, wrong ``x0`` length, or invalid ``x0``.
    MapEvaluationError, SingularUpdateError
        Propagated from the map or the accelerator.
    """
    from . import accelerators

    config.validate(problem)
    x0 = np.array(x0, dtype=float).ravel()
    if x0.size != problem.dimension:
        raise ConfigError(f"x0 has length {x0.size}, problem dimension is {problem.dimension}")
    if not problem.valid(x0):
        raise ConfigError(f"x0 is outside the domain of problem {problem.name!r}")
    return accelerators.SOLVERS[config.method](problem, config, x0)
