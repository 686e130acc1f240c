"""Quasi-Newton acceleration of MM and other fixed-point iterations.

Solve ``x = F(x)`` for an algorithm map ``F`` with plain MM iteration, the
Broyden-type accelerators BQN and L-BQN, SQUAREM, ZAL, or classical Broyden::

    from mmaccel import SolverConfig, solve
    from mmaccel.problems import cosine_problem

    report = solve(cosine_problem(), SolverConfig(method="bqn"), [1.0])
"""

from .core import (
    METHODS,
    EvalCounter,
    FixedPointProblem,
    SolveReport,
    SolverConfig,
    TraceRecord,
    check_convergence,
    residual,
    solve,
)
from .exceptions import (
    ConfigError,
    MapEvaluationError,
    MMAccelError,
    NotPositiveDefinite,
    SingularUpdateError,
    ZeroDenominator,
)

__version__ = "0.1.0"

__all__ = [
    "METHODS",
    "ConfigError",
    "EvalCounter",
    "FixedPointProblem",
    "MMAccelError",
    "MapEvaluationError",
    "NotPositiveDefinite",
    "SingularUpdateError",
    "SolveReport",
    "SolverConfig",
    "TraceRecord",
    "ZeroDenominator",
    "check_convergence",
    "residual",
    "solve",
]
