"""Extreme generalized eigenvalues of ``A x = lambda B x`` via the Rayleigh quotient.

The algorithm map is steepest ascent (or descent) on
``R(x) = x^T A x / x^T B x`` with an exact line search, followed by
normalization to the unit sphere. ``R`` is scale invariant, so
normalization does not change the objective.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..core import FixedPointProblem
from ..linalg import cholesky_spd

MODES = ("largest", "smallest")


@dataclass(frozen=True)
class RayleighInstance:
    A: np.ndarray
    B: np.ndarray
    mode: str = "largest"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be 'largest' or 'smallest', got {self.mode!r}")
        p = self.A.shape[0]
        if self.A.shape != (p, p) or self.B.shape != (p, p):
            raise ValueError(f"A and B must be square of equal size, got {self.A.shape} and {self.B.shape}")
        cholesky_spd(self.B)

    @property
    def dimension(self) -> int:
        return self.A.shape[0]


def rayleigh_quotient(x, A, B) -> float:
    return float(x @ A @ x) / float(x @ B @ x)


def rayleigh_gradient(x, A, B) -> np.ndarray:
    """``(2 / x^T B x) (A x - R(x) B x)``."""
    Ax, Bx = A @ x, B @ x
    xBx = float(x @ Bx)
    return (2.0 / xBx) * (Ax - (float(x @ Ax) / xBx) * Bx)


def exact_line_step(x, g, A, B, mode: str) -> float:
    """Step ``t`` optimizing ``R(x + t g)`` in the direction favoured by ``mode``.

    Setting the derivative of the quotient to zero leaves the quadratic
    ``a t^2 + b t + c = 0``; the better of its real roots is returned, or 0
    when neither root improves on ``R(x)`` or the roots are complex.
    """
    xAx, xAg, gAg = float(x @ A @ x), float(x @ A @ g), float(g @ A @ g)
    xBx, xBg, gBg = float(x @ B @ x), float(x @ B @ g), float(g @ B @ g)
    a = gAg * xBg - gBg * xAg
    b = gAg * xBx - gBg * xAx
    c = xAg * xBx - xBg * xAx
    if a == 0.0:
        roots = [] if b == 0.0 else [-c / b]
    else:
        disc = b * b - 4.0 * a * c
        if disc < 0.0:
            return 0.0
        # numerically stable pair of roots
        s = -0.5 * (b + math.copysign(math.sqrt(disc), b))
        roots = [s / a] + ([c / s] if s != 0.0 else [])
    sign = 1.0 if mode == "largest" else -1.0

    def value(t):
        den = xBx + 2.0 * t * xBg + t * t * gBg
        if not den > 0.0:
            return -math.inf
        return sign * (xAx + 2.0 * t * xAg + t * t * gAg) / den

    best_t, best = 0.0, value(0.0)
    for t in roots:
        if math.isfinite(t) and value(t) > best:
            best_t, best = t, value(t)
    return best_t


def rayleigh_problem(instance: RayleighInstance) -> FixedPointProblem:
    A = 0.5 * (instance.A + instance.A.T)
    B = 0.5 * (instance.B + instance.B.T)
    mode = instance.mode
    sign = -1.0 if mode == "largest" else 1.0

    def step(x):
        x = np.asarray(x, dtype=float)
        g = rayleigh_gradient(x, A, B)
        if not np.any(g):
            return x.copy()
        t = exact_line_step(x, g, A, B, mode)
        y = x + t * g
        return y / np.linalg.norm(y)

    def objective(x):
        if not is_valid(x):
            return math.inf
        return sign * rayleigh_quotient(x, A, B)

    def is_valid(x):
        return bool(np.all(np.isfinite(x)) and np.any(x))

    return FixedPointProblem(
        dimension=instance.dimension,
        map=step,
        objective=objective,
        is_valid=is_valid,
        name=f"rayleigh-{mode}",
    )


def random_rayleigh_instance(p: int, seed: int, mode: str = "largest") -> RayleighInstance:
    """``A = C + C^T`` and ``B = D D^T`` with ``C``, ``D`` standard Gaussian.

    ``B`` is badly conditioned, which gives steepest ascent its slow zig-zag
    path. Drawn from ``numpy.random.default_rng(seed)`` (PCG64), ``C`` first.
    """
    rng = np.random.default_rng(seed)
    C = rng.standard_normal((p, p))
    D = rng.standard_normal((p, p))
    return RayleighInstance(C + C.T, D @ D.T, mode)


def rayleigh_start(p: int, seed: int) -> np.ndarray:
    """Standard Gaussian start vector; the quotient ignores its scale."""
    return np.random.default_rng(seed).standard_normal(p)
