"""Quadratic minimization by Landweber's gradient-majorization MM step."""

from typing import Optional, Tuple

import numpy as np

from ..core import FixedPointProblem
from ..linalg import spectral_norm_upper_bound


def landweber_problem(A, b, lipschitz: Optional[float] = None, name: str = "quadratic") -> FixedPointProblem:
    """MM map ``theta - (A theta + b) / L`` for ``f = theta^T A theta / 2 + b^T theta``.

    ``lipschitz`` defaults to :func:`spectral_norm_upper_bound` of ``A``.
    """
    A = np.array(A, dtype=float)
    b = np.array(b, dtype=float)
    A.setflags(write=False)
    b.setflags(write=False)
    L = spectral_norm_upper_bound(A) if lipschitz is None else float(lipschitz)
    if not L > 0:
        raise ValueError("Lipschitz constant must be positive")

    def step(theta):
        return theta - (A @ theta + b) / L

    def objective(theta):
        return float(0.5 * theta @ (A @ theta) + b @ theta)

    return FixedPointProblem(dimension=b.size, map=step, objective=objective, name=name)


def random_quadratic(p: int, seed: int) -> Tuple[np.ndarray, np.ndarray]:
    """Seeded SPD matrix ``Q^T diag(d) Q`` with ``d`` log-uniform on [0.1, 10], and Gaussian ``b``."""
    if p < 1:
        raise ValueError(f"p must be positive, got {p}")
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    d = np.exp(rng.uniform(np.log(0.1), np.log(10.0), size=p))
    A = Q.T @ (d[:, None] * Q)
    A = 0.5 * (A + A.T)
    b = rng.standard_normal(p)
    return A, b


def quadratic_problem(p: int, seed: int) -> Tuple[FixedPointProblem, float]:
    """Seeded Landweber problem and the minimum objective ``-b^T A^{-1} b / 2`` by direct solve."""
    A, b = random_quadratic(p, seed)
    theta_star = np.linalg.solve(A, -b)
    minimum = float(0.5 * theta_star @ (A @ theta_star) + b @ theta_star)
    return landweber_problem(A, b), minimum


def quadratic_minimizer(p: int, seed: int) -> np.ndarray:
    A, b = random_quadratic(p, seed)
    return np.linalg.solve(A, -b)
