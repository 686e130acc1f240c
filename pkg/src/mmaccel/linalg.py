"""Dense linear-algebra primitives used by the solvers and problems.

Matrices are plain two-dimensional ``numpy.ndarray`` values; vectors are
one-dimensional arrays. Everything here is a pure function.
"""

from typing import Sequence

import numpy as np
import scipy.linalg

from .exceptions import NotPositiveDefinite

#: Relative pivot floor for SPD factorization, scaled by the largest diagonal entry.
PIVOT_RTOL = 1e-12

POWER_MAX_ITER = 200
POWER_RTOL = 1e-6
POWER_INFLATE = 1.01


def _as_vector(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    if a.ndim != 1:
        raise ValueError(f"expected a vector, got array of shape {a.shape}")
    return a


def dot(a, b) -> float:
    a, b = _as_vector(a), _as_vector(b)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    return float(a @ b)


def norm2(a) -> float:
    """Euclidean norm."""
    a = np.asarray(a, dtype=float).ravel()
    return float(np.sqrt(a @ a))


def matvec(M, x) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    x = _as_vector(x)
    if M.ndim != 2 or M.shape[1] != x.size:
        raise ValueError(f"dimension mismatch: matrix {M.shape} times vector of length {x.size}")
    return M @ x


def cholesky_spd(S) -> np.ndarray:
    """Lower Cholesky factor of a symmetric positive-definite matrix.

    Raises
    ------
    NotPositiveDefinite
        If the matrix is not PD or any pivot ``L[i, i]**2`` is at or below
        ``PIVOT_RTOL * max(diag(S))``.
    """
    S = np.asarray(S, dtype=float)
    if S.ndim != 2 or S.shape[0] != S.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {S.shape}")
    if not np.all(np.isfinite(S)):
        raise NotPositiveDefinite("matrix has non-finite entries")
    dmax = float(np.max(np.diag(S))) if S.size else 0.0
    if dmax <= 0.0:
        raise NotPositiveDefinite("non-positive diagonal")
    try:
        L = np.linalg.cholesky(S)
    except np.linalg.LinAlgError as exc:
        raise NotPositiveDefinite(str(exc)) from None
    pivots = np.diag(L) ** 2
    floor = PIVOT_RTOL * dmax
    if np.any(pivots <= floor):
        i = int(np.argmin(pivots))
        raise NotPositiveDefinite(f"pivot {i} = {pivots[i]:.3e} below floor {floor:.3e}")
    return L


def solve_spd(S, rhs) -> np.ndarray:
    """Solve ``S z = rhs`` for symmetric positive-definite ``S``.

    ``rhs`` may be a vector or a matrix; the result has the same shape.
    """
    L = cholesky_spd(S)
    rhs = np.asarray(rhs, dtype=float)
    if rhs.shape[0] != L.shape[0]:
        raise ValueError(f"dimension mismatch: {L.shape} vs rhs {rhs.shape}")
    return scipy.linalg.cho_solve((L, True), rhs)


def _is_pd(S) -> bool:
    try:
        np.linalg.cholesky(S)
    except np.linalg.LinAlgError:
        return False
    return True


def spectral_norm_upper_bound(A) -> float:
    """Upper bound on the spectral norm of a symmetric matrix.

    Power iteration on ``A`` from the all-ones vector estimates the largest
    eigenvalue magnitude; the estimate is inflated by 1%. The result is then
    certified by checking that ``L*I - A`` and ``L*I + A`` are both positive
    definite. If iteration stalls or the certificate fails, the Frobenius
    norm is returned instead (always a valid bound).
    """
    A = np.asarray(A, dtype=float)
    p = A.shape[0]
    if A.shape != (p, p):
        raise ValueError(f"expected a square matrix, got shape {A.shape}")
    frob = float(np.linalg.norm(A, "fro"))
    if frob == 0.0:
        return 0.0

    x = np.ones(p) / np.sqrt(p)
    y = A @ x
    if norm2(y) <= 1e-14 * frob:
        # all-ones is (numerically) in the null space; nudge it deterministically
        x = x + np.linspace(-0.5, 0.5, p) / np.sqrt(p)
        x /= norm2(x)
        y = A @ x
    est = norm2(y)
    converged = False
    for _ in range(POWER_MAX_ITER):
        ny = norm2(y)
        if ny == 0.0:
            break
        x = y / ny
        y = A @ x
        new = norm2(y)
        if abs(new - est) <= POWER_RTOL * new:
            est = new
            converged = True
            break
        est = new
    if not converged:
        return frob

    bound = POWER_INFLATE * est
    eye = np.eye(p)
    if _is_pd(bound * eye - A) and _is_pd(bound * eye + A):
        return float(min(bound, frob))
    return frob


def quantiles(data: Sequence[float], probs: Sequence[float]) -> list:
    """Sample quantiles by linear interpolation of order statistics (type 7)."""
    data = np.asarray(data, dtype=float).ravel()
    if data.size == 0:
        raise ValueError("quantiles of empty data")
    probs = np.asarray(probs, dtype=float)
    if np.any((probs < 0) | (probs > 1)):
        raise ValueError("probabilities must lie in [0, 1]")
    return [float(v) for v in np.quantile(data, probs, method="linear")]


def weighted_outer_accumulate(points, center, weights) -> np.ndarray:
    """Return ``sum_i w_i (y_i - c)(y_i - c)^T``, symmetric to the bit."""
    Y = np.atleast_2d(np.asarray(points, dtype=float))
    c = _as_vector(center)
    w = _as_vector(weights)
    if Y.shape[1] != c.size:
        raise ValueError(f"points have dimension {Y.shape[1]}, center has {c.size}")
    if Y.shape[0] != w.size:
        raise ValueError(f"{Y.shape[0]} points but {w.size} weights")
    if np.any(w < 0):
        raise ValueError("weights must be non-negative")
    D = Y - c
    S = (D * w[:, None]).T @ D
    # fl(a + b) == fl(b + a), so this is exactly symmetric
    return 0.5 * (S + S.T)
