"""Secant pairs, inverse-Jacobian updates and scalar steplengths."""

from collections import deque
from dataclasses import dataclass
from typing import Iterator, Tuple

import numpy as np

from ..exceptions import NotPositiveDefinite, SingularUpdateError, ZeroDenominator
from ..linalg import norm2, solve_spd

#: Absolute floor for every scalar denominator.
DENOM_FLOOR = 1e-30


@dataclass(frozen=True)
class SecantPair:
    """``u = F(x) - x`` and ``v = F(F(x)) - 2 F(x) + x``."""

    u: np.ndarray
    v: np.ndarray

    @classmethod
    def from_map_values(cls, x, fx, ffx) -> "SecantPair":
        return cls(fx - x, ffx - 2.0 * fx + x)


class SecantPairBuffer:
    """Bounded FIFO of secant pairs; the oldest pair is evicted first."""

    def __init__(self, capacity: int):
        if capacity < 1:
            raise ValueError(f"capacity must be >= 1, got {capacity}")
        self.capacity = capacity
        self._pairs = deque(maxlen=capacity)

    def push(self, pair: SecantPair) -> None:
        if float(pair.v @ pair.v) < DENOM_FLOOR:
            raise ZeroDenominator("refusing to store a secant pair with v = 0")
        self._pairs.append(pair)

    def drop_oldest(self) -> None:
        self._pairs.popleft()

    def clear(self) -> None:
        self._pairs.clear()

    def newest(self) -> SecantPair:
        return self._pairs[-1]

    def __len__(self) -> int:
        return len(self._pairs)

    def __iter__(self) -> Iterator[SecantPair]:
        """Oldest to newest."""
        return iter(self._pairs)

    def matrices(self) -> Tuple[np.ndarray, np.ndarray]:
        """``(U, V)`` with one column per stored pair, oldest first."""
        U = np.column_stack([pr.u for pr in self._pairs])
        V = np.column_stack([pr.v for pr in self._pairs])
        return U, V


def bqn_update_dense(H_prev, U, V) -> np.ndarray:
    """Least-change inverse-Jacobian update subject to ``H V = U``.

    Returns ``H_prev (I - V (V^T V)^{-1} V^T) + U (V^T V)^{-1} V^T``, the
    matrix closest to ``H_prev`` in Frobenius norm among those satisfying
    the multi-secant system. With one column this is the rank-two update
    ``H_prev - H_prev v v^T / v^T v + u v^T / v^T v``.

    Raises
    ------
    SingularUpdateError
        If ``V^T V`` fails the SPD factorization.
    """
    H_prev = np.asarray(H_prev, dtype=float)
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.ndim == 1:
        U, V = U[:, None], V[:, None]
    p, q = V.shape
    if U.shape != (p, q) or H_prev.shape != (p, p):
        raise ValueError(f"shape mismatch: H {H_prev.shape}, U {U.shape}, V {V.shape}")
    if q > 1 and q >= p:
        raise ValueError(f"multi-secant update needs q < p, got q={q}, p={p}")
    if q == 1:
        vv = float(V[:, 0] @ V[:, 0])
        if vv < DENOM_FLOOR:
            raise SingularUpdateError(f"v^T v = {vv:.3e} below floor")
    try:
        K = solve_spd(V.T @ V, V.T)  # (V^T V)^{-1} V^T, q x p
    except NotPositiveDefinite as exc:
        raise SingularUpdateError(f"V^T V is numerically singular: {exc}") from None
    return H_prev + (U - H_prev @ V) @ K


def steplength_omega(u, v) -> float:
    """``||u||^2 / ||v||``, the step length used with direction scaling."""
    nv = norm2(v)
    if nv < DENOM_FLOOR:
        raise ZeroDenominator(f"||v|| = {nv:.3e}")
    return float(u @ u) / nv


def lbqn_scaling(pair: SecantPair) -> float:
    """Initial inverse-Jacobian scale ``u^T v / v^T v``."""
    vv = float(pair.v @ pair.v)
    if vv < DENOM_FLOOR:
        raise ZeroDenominator(f"v^T v = {vv:.3e}")
    return float(pair.u @ pair.v) / vv


def lbqn_apply(buffer, nu: float, g) -> np.ndarray:
    """Matrix-free product ``H g`` for the limited-memory inverse Jacobian.

    ``H`` is ``nu * I`` updated once per stored pair, oldest first, by the
    rank-two rule of :func:`bqn_update_dense`. Unrolled, that is a single
    newest-to-oldest sweep projecting ``g`` off each ``v`` and collecting
    the matching ``u`` components.
    """
    t = np.array(g, dtype=float)
    acc = np.zeros_like(t)
    for pair in reversed(list(buffer)):
        vv = float(pair.v @ pair.v)
        if vv < DENOM_FLOOR:
            raise ZeroDenominator(f"stored pair has v^T v = {vv:.3e}")
        c = float(pair.v @ t) / vv
        t -= c * pair.v
        acc += c * pair.u
    return nu * t + acc


def squarem_steplength(u, v, variant: int) -> float:
    if variant == 1:
        vv = float(v @ v)
        if vv < DENOM_FLOOR:
            raise ZeroDenominator("v^T v vanishes")
        return float(u @ v) / vv
    if variant == 2:
        uv = float(u @ v)
        if abs(uv) < DENOM_FLOOR:
            raise ZeroDenominator("u^T v vanishes")
        return float(u @ u) / uv
    if variant == 3:
        nv = norm2(v)
        if nv < DENOM_FLOOR:
            raise ZeroDenominator("||v|| vanishes")
        return -norm2(u) / nv
    raise ValueError(f"squarem variant must be 1, 2 or 3, got {variant}")


def squarem_candidate(x, u, v, alpha: float) -> np.ndarray:
    """Squared extrapolation ``x - 2 alpha u + alpha^2 v``."""
    return x - 2.0 * alpha * u + alpha * alpha * v


def zal_coefficient(u, v) -> float:
    """Weight ``c`` in ``(1 - c) F(x) + c F(F(x))``; equals ``-u^T u / u^T v``."""
    uv = float(u @ v)
    if abs(uv) < DENOM_FLOOR:
        raise ZeroDenominator("u^T v vanishes")
    return -float(u @ u) / uv


def zal_candidate(x, fx, ffx, U, V) -> np.ndarray:
    """Extrapolated fixed point of the minimum-norm linear model of ``F``.

    The model Jacobian ``M`` has least Frobenius norm subject to
    ``M U = U + V``; the candidate solves ``y = F(x) + M (y - x)``. Columns
    of ``U``, ``V`` are oldest first and the last one belongs to ``x``.
    """
    U = np.asarray(U, dtype=float)
    V = np.asarray(V, dtype=float)
    if U.ndim == 1 or U.shape[1] == 1:
        u = U.ravel()
        c = zal_coefficient(u, np.asarray(V).ravel())
        return (1.0 - c) * fx + c * ffx
    UtV = U.T @ V
    if np.linalg.cond(UtV) > 1e12:
        raise SingularUpdateError("U^T V is numerically singular")
    u = fx - x
    return fx - (U + V) @ np.linalg.solve(UtV, U.T @ u)
