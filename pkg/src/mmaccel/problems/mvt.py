"""Location and scatter MLE for the multivariate t with known degrees of freedom.

Parameters are packed as ``mu`` followed by the lower triangle of ``Sigma``
in row-major order (``numpy.tril_indices``). The EM map reweights each
observation by ``(nu + p) / (nu + d_i)`` with ``d_i`` its Mahalanobis
distance; the parameter-expanded variant divides the scatter update by the
sum of the weights instead of ``N``.
"""

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.special import gammaln

from ..core import FixedPointProblem
from ..exceptions import MapEvaluationError, NotPositiveDefinite
from ..linalg import cholesky_spd, weighted_outer_accumulate


@dataclass(frozen=True)
class MvtParams:
    mu: np.ndarray
    sigma: np.ndarray

    @property
    def p(self) -> int:
        return self.mu.size

    def pack(self) -> np.ndarray:
        rows, cols = np.tril_indices(self.p)
        return np.concatenate([self.mu, self.sigma[rows, cols]])

    @classmethod
    def unpack(cls, theta, p: int) -> "MvtParams":
        theta = np.asarray(theta, dtype=float)
        if theta.size != packed_size(p):
            raise ValueError(f"expected {packed_size(p)} parameters for p={p}, got {theta.size}")
        rows, cols = np.tril_indices(p)
        sigma = np.zeros((p, p))
        sigma[rows, cols] = theta[p:]
        sigma[cols, rows] = theta[p:]
        return cls(theta[:p].copy(), sigma)


def packed_size(p: int) -> int:
    return p + p * (p + 1) // 2


def _mahalanobis(Y, mu, L) -> np.ndarray:
    Z = scipy.linalg.solve_triangular(L, (Y - mu).T, lower=True)
    return np.einsum("ij,ij->j", Z, Z)


def mvt_weights(data, params: MvtParams, nu: float) -> np.ndarray:
    """E-step weights ``(nu + p) / (nu + d_i)``."""
    Y = np.atleast_2d(np.asarray(data, dtype=float))
    L = cholesky_spd(params.sigma)
    return (nu + params.p) / (nu + _mahalanobis(Y, params.mu, L))


def mvt_neg_loglik(params: MvtParams, data, nu: float) -> float:
    """Exact negative log-likelihood, log-gamma constants included.

    Raises
    ------
    NotPositiveDefinite
        If ``params.sigma`` is not SPD.
    """
    Y = np.atleast_2d(np.asarray(data, dtype=float))
    n, p = Y.shape
    L = cholesky_spd(params.sigma)
    d = _mahalanobis(Y, params.mu, L)
    logdet = 2.0 * float(np.sum(np.log(np.diag(L))))
    const = gammaln((nu + p) / 2.0) - gammaln(nu / 2.0) - 0.5 * p * math.log(nu * math.pi)
    loglik = n * (const - 0.5 * logdet) - 0.5 * (nu + p) * float(np.sum(np.log1p(d / nu)))
    return -loglik


def mvt_problem(data, nu: float, px_variant: bool = False) -> FixedPointProblem:
    Y = np.atleast_2d(np.asarray(data, dtype=float))
    n, p = Y.shape
    if n <= p:
        raise ValueError(f"need more observations than dimensions, got N={n}, p={p}")
    if not np.all(np.isfinite(Y)):
        raise ValueError("data must be finite")
    if not nu > 0:
        raise ValueError(f"nu must be positive, got {nu}")

    def step(theta):
        params = MvtParams.unpack(theta, p)
        try:
            L = cholesky_spd(params.sigma)
        except NotPositiveDefinite as exc:
            raise MapEvaluationError(f"Sigma is not positive definite: {exc}") from None
        w = (nu + p) / (nu + _mahalanobis(Y, params.mu, L))
        mu = (w @ Y) / w.sum()
        denom = w.sum() if px_variant else n
        sigma = weighted_outer_accumulate(Y, mu, w) / denom
        return MvtParams(mu, sigma).pack()

    def objective(theta):
        if not is_valid(theta):
            return math.inf
        return mvt_neg_loglik(MvtParams.unpack(theta, p), Y, nu)

    def is_valid(theta):
        if not np.all(np.isfinite(theta)):
            return False
        try:
            cholesky_spd(MvtParams.unpack(theta, p).sigma)
        except NotPositiveDefinite:
            return False
        return True

    return FixedPointProblem(
        dimension=packed_size(p),
        map=step,
        objective=objective,
        is_valid=is_valid,
        name="mvt-px" if px_variant else "mvt",
    )


def mvt_start(data) -> np.ndarray:
    """Sample mean and sample covariance (divisor ``N``), packed."""
    Y = np.atleast_2d(np.asarray(data, dtype=float))
    mu = Y.mean(axis=0)
    sigma = weighted_outer_accumulate(Y, mu, np.ones(Y.shape[0])) / Y.shape[0]
    return MvtParams(mu, sigma).pack()


def simulate_mvt_data(n: int = 200, p: int = 25, nu: float = 1.0, seed: int = 0) -> np.ndarray:
    """Draw ``n`` points from a centred multivariate t with scatter ``0.5**|i-j|``.

    Uses ``numpy.random.default_rng(seed)`` (PCG64): first the ``n x p``
    standard normals, then the ``n`` chi-square mixing variables.
    """
    rng = np.random.default_rng(seed)
    idx = np.arange(p)
    scatter = 0.5 ** np.abs(idx[:, None] - idx[None, :])
    Z = rng.standard_normal((n, p)) @ np.linalg.cholesky(scatter).T
    chi2 = rng.chisquare(nu, size=n)
    return Z / np.sqrt(chi2 / nu)[:, None]
