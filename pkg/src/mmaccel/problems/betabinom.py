"""Zero-truncated beta-binomial MLE for the Lidwell-Somerville cold data.

Parameters are packed as ``(pi, alpha)``: ``pi`` is the mean success
probability and ``alpha`` the overdispersion, so that

    d(x) = C(m, x) prod_{j<x} (pi + j alpha) prod_{j<m-x} (1 - pi + j alpha)
           / prod_{j<m} (1 + j alpha).

The MM map treats the unobserved zero-count households as missing data:
each observed household contributes ``w0 = d(0) / (1 - d(0))`` expected
zero-households to the pseudocounts, and the beta-binomial log-likelihood is
then minorized term by term.
"""

import math
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from ..core import FixedPointProblem

PI_FLOOR = 1e-12
ALPHA_FLOOR = 1e-12

_LIDWELL = {
    "a": (15, 5, 2, 2),
    "b": (12, 6, 7, 6),
    "c": (10, 9, 2, 7),
    "d": (26, 15, 3, 9),
}

#: Household types: adults only; adults and school children; adults and
#: infants; adults, school children and infants.
CATEGORIES = tuple(_LIDWELL)


@dataclass(frozen=True)
class ColdIncidenceData:
    """Number of households with 1..m cold cases (households of size ``m``)."""

    household_category: str
    counts: Tuple[int, ...]
    m: int = 4

    def __post_init__(self):
        if len(self.counts) != self.m:
            raise ValueError(f"expected {self.m} counts, got {len(self.counts)}")
        if any(c < 0 for c in self.counts):
            raise ValueError("counts must be non-negative")

    @property
    def n(self) -> int:
        return sum(self.counts)

    def observations(self) -> dict:
        """``{cases: households}`` for cases 1..m."""
        return {x: c for x, c in enumerate(self.counts, start=1)}


def lidwell_data(category: str) -> ColdIncidenceData:
    try:
        counts = _LIDWELL[category]
    except KeyError:
        raise ValueError(f"unknown household category {category!r}; expected one of a, b, c, d") from None
    return ColdIncidenceData(category, counts)


def _check_params(pi: float, alpha: float) -> None:
    if not (0.0 < pi < 1.0) or not alpha > 0.0:
        raise ValueError(f"beta-binomial parameters out of domain: pi={pi}, alpha={alpha}")


def _clamp(pi: float, alpha: float) -> Tuple[float, float]:
    return min(max(pi, PI_FLOOR), 1.0 - PI_FLOOR), max(alpha, ALPHA_FLOOR)


def _log_p0(m: int, pi: float, alpha: float) -> float:
    # each factor of d(0) is 1 - pi / (1 + j alpha); log1p keeps 1 - d(0) accurate as pi -> 0
    return sum(math.log1p(-pi / (1.0 + j * alpha)) for j in range(m))


def _log_pmf(x: int, m: int, pi: float, alpha: float) -> float:
    out = math.log(math.comb(m, x))
    for j in range(x):
        out += math.log(pi + j * alpha)
    for j in range(m - x):
        out += math.log(1.0 - pi + j * alpha)
    for j in range(m):
        out -= math.log(1.0 + j * alpha)
    return out


def beta_binomial_pmf(x: int, m: int, params) -> float:
    """Beta-binomial probability of ``x`` successes in ``m`` trials at ``params = (pi, alpha)``."""
    pi, alpha = float(params[0]), float(params[1])
    _check_params(pi, alpha)
    if not 0 <= x <= m:
        raise ValueError(f"x must lie in 0..{m}, got {x}")
    return math.exp(_log_pmf(x, m, pi, alpha))


def trunc_bb_neg_loglik(params, data: ColdIncidenceData) -> float:
    """``-sum_i ln[d(x_i) / (1 - d(0))]`` over the observed households."""
    pi, alpha = float(params[0]), float(params[1])
    _check_params(pi, alpha)
    pi, alpha = _clamp(pi, alpha)
    m = data.m
    log_tail = math.log(-math.expm1(_log_p0(m, pi, alpha)))
    return -sum(c * (_log_pmf(x, m, pi, alpha) - log_tail) for x, c in data.observations().items())


def trunc_bb_problem(data: ColdIncidenceData) -> FixedPointProblem:
    m, n = data.m, data.n
    obs = data.observations()
    s1 = [sum(c for x, c in obs.items() if x >= j + 1) for j in range(m)]
    s2_observed = [sum(c for x, c in obs.items() if x <= m - j - 1) for j in range(m)]

    def step(theta):
        pi, alpha = _clamp(float(theta[0]), float(theta[1]))
        log_d0 = _log_p0(m, pi, alpha)
        w0 = math.exp(log_d0) / -math.expm1(log_d0)
        r = n * (1.0 + w0)
        num_alpha = den_alpha = num_pi = rest_pi = 0.0
        for j in range(m):
            a = pi + j * alpha
            b = 1.0 - pi + j * alpha
            s2 = s2_observed[j] + n * w0
            num_alpha += j * alpha * (s1[j] / a + s2 / b)
            den_alpha += r * j / (1.0 + j * alpha)
            num_pi += s1[j] * pi / a
            rest_pi += s2 * (1.0 - pi) / b
        return np.array([num_pi / (num_pi + rest_pi), num_alpha / den_alpha])

    def objective(theta):
        if not is_valid(theta):
            return math.inf
        return trunc_bb_neg_loglik(theta, data)

    def is_valid(theta):
        return bool(0.0 < theta[0] < 1.0 and theta[1] > 0.0)

    return FixedPointProblem(
        dimension=2,
        map=step,
        objective=objective,
        is_valid=is_valid,
        name=f"trunc-bb-{data.household_category}",
    )


TRUNC_BB_START = np.array([0.5, 1.0])
