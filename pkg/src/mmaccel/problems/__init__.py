"""Built-in benchmark problems and a registry used by the harness and CLI.

Each registry entry builds a :class:`BenchmarkInstance`: the problem, its
default start, a seeded start sampler, and an oracle objective value when
one is available.
"""

import math
from dataclasses import dataclass
from typing import Callable, Dict, Optional

import numpy as np
import scipy.linalg

from ..core import FixedPointProblem
from .betabinom import (
    CATEGORIES,
    TRUNC_BB_START,
    ColdIncidenceData,
    beta_binomial_pmf,
    lidwell_data,
    trunc_bb_neg_loglik,
    trunc_bb_problem,
)
from .cosine import cosine_problem
from .mvt import MvtParams, mvt_neg_loglik, mvt_problem, mvt_start, mvt_weights, packed_size, simulate_mvt_data
from .quadratic import landweber_problem, quadratic_minimizer, quadratic_problem, random_quadratic
from .rayleigh import (
    MODES,
    RayleighInstance,
    random_rayleigh_instance,
    rayleigh_gradient,
    rayleigh_problem,
    rayleigh_quotient,
    rayleigh_start,
)

StartSampler = Callable[[np.random.Generator], np.ndarray]


@dataclass(frozen=True)
class BenchmarkInstance:
    problem: FixedPointProblem
    default_start: np.ndarray
    draw_start: StartSampler
    reference_objective: Optional[float] = None


def _cosine(**_) -> BenchmarkInstance:
    return BenchmarkInstance(
        cosine_problem(),
        np.array([1.0]),
        lambda rng: rng.uniform(0.0, 2.0 * math.pi, size=1),
        reference_objective=-1.0,
    )


def _quadratic(dim: int = 100, seed: int = 0, **_) -> BenchmarkInstance:
    problem, minimum = quadratic_problem(dim, seed)
    truth = quadratic_minimizer(dim, seed)
    # perturb every coordinate by normal noise of variance 1000
    return BenchmarkInstance(
        problem,
        np.zeros(dim),
        lambda rng: truth + math.sqrt(1000.0) * rng.standard_normal(dim),
        reference_objective=minimum,
    )


def _trunc_bb(dataset: str = "a", **_) -> BenchmarkInstance:
    start = TRUNC_BB_START.copy()
    return BenchmarkInstance(trunc_bb_problem(lidwell_data(dataset)), start, lambda rng: start.copy())


def _rayleigh(dim: int = 100, mode: str = "largest", seed: int = 0, **_) -> BenchmarkInstance:
    inst = random_rayleigh_instance(dim, seed, mode)
    eig = scipy.linalg.eigh(inst.A, inst.B, eigvals_only=True)
    ref = -eig[-1] if mode == "largest" else eig[0]
    return BenchmarkInstance(
        rayleigh_problem(inst),
        rayleigh_start(dim, seed + 1),
        lambda rng: rng.standard_normal(dim),
        reference_objective=float(ref),
    )


def _mvt(nu: float = 1.0, px: bool = False, seed: int = 0, **_) -> BenchmarkInstance:
    data = simulate_mvt_data(200, 25, nu, seed)
    start = mvt_start(data)
    return BenchmarkInstance(mvt_problem(data, nu, px), start, lambda rng: start.copy())


#: name -> (factory, accepted problem-specific parameters)
PROBLEMS: Dict[str, tuple] = {
    "cosine": (_cosine, ()),
    "quadratic": (_quadratic, ("dim",)),
    "trunc-bb": (_trunc_bb, ("dataset",)),
    "rayleigh": (_rayleigh, ("dim", "mode")),
    "mvt": (_mvt, ("nu", "px")),
}


def build_instance(name: str, seed: int = 0, **params) -> BenchmarkInstance:
    """Build a registered problem; ``params`` must be accepted by that problem."""
    try:
        factory, accepted = PROBLEMS[name]
    except KeyError:
        raise ValueError(f"unknown problem {name!r}; expected one of {', '.join(PROBLEMS)}") from None
    extra = set(params) - set(accepted)
    if extra:
        raise ValueError(f"problem {name!r} does not take {', '.join(sorted(extra))}")
    return factory(seed=seed, **params)


__all__ = [
    "BenchmarkInstance",
    "CATEGORIES",
    "ColdIncidenceData",
    "MODES",
    "MvtParams",
    "PROBLEMS",
    "RayleighInstance",
    "TRUNC_BB_START",
    "beta_binomial_pmf",
    "build_instance",
    "cosine_problem",
    "landweber_problem",
    "lidwell_data",
    "mvt_neg_loglik",
    "mvt_problem",
    "mvt_start",
    "mvt_weights",
    "packed_size",
    "quadratic_minimizer",
    "quadratic_problem",
    "random_quadratic",
    "random_rayleigh_instance",
    "rayleigh_gradient",
    "rayleigh_problem",
    "rayleigh_quotient",
    "rayleigh_start",
    "simulate_mvt_data",
    "trunc_bb_neg_loglik",
    "trunc_bb_problem",
]
