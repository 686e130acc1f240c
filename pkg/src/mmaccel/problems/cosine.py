"""Minimizing ``cos(x)`` with the quadratic-majorizer MM step ``x + sin(x)``."""

import numpy as np

from ..core import FixedPointProblem


def _map(x):
    return x + np.sin(x)


def _objective(x):
    return float(np.cos(x[0]))


def cosine_problem() -> FixedPointProblem:
    return FixedPointProblem(dimension=1, map=_map, objective=_objective, name="cosine")
