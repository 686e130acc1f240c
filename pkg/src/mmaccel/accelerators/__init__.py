"""Solver engines: plain MM, BQN, L-BQN, SQUAREM, ZAL and classical Broyden."""

from .solvers import (
    apply_safeguard,
    bqn_solve,
    broyden_classic_solve,
    lbqn_solve,
    mm_solve,
    squarem_solve,
    zal_solve,
)
from .updates import (
    DENOM_FLOOR,
    SecantPair,
    SecantPairBuffer,
    bqn_update_dense,
    lbqn_apply,
    lbqn_scaling,
    squarem_candidate,
    squarem_steplength,
    steplength_omega,
    zal_candidate,
    zal_coefficient,
)

SOLVERS = {
    "mm": mm_solve,
    "bqn": bqn_solve,
    "lbqn": lbqn_solve,
    "squarem": squarem_solve,
    "zal": zal_solve,
    "broyden-classic": broyden_classic_solve,
}
