import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mmaccel.exceptions import NotPositiveDefinite
from mmaccel.linalg import (
    cholesky_spd,
    dot,
    matvec,
    norm2,
    quantiles,
    solve_spd,
    spectral_norm_upper_bound,
    weighted_outer_accumulate,
)


def test_dot_examples():
    assert dot([1, 0], [0, 1]) == 0
    assert dot([2, 0], [1, 1]) == 2
    assert dot([3, 4], [3, 4]) == 25


def test_dot_length_mismatch():
    with pytest.raises(ValueError):
        dot([1, 2], [1, 2, 3])


def test_norm2_examples():
    assert norm2([3, 4]) == 5
    assert norm2([0, 0, 0]) == 0
    assert norm2([1, 1, 1, 1]) == 2


def test_matvec_examples():
    np.testing.assert_array_equal(matvec(np.eye(2), [5, 7]), [5, 7])
    np.testing.assert_array_equal(matvec(np.diag([1.0, 2.0]), [1, 1]), [1, 2])
    np.testing.assert_array_equal(matvec(np.zeros((2, 2)), [3, -1]), [0, 0])
    with pytest.raises(ValueError):
        matvec(np.eye(2), [1, 2, 3])


def test_solve_spd_examples():
    rhs = np.array([1.5, -2.0, 4.0])
    np.testing.assert_array_equal(solve_spd(np.eye(3), rhs), rhs)
    np.testing.assert_allclose(solve_spd(np.diag([2.0, 4.0]), [2.0, 4.0]), [1.0, 1.0])
    with pytest.raises(NotPositiveDefinite):
        solve_spd(np.array([[1.0, 1.0], [1.0, 1.0]]), [1.0, 2.0])


def test_solve_spd_matrix_rhs():
    S = np.array([[4.0, 1.0], [1.0, 3.0]])
    R = np.array([[1.0, 0.0, 2.0], [0.0, 1.0, -1.0]])
    Z = solve_spd(S, R)
    assert Z.shape == R.shape
    np.testing.assert_allclose(S @ Z, R, atol=1e-14)


def test_cholesky_rejects_indefinite():
    with pytest.raises(NotPositiveDefinite):
        cholesky_spd(np.array([[1.0, 2.0], [2.0, 1.0]]))
    with pytest.raises(NotPositiveDefinite):
        cholesky_spd(np.diag([1.0, 1e-13]))


def test_cholesky_reconstruction():
    rng = np.random.default_rng(3)
    W = rng.standard_normal((20, 20))
    S = W @ W.T + 20 * np.eye(20)
    L = cholesky_spd(S)
    assert np.linalg.norm(L @ L.T - S) <= 1e-10 * np.linalg.norm(S)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 30), logcond=st.floats(0.0, 6.0))
def test_solve_then_matvec_reconstructs(seed, p, logcond):
    rng = np.random.default_rng(seed)
    Q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    d = np.logspace(0, logcond, p)
    S = Q @ np.diag(d) @ Q.T
    S = 0.5 * (S + S.T)
    rhs = rng.standard_normal(p)
    z = solve_spd(S, rhs)
    assert norm2(matvec(S, z) - rhs) <= 1e-10 * norm2(rhs)


def test_spectral_bound_examples():
    L = spectral_norm_upper_bound(np.diag([1.0, 2.0, 3.0]))
    assert 3.0 <= L <= 3.15
    L = spectral_norm_upper_bound(np.eye(10))
    assert 1.0 <= L <= 1.05


def test_spectral_bound_random_100():
    rng = np.random.default_rng(11)
    G = rng.standard_normal((100, 100))
    A = 0.5 * (G + G.T)
    assert spectral_norm_upper_bound(A) >= np.max(np.abs(np.linalg.eigvalsh(A)))


def test_spectral_bound_start_in_null_space():
    # all-ones is an eigenvector with eigenvalue 0
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    L = spectral_norm_upper_bound(A)
    assert 2.0 <= L <= 2.1


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), p=st.integers(1, 60))
def test_spectral_bound_is_upper_bound(seed, p):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((p, p))
    A = 0.5 * (G + G.T)
    lam = np.max(np.abs(np.linalg.eigvalsh(A)))
    L = spectral_norm_upper_bound(A)
    assert L >= lam


def test_spectral_bound_tight_with_gap():
    rng = np.random.default_rng(5)
    Q, _ = np.linalg.qr(rng.standard_normal((50, 50)))
    d = np.linspace(0.1, 5.0, 50)
    A = Q @ np.diag(d) @ Q.T
    A = 0.5 * (A + A.T)
    L = spectral_norm_upper_bound(A)
    assert 5.0 <= L <= 5.0 * 1.05


def test_quantiles_examples():
    assert quantiles([1, 2, 3, 4, 5], [0.5]) == [3]
    assert quantiles([1, 2, 3, 4], [0.25, 0.75]) == [1.75, 3.25]
    assert quantiles([7], [0, 1]) == [7, 7]
    with pytest.raises(ValueError):
        quantiles([], [0.5])


@given(st.lists(st.floats(-1e6, 1e6), min_size=1, max_size=50))
def test_quantiles_ordered(data):
    q = quantiles(data, [0, 0.25, 0.5, 0.75, 1])
    assert q == sorted(q)
    assert q[0] == min(data) and q[-1] == max(data)


def test_weighted_outer_examples():
    np.testing.assert_array_equal(weighted_outer_accumulate([[1.0, 2.0]], [1.0, 2.0], [1.0]), np.zeros((2, 2)))
    np.testing.assert_array_equal(weighted_outer_accumulate([[1.0, 0.0]], [0.0, 0.0], [2.0]), [[2.0, 0.0], [0.0, 0.0]])


def test_weighted_outer_matches_two_pass_covariance():
    rng = np.random.default_rng(0)
    Y = rng.standard_normal((100, 4))
    mu = Y.mean(axis=0)
    S = weighted_outer_accumulate(Y, mu, np.ones(100))
    oracle = np.zeros((4, 4))
    for y in Y:
        d = y - mu
        oracle += np.outer(d, d)
    np.testing.assert_allclose(S, oracle, rtol=1e-12)


@settings(max_examples=50, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 40), p=st.integers(1, 8))
def test_weighted_outer_bit_symmetric(seed, n, p):
    rng = np.random.default_rng(seed)
    S = weighted_outer_accumulate(rng.standard_normal((n, p)), rng.standard_normal(p), rng.uniform(0, 3, n))
    assert np.array_equal(S, S.T)


def test_weighted_outer_errors():
    with pytest.raises(ValueError):
        weighted_outer_accumulate([[1.0, 2.0]], [0.0], [1.0])
    with pytest.raises(ValueError):
        weighted_outer_accumulate([[1.0, 2.0]], [0.0, 0.0], [1.0, 2.0])
    with pytest.raises(ValueError):
        weighted_outer_accumulate([[1.0, 2.0]], [0.0, 0.0], [-1.0])
