import pytest
from hypothesis import given, settings, strategies as st

from k3sep.errors import DivisibilityViolation, InvalidInput
from k3sep.lattice import is_admissible_delta
from k3sep.mp_series import (THETA_COEFFS, IntSeries, mp_degree_upper, psi_series, r21, r_n,
                             r_n_bruteforce, r_n_recursive, theta_A_B, theta_numerator, theta_series)
from k3sep.nl_bounds import deg_bound_closed
from k3sep.tower import EXACT, TowerReal


def test_A_B_small():
    A, B = theta_A_B(10)
    assert (A[0], A[1], A[2], A[4]) == (1, 2, 0, 2)
    assert (B[1], B[4]) == (-2, 2)


def test_A_minus_B_odd_squares():
    A, B = theta_A_B(100)
    for k in range(101):
        odd_square = any(n * n == k for n in range(1, 11, 2))
        assert A[k] - B[k] == (4 if odd_square else 0)


def test_printed_combination_constant_term():
    # at q = 0 both A and B equal 1, so the constant term is the coefficient sum
    assert sum(THETA_COEFFS) == -(1 << 22)
    assert theta_series(0)[0] == -1


def test_divisibility_to_500():
    T = theta_series(500)
    assert T.order == 500
    assert T[0] == -1


def test_divisibility_violation_detected(monkeypatch):
    import k3sep.mp_series as mp
    bad = (4,) + THETA_COEFFS[1:]
    monkeypatch.setattr(mp, "THETA_COEFFS", bad)
    mp.theta_series.cache_clear()
    try:
        with pytest.raises(DivisibilityViolation):
            mp.theta_series(3)
    finally:
        mp.theta_series.cache_clear()


def test_theta_majorized_by_r21():
    T = theta_series(40)
    for k in range(41):
        assert abs(T[k]) <= 6 * r21(k)


def test_psi():
    P = psi_series(40)
    assert P[8] == 108 and P[32] == 108
    assert all(P[k] == 0 for k in range(8))
    assert sum(1 for c in P.coeffs if c) == 2


def test_mp_degree_classical_values():
    # independent classical counts: quartics containing a line form a divisor of
    # degree 320, quartics containing a conic one of degree 5016
    assert mp_degree_upper(9) == 320
    assert mp_degree_upper(12) == 5016
    assert mp_degree_upper(8) == theta_series(8)[8] - 108 == 0


def test_mp_degree_misc():
    assert mp_degree_upper(3) == theta_series(3)[3]
    assert not is_admissible_delta(3)
    vals = [mp_degree_upper(d) for d in (9, 17, 25)]
    assert vals[0] < vals[1] < vals[2]
    for d, v in zip((9, 17, 25), vals):
        assert v <= 6 * r21(d) + 108
    with pytest.raises(InvalidInput):
        mp_degree_upper(10, 5)
    assert mp_degree_upper(9, 50) == 320


def test_mp_below_closed_form():
    for d in range(1, 41):
        if is_admissible_delta(d):
            v = mp_degree_upper(d)
            assert TowerReal(0, max(v, 1), EXACT) <= deg_bound_closed(d)


def test_r21_small():
    assert [r21(k) for k in range(4)] == [1, 42, 840, 10640]


@pytest.mark.parametrize("k", range(7))
def test_r21_bruteforce(k):
    assert r21(k) == r_n_bruteforce(k, 21)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 30), st.integers(1, 8))
def test_r_n_recursive(k, dim):
    assert r_n(k, dim) == r_n_recursive(k, dim)


def test_r4_jacobi():
    # Jacobi: r_4(k) = 8 * sum of divisors of k not divisible by 4
    for k in range(1, 60):
        s = sum(d for d in range(1, k + 1) if k % d == 0 and d % 4)
        assert r_n(k, 4) == 8 * s


def test_series_arithmetic():
    A, B = theta_A_B(20)
    assert (A * B).coeffs == (B * A).coeffs
    assert (A ** 3).coeffs == (A * A * A).coeffs
    assert (A + B - B).coeffs == A.coeffs
    with pytest.raises(InvalidInput):
        A + theta_A_B(10)[0]
    num = theta_numerator(30)
    assert num.scale(1).coeffs == num.coeffs
    # the Horner evaluation agrees with the literal sum of products
    A30, B30 = theta_A_B(30)
    lit = IntSeries.zero(30)
    for b, c in enumerate(THETA_COEFFS):
        if c:
            lit = lit + ((A30 ** (21 - b)) * (B30 ** b)).scale(c)
    assert lit.coeffs == num.coeffs
