from fractions import Fraction
from math import comb, factorial

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from k3sep.errors import InvalidIndex, InvalidInput, LedgerInconsistency
from k3sep.lattice import is_admissible_delta
from k3sep.nl_bounds import (DGIndex, chow_coeff, deg_bound_closed, deg_bound_ledger, delta_of,
                             delta_to_dg, gotzmann_r, height_bound_closed, height_bound_ledger,
                             hilbert_dims, ledger_report, log2_multinomial, normalize_dg,
                             normalize_steps)
from k3sep.tower import DOWN, EXACT, UP, TowerReal


def test_delta_to_dg_examples():
    assert delta_to_dg(9) == DGIndex(5, 3)
    assert delta_to_dg(8) == DGIndex(4, 2)
    assert delta_to_dg(3) is None
    assert delta_to_dg(1) == DGIndex(5, 4)
    with pytest.raises(InvalidInput):
        delta_to_dg(0)


@settings(max_examples=300, deadline=None)
@given(st.integers(1, 10 ** 6))
def test_delta_to_dg_roundtrip(delta):
    dg = delta_to_dg(delta)
    assert (dg is not None) == is_admissible_delta(delta)
    if dg is not None:
        assert dg.d ** 2 - 8 * dg.g + 8 == delta


def test_normalize_examples():
    assert normalize_dg(-3, 1) == DGIndex(3, 1)
    assert normalize_dg(5, 3) == DGIndex(1, 0)
    assert normalize_dg(1, 0) == DGIndex(1, 0)
    with pytest.raises(InvalidIndex):
        normalize_dg(0, 3)


@settings(max_examples=300, deadline=None)
@given(st.integers(-200, 200).filter(bool), st.integers(0, 5000))
def test_normalize_preserves_delta(d, g):
    delta = delta_of(d, g)
    for step in normalize_steps(d, g):
        assert step.delta == delta
    last = normalize_dg(d, g)
    # no further step is possible
    assert not (last.d - 4 >= 1 and last.g - last.d + 2 >= 0)


def test_gotzmann_examples():
    assert gotzmann_r(DGIndex(1, 0)) == 4
    assert gotzmann_r(DGIndex(5, 1)) == 10
    assert gotzmann_r(DGIndex(3, 0)) == 4


def test_hilbert_dims_line():
    h = hilbert_dims(DGIndex(1, 0))
    assert (h.r, h.N_r, h.p_r_plus_1, h.q_r, h.N_r_minus_4) == (4, 35, 6, 30, 1)
    assert (h.alpha, h.beta, h.alpha_prime, h.beta_prime, h.s, h.L) == (1014, 335, 869, 35, 720, 35)
    assert h.sL == 25200 <= 3 ** 15
    assert h.exponent == 446


def test_hilbert_dims_twisted_cubic_slot():
    h = hilbert_dims(DGIndex(3, 0))
    assert h.r == 4 and h.N_r == 35 and h.N_r_minus_4 == 1
    assert h.p_r_plus_1 == 16
    # q(4) = N_4 - p(4) = 35 - (3*4 + 1) = 22
    assert h.q_r == 22


def test_hilbert_dims_rejects_empty():
    with pytest.raises(LedgerInconsistency):
        hilbert_dims(DGIndex(2, 2))


def test_sL_bound_small_d():
    checked = 0
    for d in range(1, 51):
        for g in range(0, d * d // 8 + 2):
            if delta_of(d, g) <= 0:
                continue
            h = hilbert_dims(DGIndex(d, g))
            assert h.sL <= (d + 2) ** 15
            checked += 1
    assert checked > 500


def test_chow_coeff_examples():
    assert chow_coeff(1, 0, 1, 0, 0, 1) == TowerReal(0, 1, EXACT)
    assert chow_coeff(35, 1, 1, 0, 0, 2) >= 70
    assert chow_coeff(35, 1, 1, 0, 0, 2).to_float() == 70
    with pytest.raises(InvalidInput):
        chow_coeff(1, 0, 1, 1, 1, 4)


@pytest.mark.parametrize("N", range(1, 13))
def test_chow_coeff_multinomial_theorem(N):
    total = 0
    for e1 in range(N + 1):
        for e2 in range(N + 1 - e1):
            t = chow_coeff(1, 0, e1, e2, N - e1 - e2, N)
            assert t.level == 0
            total += int(t.value)
    assert total == 3 ** N


def test_chow_coeff_majorization(rng):
    for _ in range(50):
        N = rng.randint(1, 3000)
        e_eta = rng.randint(0, 1)
        e1 = rng.randint(0, N - e_eta)
        e2 = rng.randint(0, N - e_eta - e1)
        e3 = N - e_eta - e1 - e2
        L = Fraction(rng.randint(1, 100), rng.randint(1, 5))
        c = chow_coeff(L, e_eta, e1, e2, e3, N)
        with mpmath.workprec(200):
            bound = N * mpmath.log(3, 2) + mpmath.log(max(L, 1) if e_eta else 1, 2)
        assert c.to_level(1, UP).value <= bound + mpmath.mpf(2) ** -100


def test_log2_multinomial_directed():
    parts = (1, 145, 300)
    exact = factorial(446) // (factorial(145) * factorial(300))
    with mpmath.workprec(400):
        ref = mpmath.log(exact, 2)
    assert log2_multinomial(parts, UP) >= ref
    assert log2_multinomial(parts, DOWN) <= ref
    assert log2_multinomial(parts, UP) - log2_multinomial(parts, DOWN) < 1e-30


def test_deg_ledger_line():
    t = deg_bound_ledger(DGIndex(1, 0))
    exact = comb(446, 1) * comb(445, 145)
    with mpmath.workprec(400):
        ref = mpmath.log(exact, 2)
        assert t.level == 1 and t.direction == UP
        assert ref <= t.value <= ref + mpmath.mpf(2) ** -100
        assert t.value <= 446 * mpmath.log(3, 2)


def test_height_ledger_dominates_degree():
    for dg in (DGIndex(1, 0), DGIndex(4, 2), DGIndex(5, 3)):
        deg = deg_bound_ledger(dg)
        hgt = height_bound_ledger(dg)
        with mpmath.workprec(300):
            assert mpmath.mpf(hgt.to_level(1).value) >= mpmath.mpf(deg.to_level(1).value) + mpmath.log(mpmath.log(36, 2), 2) - 1e-30


def test_closed_forms():
    t = deg_bound_closed(9)
    with mpmath.workprec(300):
        lo, hi = mpmath.mpf("3.80e6"), mpmath.mpf("3.81e6")
        base = mpmath.mpf(29) ** mpmath.mpf(4.5)
        assert lo <= base <= hi
        assert t.value >= base * mpmath.log(3, 2)
        assert t.value - base * mpmath.log(3, 2) < 1e-20
        t1 = deg_bound_closed(1)
        assert abs(t1.value - mpmath.mpf(21) ** 4.5 * mpmath.log(3, 2)) < 1e-20
        h = height_bound_closed(9)
        assert h.value >= 5 * mpmath.log(69, 2) + base * mpmath.log(3, 2)


def test_closed_form_precision_tightens():
    for delta in (1, 9, 64, 1000):
        for fn in (deg_bound_closed, height_bound_closed):
            a, b, c = (fn(delta, UP, p) for p in (128, 256, 512))
            assert a.value >= b.value >= c.value
            lo = [fn(delta, DOWN, p) for p in (128, 256, 512)]
            assert lo[0].value <= lo[1].value <= lo[2].value <= c.value


def test_ledger_report_dominated():
    rows = ledger_report(64)
    assert [r.delta for r in rows] == [d for d in range(1, 65) if is_admissible_delta(d)]
    assert len(rows) == 24
    assert all(r.dominated for r in rows)
