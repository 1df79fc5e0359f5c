import dataclasses
import json
import random
from fractions import Fraction

import gmpy2
import mpmath
import pytest
from gmpy2 import mpfr

from k3sep.ball import Ball, BallMatrix, to_fraction
from k3sep.errors import (ChainViolation, InvalidInput, OmegaConstraintViolated, ParseError,
                          PrecisionTooLow, ShapeMismatch)
from k3sep.lattice import discriminant, standard_k3_lattice
from k3sep.pipeline import (SMALE_THRESHOLD, Verdict, _log2_c_required, assemble_constants,
                            below_epsilon, chain_dominated, chain_requirement, classify,
                            constants_from_json, constants_to_json, decide, derivative_matrix,
                            lemma_constant_C, liouville_growth_check, liouville_partial_sum,
                            load_period_data, log2_inverse_epsilon, make_period_data, omega_from_A,
                            period_matrix_from_json, period_matrix_to_json, required_bits,
                            save_period_matrix, smale_alpha_test, smale_beta_gamma,
                            weil_height_rational)
from k3sep.pipeline import test_constants as make_test_constants
from k3sep.polyring import QPoly, fermat_quartic, monomial_index, multiply, to_records
from k3sep.synthetic import (cheap_fixture, cheap_period_matrix, full_fixture, random_class,
                             random_omega, random_planted_class)
from k3sep.tower import DOWN, EXACT, UP, TowerReal

L = standard_k3_lattice()


@pytest.fixture(scope="module")
def full():
    rng = random.Random(11)
    planted = random_planted_class(L, rng)
    fx = full_fixture(rng, planted=[planted])
    return fx, planted


@pytest.fixture(scope="module")
def consts(full):
    return assemble_constants(full[0].period)


# ---------------------------------------------------------------- period data

def test_omega_constraints_hold_on_fixture(full):
    fx, _ = full
    P = fx.period
    for (re, im), b in zip(fx.omega.pairings, P.omega):
        assert b.contains(complex(0)) is False or (re == 0 and im == 0)
        assert _contains(b, re, im)


def _contains(b, re, im):
    dr = to_fraction(b.re) - re
    di = to_fraction(b.im) - im
    return dr * dr + di * di <= to_fraction(b.rad) ** 2


def test_shape_mismatch():
    rng = random.Random(1)
    fix = random_omega(rng)
    A = cheap_period_matrix(fix)
    short = BallMatrix(A.entries[:21], A.prec)
    with pytest.raises(ShapeMismatch):
        make_period_data(L, fermat_quartic(), short)


def test_h_pairing_violation():
    rng = random.Random(2)
    fix = random_omega(rng)
    A = cheap_period_matrix(fix)
    col = monomial_index(8)[(8, 0, 0, 0)]
    rows = [list(r) for r in A.entries]
    # perturb the coefficient of w^8 in the first row only
    rows[0][col] = rows[0][col] + Ball.exact(1)
    with pytest.raises(OmegaConstraintViolated) as info:
        make_period_data(L, fermat_quartic(), BallMatrix(rows, A.prec))
    assert info.value.which in ("h_pairing", "isotropy")


def test_positivity_needs_tight_radii():
    rng = random.Random(3)
    fix = random_omega(rng)
    A = cheap_period_matrix(fix, radius=Fraction(10))
    with pytest.raises((PrecisionTooLow, OmegaConstraintViolated)):
        make_period_data(L, fermat_quartic(), A)


def test_omega_linearity_and_support(full):
    P = full[0].period
    doubled = make_period_data(L, P.f, P.A.scale(2), validate=False)
    for a, b in zip(omega_from_A(P), omega_from_A(doubled)):
        assert to_fraction(b.re) == 2 * to_fraction(a.re)
        assert to_fraction(b.im) == 2 * to_fraction(a.im)
    f2 = multiply(fermat_quartic(), fermat_quartic())
    assert len(f2.coeffs) == 10
    assert sorted(set(f2.coeffs.values())) == [1, 2]


def test_period_file_roundtrip(tmp_path, full):
    P = full[0].period
    save_period_matrix(P.A, tmp_path / "periods.json", P.labels)
    (tmp_path / "f.json").write_text(json.dumps(to_records(P.f)))
    (tmp_path / "lat.json").write_text(json.dumps({"gram": [list(r) for r in L.gram], "h": list(L.h)}))
    P2 = load_period_data(tmp_path / "f.json", tmp_path / "lat.json", tmp_path / "periods.json")
    assert P2.A.entries[3][7].re == P.A.entries[3][7].re
    data = period_matrix_to_json(P.A)
    data["monomial_order"] = "lex"
    with pytest.raises(ParseError):
        period_matrix_from_json(data)


# ------------------------------------------------------------- lemma constant

def test_lemma_constant_on_fixture(full):
    C = lemma_constant_C(full[0].period)
    with mpmath.workprec(300):
        ref = mpmath.sqrt(mpmath.mpf(1) / 35) / 2
        c = mpmath.mpf(to_fraction(C).numerator) / to_fraction(C).denominator
        assert c <= ref
        assert ref - c < mpmath.mpf(2) ** -150


def test_lemma_constant_phase_invariance(full):
    P = full[0].period
    # multiply A by the unit 3/5 + 4/5 i
    u = Ball.from_parts(Fraction(3, 5), Fraction(4, 5), 0, P.prec)
    rows = [[b * u for b in r] for r in P.A.entries]
    P2 = make_period_data(L, P.f, BallMatrix(rows, P.prec))
    a, b = lemma_constant_C(P), lemma_constant_C(P2)
    assert abs(to_fraction(a) - to_fraction(b)) < Fraction(1, 2 ** 150)


def test_lemma_constant_degenerate():
    fx = full_fixture(random.Random(5), degenerate=True)
    with pytest.raises(PrecisionTooLow):
        lemma_constant_C(fx.period)


def test_derivative_matrix_relation(full):
    # sum_m f_m (m f) = f^2, so D applied to the coefficient vector of f gives -omega
    P = full[0].period
    D = derivative_matrix(P)
    from k3sep.polyring import monomial_basis
    cf = [Ball.exact(P.f.coeffs.get(m, 0)) for m in monomial_basis(4)]
    for got, want in zip(D.apply(cf), P.omega):
        assert (got + want).contains_zero()


# ------------------------------------------------------------------ constants

def test_constants_fields(consts):
    assert consts.C_f == gmpy2.context(precision=256, round=gmpy2.RoundUp).div(2, consts.C_lemma)
    assert consts.eps_f > 0 and consts.Gamma_up >= 1
    assert not consts.test_mode
    for delta in (1, 4, 8, 9, 16, 64, 1000):
        assert chain_dominated(delta, consts)
    # 1/eps(Delta) beats 1/eps_f and C_f for every Delta
    t = log2_inverse_epsilon(1, consts, DOWN)
    lg_eps = gmpy2.log2(consts.eps_f)
    assert t > TowerReal(0, 2 - lg_eps, UP)
    assert t > TowerReal(0, gmpy2.log2(consts.C_f) + 2, UP)


def test_weil_height():
    assert weil_height_rational(fermat_quartic()) == (1, 0)
    f = QPoly(4, {(4, 0, 0, 0): Fraction(1, 2), (0, 4, 0, 0): Fraction(3, 4)})
    D, H = weil_height_rational(f)
    with mpmath.workprec(300):
        assert D == 1 and abs(mpmath.mpf(H) - mpmath.log(3)) < mpmath.mpf(2) ** -200


def test_height_monotonicity(consts):
    lo = _log2_c_required(1, mpfr(0), consts.C_f, consts.eps_f, consts.f_one_norm, 256)
    hi = _log2_c_required(1, mpfr(1), consts.C_f, consts.eps_f, consts.f_one_norm, 256)
    assert hi > lo
    c1 = dataclasses.replace(consts, height_H=mpfr(1))
    assert chain_requirement(9, c1) > chain_requirement(9, consts)


def test_epsilon_decreasing(consts):
    prev = None
    for delta in (1, 4, 8, 9, 12, 16, 17, 24, 25):
        t = log2_inverse_epsilon(delta, consts)
        if prev is not None:
            assert t > prev
        prev = t


def test_required_bits_levels(consts):
    rb = required_bits(9, consts)
    assert rb.level >= 1
    small = make_test_constants(Fraction(1, 10 ** 7))
    rb = required_bits(9, small)
    assert rb.level == 0 and rb.direction == EXACT


def test_constants_json_roundtrip(consts):
    data = json.loads(json.dumps(constants_to_json(consts)))
    back = constants_from_json(data)
    for k in ("C_lemma", "Gamma_up", "C_f", "eps_f", "height_H"):
        assert getattr(back, k) == getattr(consts, k)
    assert back.log2_c == consts.log2_c
    with pytest.raises(ParseError):
        constants_from_json({"precision": 256})


def test_test_mode_rejects_small_c():
    with pytest.raises(InvalidInput):
        make_test_constants(0)


# -------------------------------------------------------------------- decide

def test_decide_hyperplane(consts, full):
    P = full[0].period
    d = decide(L.h, P, consts)
    assert d.verdict == Verdict.IN_PICARD and d.reason == "hyperplane class"
    d = decide([3 * x for x in L.h], P, consts)
    assert d.verdict == Verdict.IN_PICARD


def test_decide_full_fixture(consts, full):
    fx, planted = full
    d = decide(planted, fx.period, consts)
    assert d.verdict == Verdict.INCONCLUSIVE
    assert d.required_bits is not None and d.required_bits.level >= 1
    rng = random.Random(8)
    for _ in range(5):
        g = random_class(rng, L)
        z = fx.omega.pairing(g)
        if z == (0, 0) or discriminant(g, L) <= 0:
            continue
        assert decide(g, fx.period, consts).verdict == Verdict.NOT_IN_PICARD


def test_classify_cases():
    cs = make_test_constants(Fraction(1, 10 ** 7))
    assert classify(9, Ball.from_parts(Fraction(1, 2), 0, Fraction(1, 10)), cs).verdict == Verdict.NOT_IN_PICARD
    tiny = Ball.from_parts(0, 0, Fraction(1, 2 ** 100))
    assert classify(9, tiny, cs).verdict == Verdict.IN_PICARD
    real = make_test_constants(20)
    d = classify(9, tiny, real)
    assert d.verdict == Verdict.INCONCLUSIVE and d.required_bits.level >= 1


def test_hodge_index_branch(consts, full):
    # e2 + f2 is orthogonal to h with positive square, so Delta < 0
    g = [0] * 22
    g[2] = g[3] = 1
    assert discriminant(g, L) < 0
    d = decide(g, full[0].period, consts)
    assert d.verdict == Verdict.NOT_IN_PICARD


def test_shift_by_h_agrees():
    rng = random.Random(21)
    planted = random_planted_class(L, rng)
    P, fix = cheap_fixture(rng, Fraction(1, 2 ** 120), planted=[planted])
    cs = make_test_constants(Fraction(1, 10 ** 7))
    for g in (planted, random_class(rng, L)):
        g4 = [a + 4 * b for a, b in zip(g, L.h)]
        assert decide(g, P, cs).verdict == decide(g4, P, cs).verdict


def test_below_epsilon():
    cs = make_test_constants(Fraction(1, 10 ** 7))
    assert below_epsilon(0, 9, cs)
    assert not below_epsilon(mpfr(1), 9, cs)
    with pytest.raises(InvalidInput):
        below_epsilon(mpfr(-1), 9, cs)


# --------------------------------------------------------------------- smale

def test_smale_examples():
    r = smale_alpha_test(Fraction(1, 100), 1)
    assert r.certified and r.radius == Fraction(1, 50)
    assert not smale_alpha_test(1, 1).certified
    beta, gamma = smale_beta_gamma([Fraction(-1, 50), 1], 0)
    assert (beta, gamma) == (Fraction(1, 50), 0)
    r = smale_alpha_test(beta, gamma)
    assert r.certified and r.radius == Fraction(1, 25) and abs(Fraction(1, 50)) <= r.radius
    assert SMALE_THRESHOLD == Fraction(1, 34)


def test_smale_quadratic():
    # phi(t) = t^2 - 2 near t0 = 3/2
    beta, gamma = smale_beta_gamma([-2, 0, 1], Fraction(3, 2))
    assert beta == Fraction(1, 12) and gamma >= Fraction(1, 3)
    r = smale_alpha_test(beta, gamma)
    assert r.certified == (beta * gamma < Fraction(1, 34))
    assert (Fraction(3, 2) - r.radius) ** 2 <= 2 <= (Fraction(3, 2) + r.radius) ** 2
    # far from the root the test must decline
    beta, gamma = smale_beta_gamma([-2, 0, 1], Fraction(3))
    assert not smale_alpha_test(beta, gamma).certified


# ----------------------------------------------------------------- liouville

def test_liouville_examples():
    assert liouville_growth_check([1, 2], growth=False).ok
    r = liouville_growth_check([2, 4])
    assert not r.ok and r.index == 0 and r.reason == "growth"
    assert r.render() == "FAIL at index 0 (growth)"
    r = liouville_growth_check([2, 2], growth=False)
    assert not r.ok and r.reason == "divisibility"
    assert liouville_growth_check([2, TowerReal(2, 1024, EXACT)]).ok
    assert liouville_growth_check([1, 4, TowerReal(2, 2 ** 20, EXACT)]).ok
    assert not liouville_growth_check([2, TowerReal(2, 1023, EXACT)]).ok


def test_partial_sums():
    s = liouville_partial_sum([1, 2, 4])
    assert s.value == Fraction(7, 4) and s.u == 7
    assert liouville_partial_sum([2]).value == Fraction(1, 2)
    s = liouville_partial_sum([1, 3, 12])
    assert s.value == Fraction(17, 12) and s.u == 17
    with pytest.raises(ChainViolation):
        liouville_partial_sum([2, 3])
