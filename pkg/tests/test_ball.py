import random
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from k3sep.ball import (Ball, BallMatrix, dot, dyadic_to_decimal, hermitian_lambda_min_lower,
                        op_norm_lower, op_norm_upper, orthocomplement_basis, parse_decimal,
                        to_fraction)
from k3sep.errors import InvalidInput, PrecisionTooLow
from k3sep.synthetic import rational_unit

PREC = 256


def sample_point(b: Ball, rng: random.Random):
    """An exact rational point of the ball."""
    cs, sn = rational_unit(Fraction(rng.randint(-50, 50), rng.randint(1, 50)))
    s = Fraction(rng.randint(0, 1000), 1000) * to_fraction(b.rad)
    return to_fraction(b.re) + s * cs, to_fraction(b.im) + s * sn


def contains(b: Ball, z) -> bool:
    return b.contains(complex(0)) if z is None else _contains_exact(b, z)


def _contains_exact(b, z):
    dr = to_fraction(b.re) - z[0]
    di = to_fraction(b.im) - z[1]
    r = to_fraction(b.rad)
    return dr * dr + di * di <= r * r


def cmul(a, b):
    return a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0]


def test_exact_points_stay_exact():
    one = Ball.exact(1)
    p = one * one
    assert p.rad == 0 and p.re == 1 and p.im == 0
    lo, hi = Ball(0, 0, 1).abs_bounds()
    assert lo == 0 and hi == 1


def test_sum_sampling(rng):
    a = Ball.from_parts(3, 0, Fraction(1, 10), PREC)
    b = Ball.from_parts(0, 4, Fraction(1, 5), PREC)
    s = a + b
    for _ in range(100):
        x, y = sample_point(a, rng), sample_point(b, rng)
        assert _contains_exact(s, (x[0] + y[0], x[1] + y[1]))


balls = st.builds(
    lambda re, im, r: Ball.from_parts(re, im, r, 64),
    st.fractions(-10, 10, max_denominator=1000), st.fractions(-10, 10, max_denominator=1000),
    st.fractions(0, 1, max_denominator=1000),
)


@settings(max_examples=80, deadline=None)
@given(balls, balls, st.integers(0, 10 ** 6))
def test_arith_enclosure(a, b, seed):
    rng = random.Random(seed)
    x, y = sample_point(a, rng), sample_point(b, rng)
    assert _contains_exact(a + b, (x[0] + y[0], x[1] + y[1]))
    assert _contains_exact(a - b, (x[0] - y[0], x[1] - y[1]))
    assert _contains_exact(a * b, cmul(x, y))
    assert _contains_exact(a.conj(), (x[0], -x[1]))
    lo, hi = a.abs_bounds()
    m2 = x[0] ** 2 + x[1] ** 2
    assert to_fraction(lo) ** 2 <= m2 <= to_fraction(hi) ** 2
    if b.abs_lower() > 0:
        d = y[0] ** 2 + y[1] ** 2
        assert _contains_exact(b.inv(), (y[0] / d, -y[1] / d))


def test_precision_monotone_radius():
    x = Ball.exact(Fraction(1, 3), 64)
    y = Ball.exact(Fraction(1, 3), 256)
    assert (x * x * x).rad >= (y * y * y).rad


def test_serialization_roundtrip():
    b = Ball.from_parts(Fraction(1, 3), Fraction(-2, 7), Fraction(1, 1000), PREC)
    data = b.to_json()
    back = Ball.from_json(data, PREC)
    assert back.re == b.re and back.im == b.im and back.rad == b.rad
    assert parse_decimal(dyadic_to_decimal(b.re)) == to_fraction(b.re)


def test_op_norm_examples():
    I2 = BallMatrix.identity(2, PREC)
    up = op_norm_upper(I2)
    assert 1 <= up <= 2
    D = BallMatrix.from_exact([[3, 0], [0, 4]], PREC)
    assert op_norm_upper(D) >= 4
    assert op_norm_lower(BallMatrix.zeros(3, 3, PREC)) == 0
    assert op_norm_lower(I2, [1, 0]) >= 1 - Fraction(1, 2 ** 200)
    low = op_norm_lower(D, [0, 1])
    assert 3 <= low <= 4


def test_op_norm_upper_sampling(rng):
    M = [[Fraction(rng.randint(-9, 9), rng.randint(1, 5)) for _ in range(5)] for _ in range(5)]
    B = BallMatrix.from_exact(M, PREC)
    up = to_fraction(op_norm_upper(B))
    assert op_norm_lower(B) <= op_norm_upper(B)
    for _ in range(50):
        v = [Fraction(rng.randint(-9, 9)) for _ in range(5)]
        if not any(v):
            continue
        mv = [sum(M[i][j] * v[j] for j in range(5)) for i in range(5)]
        # ||Mv||^2 <= up^2 ||v||^2
        assert sum(x * x for x in mv) <= up * up * sum(x * x for x in v)


def hermitian_exact(n, rng, size=5):
    H = [[None] * n for _ in range(n)]
    for i in range(n):
        H[i][i] = (Fraction(rng.randint(-size, size)), Fraction(0))
        for j in range(i + 1, n):
            re, im = Fraction(rng.randint(-size, size), rng.randint(1, 3)), Fraction(rng.randint(-size, size), rng.randint(1, 3))
            H[i][j] = (re, im)
            H[j][i] = (re, -im)
    return H


def to_ballmatrix(H, prec=PREC):
    return BallMatrix([[Ball.from_parts(re, im, 0, prec) for re, im in row] for row in H], prec)


def test_lambda_min_small_cases():
    lam = hermitian_lambda_min_lower(BallMatrix.identity(4, PREC))
    assert Fraction(1) - Fraction(1, 2 ** (PREC - 2)) <= to_fraction(lam) <= 1
    lam = hermitian_lambda_min_lower(BallMatrix.from_exact([[2, 0], [0, 3]], PREC))
    assert Fraction(2) - Fraction(1, 2 ** (PREC - 4)) <= to_fraction(lam) <= 2


def test_lambda_min_quadratic_formula(rng):
    with mpmath.workprec(600):
        for _ in range(30):
            (a, _), (b, c) = hermitian_exact(2, rng)[0]
            d = hermitian_exact(2, rng)[1][1][0]
            H = [[(a, Fraction(0)), (b, c)], [(b, -c), (d, Fraction(0))]]
            lam = to_fraction(hermitian_lambda_min_lower(to_ballmatrix(H)))
            tr = mpmath.mpf(a.numerator) / a.denominator + mpmath.mpf(d.numerator) / d.denominator
            disc = ((mpmath.mpf((a - d).numerator) / (a - d).denominator) / 2) ** 2 \
                + mpmath.mpf((b * b + c * c).numerator) / (b * b + c * c).denominator
            exact = tr / 2 - mpmath.sqrt(disc)
            lam_mp = mpmath.mpf(lam.numerator) / lam.denominator
            assert lam_mp <= exact
            assert exact - lam_mp <= mpmath.mpf(2) ** (-(PREC - 16))


def test_lambda_min_rayleigh(rng):
    H = hermitian_exact(6, rng)
    lam = to_fraction(hermitian_lambda_min_lower(to_ballmatrix(H)))
    for _ in range(100):
        v = [(Fraction(rng.randint(-9, 9)), Fraction(rng.randint(-9, 9))) for _ in range(6)]
        nv = sum(x * x + y * y for x, y in v)
        if nv == 0:
            continue
        # v^H H v
        q = Fraction(0)
        for i in range(6):
            for j in range(6):
                hr, hi = H[i][j]
                xr, xi = v[i]
                yr, yi = v[j]
                # conj(v_i) h_ij v_j, real part
                tr, ti = hr * yr - hi * yi, hr * yi + hi * yr
                q += xr * tr + xi * ti
        assert lam * nv <= q


def test_lambda_min_errors():
    with pytest.raises(InvalidInput):
        hermitian_lambda_min_lower(BallMatrix.from_exact([[1, 2], [3, 1]], PREC))
    with pytest.raises(PrecisionTooLow):
        hermitian_lambda_min_lower(BallMatrix.from_exact([[-1, 0], [0, 1]], PREC), require_positive=True)


def test_orthocomplement_examples():
    e1 = [Ball.exact(1), Ball.exact(0)]
    out = orthocomplement_basis([e1], [[1, 0], [0, 1]], PREC)
    assert len(out) == 1
    assert out[0][0].contains_zero() and out[0][1].abs_lower() > 0

    h = [Ball.exact(1), Ball.exact(0), Ball.exact(0)]
    G = [[4, 0, 0], [0, 1, 0], [0, 0, 1]]
    out = orthocomplement_basis([h], G, PREC)
    assert len(out) == 2
    Gh = BallMatrix.from_exact(G, PREC).apply(h)
    for v in out:
        assert dot(Gh, v, PREC).contains_zero()


def test_orthocomplement_k3():
    from k3sep.lattice import standard_k3_lattice
    L = standard_k3_lattice()
    h = [Ball.exact(x) for x in L.h]
    w = [Ball.from_parts(Fraction(i % 3), Fraction(i % 5) - 2, 0, PREC) for i in range(22)]
    out = orthocomplement_basis([h, w], L.gram, PREC)
    assert len(out) == 20
    G = BallMatrix.from_exact(L.gram, PREC)
    for v in out:
        assert dot(G.apply(h), v, PREC).contains_zero()
        assert dot(G.apply(w), v, PREC).contains_zero()
