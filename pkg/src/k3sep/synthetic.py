"""Synthetic period data with planted ground truth.

Real period matrices come from external high-precision integration. For
testing, this module manufactures data that satisfies the period relations
exactly: omega is a rational complex class in the standard K3 lattice with
omega.h = 0, omega.omega = 0 and omega.conj(omega) > 0, and optionally
orthogonal to chosen integral classes (which then "lie in the Picard group").
All ground truth is exact rational arithmetic.

Two matrix builders are provided:

* :func:`cheap_period_matrix` puts the pairing vector in the single column of
  ``w^8`` (valid for the Fermat quartic, whose square has coefficient 1 there).
* :func:`full_fixture` builds a complete matrix whose derivative matrix makes
  the lemma form equal to ``I + (rank one)`` on E, so lambda_min = 1.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import flint

from .ball import DEFAULT_PRECISION, Ball, BallMatrix, orthocomplement_basis, to_fraction
from .exact import inverse
from .lattice import LatticeData, discriminant, standard_k3_lattice
from .pipeline import PeriodData, make_period_data
from .polyring import QPoly, fermat_quartic, monomial_basis, monomial_index, multiply

Complex = Tuple[Fraction, Fraction]

# coordinates in the standard lattice: e1 f1 | e2 f2 | e3 f3 | E8 | E8
_A0 = [0, 0, 1, 1] + [0] * 18
_B0 = [0] * 4 + [1, 1] + [0] * 16
# classes orthogonal to _A0 and _B0, used to plant algebraic classes
_PLANT_SPAN = (
    [[1] + [0] * 21,
     [0, 0, 1, -1] + [0] * 18,
     [0] * 4 + [1, -1] + [0] * 16]
    + [[0] * k + [1] + [0] * (21 - k) for k in range(6, 22)]
)


def rational_unit(t: Fraction) -> Complex:
    """A rational point on the unit circle."""
    d = 1 + t * t
    return (1 - t * t) / d, 2 * t / d


def _pair_q(x: Sequence[Fraction], y: Sequence[Fraction], L: LatticeData) -> Fraction:
    total = Fraction(0)
    for i, xi in enumerate(x):
        if xi:
            row = L.gram[i]
            total += xi * sum(row[j] * yj for j, yj in enumerate(y) if yj)
    return total


def _project_off(x: List[Fraction], span: Sequence[Sequence[int]], L: LatticeData) -> List[Fraction]:
    """x minus its component in span, orthogonal for the lattice form (span must be nondegenerate)."""
    if not span:
        return x
    k = len(span)
    M = [[Fraction(_pair_q(span[i], span[j], L)) for j in range(k)] for i in range(k)]
    rhs = [_pair_q(x, s, L) for s in span]
    Minv = inverse(M)
    coef = [sum(Minv[i][j] * rhs[j] for j in range(k)) for i in range(k)]
    out = list(x)
    for c, s in zip(coef, span):
        for i, si in enumerate(s):
            out[i] -= c * si
    return out


def _reflect(x: List[Fraction], r: List[Fraction], rr: Fraction, L: LatticeData) -> List[Fraction]:
    c = 2 * _pair_q(x, r, L) / rr
    return [xi - c * ri for xi, ri in zip(x, r)]


@dataclass(frozen=True)
class OmegaFixture:
    lattice: LatticeData
    omega: Tuple[Complex, ...]      # coordinates
    pairings: Tuple[Complex, ...]   # G omega
    planted: Tuple[Tuple[int, ...], ...]

    def pairing(self, gamma: Sequence[int]) -> Complex:
        re = sum(g * p[0] for g, p in zip(gamma, self.pairings))
        im = sum(g * p[1] for g, p in zip(gamma, self.pairings))
        return Fraction(re), Fraction(im)


def random_planted_class(L: LatticeData, rng: random.Random, size: int = 2) -> Tuple[int, ...]:
    """Nonzero combination of classes orthogonal to the base positive plane with positive discriminant."""
    while True:
        v = [0] * L.rank
        for s in rng.sample(_PLANT_SPAN, 3):
            c = rng.randint(-size, size)
            v = [a + c * b for a, b in zip(v, s)]
        if any(v) and discriminant(v, L) > 0:
            return tuple(v)


def random_omega(rng: random.Random, L: Optional[LatticeData] = None, planted: Sequence[Sequence[int]] = (),
                 reflections: int = 3, noise: int = 3) -> OmegaFixture:
    """omega = phase * scale * S(a0 + i b0), with S a product of reflections fixing h and ``planted``.

    a0 = e2 + f2 and b0 = e3 + f3 span a positive plane orthogonal to h; any
    isometry keeps a.b = 0 and a.a = b.b, so omega stays on the period quadric.
    """
    L = L or standard_k3_lattice()
    fixed = [list(L.h)] + [list(g) for g in planted]
    for g in planted:
        if _pair_q(_A0, g, L) or _pair_q(_B0, g, L):
            raise ValueError("planted classes must be orthogonal to the base plane")
    a = [Fraction(x) for x in _A0]
    b = [Fraction(x) for x in _B0]
    done = 0
    while done < reflections:
        x = [Fraction(rng.randint(-noise, noise)) for _ in range(L.rank)]
        r = _project_off(x, fixed, L)
        rr = _pair_q(r, r, L)
        if rr == 0:
            continue
        a = _reflect(a, r, rr, L)
        b = _reflect(b, r, rr, L)
        done += 1
    cs, sn = rational_unit(Fraction(rng.randint(-9, 9), rng.randint(1, 9)))
    scale = Fraction(rng.randint(1, 8), rng.randint(1, 8))
    re = [scale * (cs * x - sn * y) for x, y in zip(a, b)]
    im = [scale * (sn * x + cs * y) for x, y in zip(a, b)]
    omega = tuple(zip(re, im))
    G = L.gram
    p = tuple((sum(G[i][j] * re[j] for j in range(L.rank)), sum(G[i][j] * im[j] for j in range(L.rank)))
              for i in range(L.rank))
    return OmegaFixture(L, omega, p, tuple(tuple(g) for g in planted))


def _fermat_w8_column() -> int:
    return monomial_index(8)[(8, 0, 0, 0)]


def cheap_period_matrix(fix: OmegaFixture, radius=0, prec: int = DEFAULT_PRECISION) -> BallMatrix:
    """22 x 165 matrix that is zero except for the w^8 column, which holds the pairings.

    Every entry receives ``radius``. For the Fermat quartic A(f^2) reads the
    w^8 column with coefficient 1, so the derived omega is the planted one.
    """
    n = len(monomial_basis(8))
    col = _fermat_w8_column()
    rows = []
    for re, im in fix.pairings:
        row = [Ball.from_parts(0, 0, radius, prec) for _ in range(n)]
        row[col] = Ball.from_parts(re, im, radius, prec)
        rows.append(row)
    return BallMatrix(rows, prec)


def cheap_fixture(rng: random.Random, radius=0, prec: int = DEFAULT_PRECISION,
                  planted: Sequence[Sequence[int]] = ()) -> Tuple[PeriodData, OmegaFixture]:
    fix = random_omega(rng, planted=planted)
    A = cheap_period_matrix(fix, radius, prec)
    return make_period_data(fix.lattice, fermat_quartic(), A), fix


# ---------------------------------------------------------------------------
# full fixture with a known lemma constant

def _cayley_orthogonal(n: int, rng: random.Random, size: int = 2) -> flint.fmpq_mat:
    """(I - S)(I + S)^-1 for a random rational skew-symmetric S."""
    S = flint.fmpq_mat(n, n)
    for i in range(n):
        for j in range(i + 1, n):
            v = flint.fmpq(rng.randint(-size, size), rng.randint(1, 3))
            S[i, j] = v
            S[j, i] = -v
    I = flint.fmpq_mat(n, n, [1 if i == j else 0 for i in range(n) for j in range(n)])
    return (I - S) * (I + S).inv()


def _fermat_quartic_vector() -> List[Fraction]:
    f = fermat_quartic()
    return [f.coeffs.get(m, Fraction(0)) for m in monomial_basis(4)]


def orthonormal_rows(rng: random.Random, k: int = 20) -> List[List[Fraction]]:
    """k orthonormal rational rows of length 35, all orthogonal to the Fermat coefficient vector."""
    c = _fermat_quartic_vector()
    n = len(c)
    norm = Fraction(2)  # ||c|| for the Fermat quartic
    assert sum(x * x for x in c) == norm * norm
    u = list(c)
    u[0] -= norm
    uu = sum(x * x for x in u)
    # Householder reflection sending c to norm * e_0
    H = [[Fraction(int(i == j)) - 2 * u[i] * u[j] / uu for j in range(n)] for i in range(n)]
    rest = flint.fmpq_mat(n - 1, n, [flint.fmpq(x.numerator, x.denominator) for row in H[1:] for x in row])
    R = _cayley_orthogonal(n - 1, rng) * rest
    rows = [[Fraction(int(R[i, j].p), int(R[i, j].q)) for j in range(n)] for i in range(k)]
    return rows


def _to_fmpq_mat(rows: Sequence[Sequence[Fraction]]) -> flint.fmpq_mat:
    return flint.fmpq_mat(len(rows), len(rows[0]),
                          [flint.fmpq(x.numerator, x.denominator) for r in rows for x in r])


def _from_fmpq_mat(M: flint.fmpq_mat) -> List[List[Fraction]]:
    return [[Fraction(int(M[i, j].p), int(M[i, j].q)) for j in range(M.ncols())] for i in range(M.nrows())]


def left_inverse_mf() -> List[List[Fraction]]:
    """L with L F = I, where column m of F is the coefficient vector of m * f (Fermat)."""
    f = fermat_quartic()
    idx8 = monomial_index(8)
    basis4 = monomial_basis(4)
    F = [[Fraction(0)] * len(basis4) for _ in range(len(idx8))]
    for k, m in enumerate(basis4):
        for e, c in multiply(QPoly.monomial(m), f).coeffs.items():
            F[idx8[e]][k] = c
    Fm = _to_fmpq_mat(F)
    Ft = Fm.transpose()
    return _from_fmpq_mat((Ft * Fm).inv() * Ft)


@dataclass(frozen=True)
class FullFixture:
    period: PeriodData
    omega: OmegaFixture
    expected_lambda_min: Fraction
    rank_deficient: bool


def full_fixture(rng: random.Random, radius=Fraction(1, 2 ** 200), prec: int = DEFAULT_PRECISION,
                 planted: Sequence[Sequence[int]] = (), degenerate: bool = False) -> FullFixture:
    """Fermat data whose lemma form is ``I + w^H w`` on E (or singular when ``degenerate``).

    The derivative matrix is ``D = conj(Y) U - p v^T`` with Y an orthonormal
    basis of E, U 20 x 35 with orthonormal rows orthogonal to the Fermat
    vector c_f, and v = c_f / |c_f|^2; then ``D c_f = -p`` as the relation
    f^2 = sum f_m (m f) demands, and ``A = -D L`` with L F = I.
    """
    fix = random_omega(rng, planted=planted)
    L = fix.lattice
    n = L.rank
    h = [Ball.exact(x, prec) for x in L.h]
    wbar = [Ball.from_parts(re, -im, 0, prec) for re, im in fix.omega]
    Y = orthocomplement_basis([h, wbar], L.gram, prec)
    k = len(Y)
    Yre = [[to_fraction(Y[j][i].re) for j in range(k)] for i in range(n)]
    Yim = [[to_fraction(Y[j][i].im) for j in range(k)] for i in range(n)]
    U = orthonormal_rows(rng, k)
    if degenerate:
        for r in U[-2:]:
            for j in range(len(r)):
                r[j] = Fraction(0)
    cf = _fermat_quartic_vector()
    v = [x / 4 for x in cf]
    Um = _to_fmpq_mat(U)
    Dre = _to_fmpq_mat(Yre) * Um - _to_fmpq_mat([[p[0]] for p in fix.pairings]) * _to_fmpq_mat([v])
    Dim = -(_to_fmpq_mat(Yim) * Um) - _to_fmpq_mat([[p[1]] for p in fix.pairings]) * _to_fmpq_mat([v])
    Lm = _to_fmpq_mat(left_inverse_mf())
    Are = _from_fmpq_mat(-(Dre * Lm))
    Aim = _from_fmpq_mat(-(Dim * Lm))
    A = BallMatrix([[Ball.from_parts(Are[i][j], Aim[i][j], radius, prec) for j in range(len(Are[0]))]
                    for i in range(n)], prec)
    P = make_period_data(L, fermat_quartic(), A)
    return FullFixture(P, fix, Fraction(0) if degenerate else Fraction(1), degenerate)


# ---------------------------------------------------------------------------
# planted verdict suite helpers

def random_class(rng: random.Random, L: LatticeData, size: int = 3) -> Tuple[int, ...]:
    while True:
        v = tuple(rng.randint(-size, size) if rng.random() < 0.4 else 0 for _ in range(L.rank))
        if any(v):
            return v


def exact_abs2(z: Complex) -> Fraction:
    return z[0] * z[0] + z[1] * z[1]
