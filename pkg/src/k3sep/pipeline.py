"""Period data, separation constants and the Picard-membership decision.

Conventions
-----------
The period file stores a 22 x 165 ball matrix ``A``. Row i belongs to the
basis class gamma_i of the lattice file, column j to ``monomial_basis(8)[j]``,
and entry (i, j) encloses (1/2 pi i) times the integral of ``m_j Vol / f^3``
over the tube of gamma_i. Rows are pairing values, so for an integral class
gamma with coordinates g the number gamma.omega is ``sum g_i p_i`` with
``p = A(f^2)``; no Gram inversion is needed. Coordinates of omega itself are
``G^-1 p``.

Every real bound carries its rounding direction: lower bounds (``C_lemma``,
``eps_f``) are rounded down, upper bounds (``Gamma_up``, ``C_f``, ``c``) up.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import cached_property
from math import gcd
from typing import List, Optional, Sequence, Tuple, Union

import gmpy2
from gmpy2 import mpfr

from .ball import (DEFAULT_PRECISION, Ball, BallMatrix, ZERO, ball_sum, dot, dyadic_to_decimal,
                   hermitian_lambda_min_lower, norm2_bounds, op_norm_upper, orthocomplement_basis,
                   parse_decimal, to_fraction)
from .errors import (ChainViolation, InvalidInput, OmegaConstraintViolated, ParseError,
                     PrecisionTooLow, ShapeMismatch)
from .io import read_json
from .lattice import LatticeData, discriminant, is_multiple_of_h, load_lattice
from .nl_bounds import deg_bound_closed, deg_exponent_closed, height_bound_closed
from .polyring import QPoly, from_records, monomial_basis, monomial_index, multiply, one_norm
from .reduction import DivisionMap, build_Q12, gamma_upper_bound
from .tower import DOWN, EXACT, UP, TowerReal, _ctx, tower_max

MONOMIAL_ORDER = "grlex w>x>y>z"
N_CLASSES = 22
PERIOD_DEGREE = 8
SMALE_THRESHOLD = Fraction(1, 34)
LIOUVILLE_POWER = 10


def _down(prec):
    return _ctx(prec, gmpy2.RoundDown)


def _up(prec):
    return _ctx(prec, gmpy2.RoundUp)


def _mpfr_up(q, prec) -> mpfr:
    q = Fraction(q)
    return _up(prec).div(gmpy2.mpz(q.numerator), gmpy2.mpz(q.denominator))


def _log2e(direction: str, prec: int) -> mpfr:
    if direction == UP:
        return _up(prec).div(1, _down(prec).log(2))
    return _down(prec).div(1, _up(prec).log(2))


# ---------------------------------------------------------------------------
# period data

@dataclass(frozen=True)
class PeriodData:
    """Quartic, lattice and period matrix for one surface (see module docstring)."""

    lattice: LatticeData
    f: QPoly
    A: BallMatrix
    labels: Tuple[str, ...] = ()

    @property
    def prec(self) -> int:
        return self.A.prec

    @cached_property
    def omega(self) -> List[Ball]:
        return omega_from_A(self)


def _apply_poly(A: BallMatrix, poly: QPoly, prec: int) -> List[Ball]:
    """``A`` applied to the coefficient vector of a degree-8 form."""
    if poly.degree != PERIOD_DEGREE:
        raise InvalidInput(f"period matrix acts on degree-{PERIOD_DEGREE} forms, got {poly.degree}")
    index = monomial_index(PERIOD_DEGREE)
    terms = [(index[e], Ball.exact(c, prec)) for e, c in poly.coeffs.items()]
    out = []
    for row in A.entries:
        out.append(ball_sum((row[j] * c for j, c in terms), prec))
    return out


def omega_from_A(P: PeriodData, prec: Optional[int] = None) -> List[Ball]:
    """Pairing values ``p_i`` enclosing gamma_i . omega_f, computed as ``A(f^2)``."""
    prec = prec or P.prec
    A = P.A if prec == P.A.prec else P.A.with_prec(prec)
    return _apply_poly(A, multiply(P.f, P.f), prec)


def omega_coordinates(P: PeriodData, p: Optional[Sequence[Ball]] = None) -> List[Ball]:
    """Coordinates ``G^-1 p`` of omega in the lattice basis."""
    p = list(P.omega if p is None else p)
    Ginv = BallMatrix.from_exact(P.lattice.gram_inverse(), P.prec)
    return Ginv.apply(p)


def derivative_matrix(P: PeriodData, prec: Optional[int] = None) -> BallMatrix:
    """The 22 x 35 matrix with column ``-A(m f)`` for each quartic monomial m."""
    prec = prec or P.prec
    A = P.A if prec == P.A.prec else P.A.with_prec(prec)
    cols = []
    for m in monomial_basis(4):
        mf = multiply(QPoly.monomial(m), P.f)
        cols.append([-b for b in _apply_poly(A, mf, prec)])
    return BallMatrix([list(r) for r in zip(*cols)], prec)


@dataclass(frozen=True)
class OmegaChecks:
    h_pairing: Ball
    self_pairing: Ball
    hermitian_pairing: Ball
    norm_upper: mpfr


def omega_checks(P: PeriodData, prec: Optional[int] = None) -> OmegaChecks:
    prec = prec or P.prec
    p = omega_from_A(P, prec) if prec != P.prec else P.omega
    Ginv = BallMatrix.from_exact(P.lattice.gram_inverse(), prec)
    coords = Ginv.apply(p)
    h = [Ball.exact(x, prec) for x in P.lattice.h]
    hp = dot(h, p, prec)
    ww = dot(p, coords, prec)
    wwbar = dot(p, [b.conj() for b in coords], prec)
    _, nrm = norm2_bounds(coords)
    return OmegaChecks(hp, ww, wwbar, nrm)


def validate_omega(P: PeriodData) -> OmegaChecks:
    """Check omega.h = 0, omega.omega = 0 and omega.conj(omega) > 0 in ball arithmetic."""
    chk = omega_checks(P)
    if not chk.h_pairing.contains_zero():
        raise OmegaConstraintViolated("h_pairing", "omega . h is certified nonzero")
    if not chk.self_pairing.contains_zero():
        raise OmegaConstraintViolated("isotropy", "omega . omega is certified nonzero")
    hp = chk.hermitian_pairing
    if not hp.upper() > 0:
        raise OmegaConstraintViolated("positivity", "omega . conj(omega) is certified non-positive")
    if not hp.lower() > 0:
        raise PrecisionTooLow("omega . conj(omega) is not certified positive; radii are too wide", P.prec)
    return chk


def make_period_data(lattice: LatticeData, f: QPoly, A: BallMatrix,
                     labels: Sequence[str] = (), validate: bool = True) -> PeriodData:
    if f.degree != 4:
        raise ShapeMismatch(f"f must be a quartic, got degree {f.degree}")
    ncols = len(monomial_basis(PERIOD_DEGREE))
    if A.shape != (lattice.rank, ncols):
        raise ShapeMismatch(f"period matrix must be {lattice.rank} x {ncols}, got {A.rows} x {A.cols}")
    if labels and len(labels) != lattice.rank:
        raise ShapeMismatch(f"expected {lattice.rank} basis labels, got {len(labels)}")
    P = PeriodData(lattice, f, A, tuple(labels))
    if validate:
        validate_omega(P)
    return P


# ---------------------------------------------------------------------------
# files

def load_quartic(path) -> QPoly:
    f = from_records(read_json(path), source=str(path))
    if f.degree != 4:
        raise ParseError(f"expected a quartic, found degree {f.degree}", str(path))
    return f


def period_matrix_to_json(A: BallMatrix, labels: Sequence[str] = ()) -> dict:
    return {
        "monomial_order": MONOMIAL_ORDER,
        "degree": PERIOD_DEGREE,
        "rows": A.rows,
        "cols": A.cols,
        "basis_labels": list(labels) or [f"gamma{i + 1}" for i in range(A.rows)],
        "entries": A.to_json(),
    }


def period_matrix_from_json(data, prec: int = DEFAULT_PRECISION, source=None) -> Tuple[BallMatrix, Tuple[str, ...]]:
    need = {"monomial_order", "degree", "rows", "cols", "basis_labels", "entries"}
    if not isinstance(data, dict) or not need <= set(data):
        raise ParseError(f"period file needs the keys {sorted(need)}", source)
    if data["monomial_order"] != MONOMIAL_ORDER:
        raise ParseError(f"unsupported monomial order {data['monomial_order']!r}", source)
    if data["degree"] != PERIOD_DEGREE:
        raise ParseError(f"period columns must be degree-{PERIOD_DEGREE} monomials", source)
    A = BallMatrix.from_json(data["entries"], prec, source)
    if A.shape != (data["rows"], data["cols"]):
        raise ShapeMismatch(f"header says {data['rows']} x {data['cols']}, entries are {A.rows} x {A.cols}")
    labels = data["basis_labels"]
    if not isinstance(labels, list) or len(labels) != A.rows:
        raise ShapeMismatch("one basis label per row is required")
    return A, tuple(str(s) for s in labels)


def save_period_matrix(A: BallMatrix, path, labels: Sequence[str] = ()) -> None:
    with open(path, "w") as fh:
        json.dump(period_matrix_to_json(A, labels), fh)
        fh.write("\n")


def load_period_data(f_path, lattice_path, periods_path, prec: int = DEFAULT_PRECISION) -> PeriodData:
    f = load_quartic(f_path)
    L = load_lattice(lattice_path)
    A, labels = period_matrix_from_json(read_json(periods_path), prec, str(periods_path))
    return make_period_data(L, f, A, labels)


# ---------------------------------------------------------------------------
# lemma constant

def lemma_form_matrix(P: PeriodData, prec: int) -> BallMatrix:
    """Hermitian matrix of ``Q(eta) = sum_m |eta . d(m)|^2`` on an orthonormal basis of E.

    E is the complement of {h, conj(omega)} for the bilinear form; its basis
    Y is orthonormal for the coefficientwise Hermitian product, so the matrix
    is ``Z^H Z`` with ``Z = D^T Y``.
    """
    p = omega_from_A(P, prec)
    Ginv = BallMatrix.from_exact(P.lattice.gram_inverse(), prec)
    wbar = [b.conj() for b in Ginv.apply(p)]
    h = [Ball.exact(x, prec) for x in P.lattice.h]
    Y = orthocomplement_basis([h, wbar], P.lattice.gram, prec)
    Ymat = BallMatrix([list(r) for r in zip(*Y)], prec)  # 22 x 20
    D = derivative_matrix(P, prec)
    Z = D.transpose().matmul(Ymat)
    return Z.adjoint().matmul(Z)


def lemma_constant_C(P: PeriodData, precision: int = DEFAULT_PRECISION,
                     max_precision: Optional[int] = None) -> mpfr:
    """``(1/2) sqrt(lambda_min / 35)`` rounded down, clamped to at most 1.

    lambda_min is a certified lower bound for the smallest eigenvalue of the
    form Q on E. With ``max_precision`` the computation is retried at doubled
    precision before giving up.
    """
    prec = precision
    while True:
        try:
            H = lemma_form_matrix(P, prec)
            lam = hermitian_lambda_min_lower(H, prec, require_positive=True)
            break
        except PrecisionTooLow:
            if max_precision is None or 2 * prec > max_precision:
                raise
            prec *= 2
    d = _down(prec)
    c = d.mul(d.sqrt(d.div(lam, len(monomial_basis(4)))), mpfr("0.5"))
    return min(c, mpfr(1))


# ---------------------------------------------------------------------------
# heights

def weil_height_rational(f: QPoly, prec: int = DEFAULT_PRECISION) -> Tuple[int, mpfr]:
    """(D, H) for rational coefficients: D = 1, H = ln max |c_i| after clearing to coprime integers."""
    coeffs = [c for c in f.coeffs.values() if c]
    if not coeffs:
        raise InvalidInput("the zero polynomial has no height")
    den = 1
    for c in coeffs:
        den = den * c.denominator // gcd(den, c.denominator)
    ints = [int(c * den) for c in coeffs]
    g = 0
    for n in ints:
        g = gcd(g, n)
    top = max(abs(n) // g for n in ints)
    return 1, _up(prec).log(top) if top > 1 else mpfr(0)


# ---------------------------------------------------------------------------
# constants

@dataclass(frozen=True)
class SeparationConstants:
    C_lemma: mpfr          # down
    Gamma_up: mpfr         # up
    C_f: mpfr              # up
    eps_f: mpfr            # down
    c: TowerReal           # level 1, log2 c rounded up; the constant is exactly 2**c.value
    field_degree: int
    height_H: mpfr         # up
    f_one_norm: Fraction
    precision: int
    test_mode: bool = False
    provenance: dict = field(default_factory=dict, compare=False)

    @property
    def log2_c(self) -> mpfr:
        return self.c.value


def _chain_terms(consts: "SeparationConstants", prec: int):
    u = _up(prec)
    t_cf = u.add(u.log2(consts.C_f), 2)
    t_eps = u.add(u.minus(_down(prec).log2(consts.eps_f)), 2)
    l_f = u.log2(_mpfr_up(consts.f_one_norm + 1, prec))
    return t_cf, t_eps, l_f


def _log2_c_required(D: int, H: mpfr, C_f: mpfr, eps_f: mpfr, f_norm: Fraction, prec: int) -> mpfr:
    """E(1) + log2 K(1), an upper bound for log2 R(Delta) / Delta^(9/2) over all Delta >= 1.

    With E(Delta) = (Delta+20)^(9/2) log2 3 the chain requirement satisfies
    R(Delta) <= 2^E(Delta) K(Delta), where
    K = D (1 + (Delta+60)^5) + D H log2 e + log2(||f||_1 + 1) + (log2 C_f + 2) + (2 + log2 1/eps_f).
    Both E(Delta)/Delta^(9/2) and log2 K(Delta)/Delta^(9/2) decrease in Delta
    (K >= 61^5, so d/dDelta of log2 K is far below 4.5 log2 K / Delta), hence
    the maximum sits at Delta = 1.
    """
    u = _up(prec)
    probe = SeparationConstants(mpfr(1), mpfr(1), C_f, eps_f, TowerReal(1, 0, EXACT), D, H, f_norm, prec)
    t_cf, t_eps, l_f = _chain_terms(probe, prec)
    K = u.mul(D, 1 + 61 ** 5)
    K = u.add(K, u.mul(u.mul(D, H), _log2e(UP, prec)))
    K = u.add(K, l_f)
    K = u.add(K, max(t_cf, ZERO))
    K = u.add(K, max(t_eps, ZERO))
    return u.add(deg_exponent_closed(1, UP, prec), u.log2(K))


def assemble_constants(P: PeriodData, D: int = 1, H=0, precision: int = DEFAULT_PRECISION,
                       Q: Optional[DivisionMap] = None, test_log2_c=None,
                       max_precision: Optional[int] = None) -> SeparationConstants:
    """All separation constants with directed rounding.

    ``test_log2_c`` replaces c by ``2**test_log2_c`` (rounded up) and marks the
    result as test mode; such constants make the InPicard branch reachable but
    carry no guarantee.
    """
    if D < 1:
        raise InvalidInput("the field degree D must be at least 1")
    Hq = Fraction(H) if isinstance(H, (int, Fraction)) else to_fraction(mpfr(H))
    if Hq < 0:
        raise InvalidInput("the height H must be non-negative")
    prec = precision
    u, d = _up(prec), _down(prec)
    H_up = _mpfr_up(Hq, prec)

    C = lemma_constant_C(P, prec, max_precision)
    if Q is None:
        Q = build_Q12(P.f)
    A = P.A if prec == P.A.prec else P.A.with_prec(prec)
    normA = op_norm_upper(A)
    Gamma = gamma_upper_bound(Q.norm, normA)
    Gamma_up = _mpfr_up(Gamma, prec)
    C_f = u.div(2, C)

    chk = omega_checks(P, prec)
    wlow = chk.hermitian_pairing.lower()
    if not wlow > 0:
        raise PrecisionTooLow("omega . conj(omega) is not certified positive", prec)
    first = d.div(d.mul(C, C), u.mul(34, Gamma_up))
    second = d.div(wlow, u.mul(2, chk.norm_upper))
    eps_f = min(first, second)

    f_norm = one_norm(P.f)
    if test_log2_c is None:
        log2c = _log2_c_required(D, H_up, C_f, eps_f, f_norm, prec)
        test_mode = False
    else:
        log2c = _mpfr_up(Fraction(test_log2_c), prec)
        if not log2c > 0:
            raise InvalidInput("c must exceed 1")
        test_mode = True
    prov = {
        "precision": prec,
        "field_degree": D,
        "height_H": f"{Hq.numerator}/{Hq.denominator}",
        "norm_Q12": f"{Q.norm.numerator}/{Q.norm.denominator}",
        "norm_A_upper": dyadic_to_decimal(normA),
        "f_one_norm": f"{f_norm.numerator}/{f_norm.denominator}",
        "test_mode": test_mode,
        "rounding": {"C_lemma": DOWN, "Gamma_up": UP, "C_f": UP, "eps_f": DOWN, "c": UP, "height_H": UP},
    }
    return SeparationConstants(C, Gamma_up, C_f, eps_f, TowerReal(1, log2c, UP, prec), D, H_up,
                               f_norm, prec, test_mode, prov)


def test_constants(log2_c, D: int = 1, prec: int = DEFAULT_PRECISION) -> SeparationConstants:
    """Constants carrying only a test-mode c; the other fields are placeholders."""
    v = _mpfr_up(Fraction(log2_c), prec)
    if not v > 0:
        raise InvalidInput("c must exceed 1")
    return SeparationConstants(mpfr(1), mpfr(1), mpfr(2), mpfr(2) ** -6, TowerReal(1, v, UP, prec),
                               D, mpfr(0), Fraction(4), prec, True, {"test_mode": True})


def chain_requirement(delta: int, consts: SeparationConstants, prec: Optional[int] = None) -> TowerReal:
    """Upper bound R(Delta) that log2(1/eps(Delta)) has to dominate."""
    if delta <= 0:
        raise InvalidInput("Delta must be positive")
    prec = prec or consts.precision
    t_cf, t_eps, l_f = _chain_terms(consts, prec)
    deg = deg_bound_closed(delta, UP, prec)
    hgt = height_bound_closed(delta, UP, prec)
    Dt = TowerReal(0, consts.field_degree, EXACT).with_direction(UP)
    chain = Dt.mul(deg.add(hgt, prec), prec)
    if l_f > 0:
        chain = chain.add(deg.mul(TowerReal(0, l_f, UP, prec), prec), prec)
    if consts.height_H > 0:
        dh = _up(prec).mul(_up(prec).mul(consts.field_degree, consts.height_H), _log2e(UP, prec))
        chain = chain.add(deg.mul(TowerReal(0, dh, UP, prec), prec), prec)
    if t_cf > 0:
        chain = chain.add(TowerReal(0, t_cf, UP, prec), prec)
    out = chain
    for t in (t_eps, t_cf):
        if t > 0:
            out = tower_max(out, TowerReal(0, t, UP, prec))
    return out


def log2_inverse_epsilon(delta: int, consts: SeparationConstants, direction: str = UP,
                         prec: Optional[int] = None) -> TowerReal:
    """log2(1/eps(Delta)) = c^(Delta^(9/2)), stored at level 1 as Delta^(9/2) log2 c."""
    if delta <= 0:
        raise InvalidInput("Delta must be positive")
    prec = prec or consts.precision
    c = _ctx(prec, gmpy2.RoundUp if direction == UP else gmpy2.RoundDown)
    e = c.mul(gmpy2.mpz(delta) ** 4, c.sqrt(delta))
    return TowerReal(1, c.mul(e, consts.log2_c), direction, prec)


def chain_dominated(delta: int, consts: SeparationConstants) -> bool:
    """Whether log2(1/eps(Delta)) >= R(Delta), certified."""
    return log2_inverse_epsilon(delta, consts, DOWN) >= chain_requirement(delta, consts)


def required_bits(delta: int, consts: SeparationConstants) -> TowerReal:
    """Upper bound for the bits of precision needed to separate at discriminant Delta.

    Small values are returned exactly as the integer ceiling of log2(1/eps).
    """
    t = log2_inverse_epsilon(delta, consts, UP)
    if t.level == 1 and t.value < 62:
        bits = _up(consts.precision).exp2(t.value)
        return TowerReal(0, int(gmpy2.ceil(bits)), EXACT)
    return t


def below_epsilon(x, delta: int, consts: SeparationConstants) -> bool:
    """Certified ``x < eps(Delta)`` for a non-negative upper bound x."""
    if x < 0:
        raise InvalidInput("expected a non-negative bound")
    if x == 0:
        return True
    prec = consts.precision
    lg = _down(prec).minus(_up(prec).log2(x))  # lower bound of log2(1/x)
    if not lg > 0:
        return False
    # compare log2(1/x) against log2(1/eps) = 2**(Delta^4.5 log2 c)
    need = log2_inverse_epsilon(delta, consts, UP, prec)
    return TowerReal(0, lg, DOWN, prec) > need


# ---------------------------------------------------------------------------
# decision

class Verdict(Enum):
    IN_PICARD = "InPicard"
    NOT_IN_PICARD = "NotInPicard"
    INCONCLUSIVE = "Inconclusive"
    INTERNAL_INCONSISTENCY = "InternalInconsistency"


@dataclass(frozen=True)
class Decision:
    verdict: Verdict
    reason: str
    delta: int
    pairing: Optional[Ball] = None
    required_bits: Optional[TowerReal] = None
    test_mode: bool = False


def _coords(gamma) -> Tuple[int, ...]:
    g = tuple(gamma.coords if hasattr(gamma, "coords") else gamma)
    if not all(isinstance(x, int) and not isinstance(x, bool) for x in g):
        raise InvalidInput("gamma must have integer coordinates")
    return g


def classify(delta: int, b: Ball, consts: SeparationConstants) -> Decision:
    """Verdict for a class of discriminant ``delta > 0`` whose pairing with omega lies in ``b``."""
    nonzero = b.abs_lower() > 0
    tiny = below_epsilon(b.abs_upper(), delta, consts)
    tm = consts.test_mode
    if nonzero and tiny:
        return Decision(Verdict.INTERNAL_INCONSISTENCY,
                        "pairing certified nonzero and below the separation bound", delta, b, None, tm)
    if nonzero:
        return Decision(Verdict.NOT_IN_PICARD, "pairing certified nonzero", delta, b, None, tm)
    if tiny:
        return Decision(Verdict.IN_PICARD, "pairing below the separation bound", delta, b, None, tm)
    return Decision(Verdict.INCONCLUSIVE, "pairing ball straddles the separation bound", delta, b,
                    required_bits(delta, consts), tm)


def decide(gamma, P: PeriodData, consts: SeparationConstants) -> Decision:
    g = _coords(gamma)
    L = P.lattice
    if len(g) != L.rank:
        raise ShapeMismatch(f"gamma needs {L.rank} coordinates, got {len(g)}")
    delta = discriminant(g, L)
    mult, _ = is_multiple_of_h(g, L)
    if mult:
        return Decision(Verdict.IN_PICARD, "hyperplane class", delta, test_mode=consts.test_mode)
    if delta <= 0:
        # the part of gamma orthogonal to h has square -delta/4 >= 0; algebraic
        # classes orthogonal to h are negative by the Hodge index theorem
        return Decision(Verdict.NOT_IN_PICARD, "Hodge index: discriminant is not positive", delta,
                        test_mode=consts.test_mode)
    prec = P.prec
    b = dot([Ball.exact(x, prec) for x in g], P.omega, prec)
    return classify(delta, b, consts)


# ---------------------------------------------------------------------------
# constants cache

def constants_to_json(consts: SeparationConstants) -> dict:
    return {
        "C_lemma": {"value": dyadic_to_decimal(consts.C_lemma), "rounding": DOWN},
        "Gamma_up": {"value": dyadic_to_decimal(consts.Gamma_up), "rounding": UP},
        "C_f": {"value": dyadic_to_decimal(consts.C_f), "rounding": UP},
        "eps_f": {"value": dyadic_to_decimal(consts.eps_f), "rounding": DOWN},
        "log2_c": {"value": dyadic_to_decimal(consts.log2_c), "rounding": UP},
        "field_degree": consts.field_degree,
        "height_H": {"value": dyadic_to_decimal(consts.height_H), "rounding": UP},
        "f_one_norm": f"{consts.f_one_norm.numerator}/{consts.f_one_norm.denominator}",
        "precision": consts.precision,
        "test_mode": consts.test_mode,
        "provenance": consts.provenance,
    }


def constants_from_json(data, source=None) -> SeparationConstants:
    try:
        prec = int(data["precision"])

        def val(key):
            q = parse_decimal(data[key]["value"], source)
            c = _ctx(prec, gmpy2.RoundUp)
            v = c.div(gmpy2.mpz(q.numerator), gmpy2.mpz(q.denominator))
            if to_fraction(v) != q:
                raise ParseError(f"{key} is not representable at {prec} bits", source)
            return v

        return SeparationConstants(
            val("C_lemma"), val("Gamma_up"), val("C_f"), val("eps_f"),
            TowerReal(1, val("log2_c"), UP, prec), int(data["field_degree"]), val("height_H"),
            Fraction(data["f_one_norm"]), prec, bool(data["test_mode"]), dict(data.get("provenance", {})))
    except (KeyError, TypeError, ValueError) as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError(f"malformed constants file: {exc}", source) from None


def input_digest(*paths) -> str:
    h = hashlib.sha256()
    for p in paths:
        with open(p, "rb") as fh:
            h.update(fh.read())
    return h.hexdigest()


# ---------------------------------------------------------------------------
# rounding audit

AUDIT_DIRECTIONS = {"C_lemma": DOWN, "eps_f": DOWN, "Gamma_up": UP, "C_f": UP, "log2_c": UP}


def rounding_audit(P: PeriodData, D: int = 1, H=0, precisions=(128, 256, 512),
                   Q: Optional[DivisionMap] = None):
    """Recompute the constants at each precision; lower bounds must not decrease, upper bounds not increase.

    Returns ``(ok, table)`` where ``table[name]`` lists the values by precision.
    """
    Q = Q or build_Q12(P.f)
    table = {k: [] for k in AUDIT_DIRECTIONS}
    for prec in precisions:
        cs = assemble_constants(P, D, H, prec, Q)
        for k in table:
            table[k].append(getattr(cs, k))
    ok = True
    for k, vals in table.items():
        for a, b in zip(vals, vals[1:]):
            if AUDIT_DIRECTIONS[k] == DOWN and b < a:
                ok = False
            if AUDIT_DIRECTIONS[k] == UP and b > a:
                ok = False
    return ok, table


# ---------------------------------------------------------------------------
# Smale alpha test

@dataclass(frozen=True)
class SmaleResult:
    certified: bool
    radius: Optional[Fraction]


def _exact(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return to_fraction(x)


def smale_alpha_test(beta_up, gamma_up) -> SmaleResult:
    """Root within ``2 beta`` of the base point when ``beta gamma <= 1/34``."""
    b, g = _exact(beta_up), _exact(gamma_up)
    if b < 0 or g < 0:
        raise InvalidInput("beta and gamma bounds must be non-negative")
    if b * g <= SMALE_THRESHOLD:
        return SmaleResult(True, 2 * b)
    return SmaleResult(False, None)


def _root_upper(x: Fraction, n: int, bits: int = 64) -> Fraction:
    """A dyadic upper bound for the real n-th root of x >= 0."""
    if x == 0 or n == 1:
        return x
    S = 1 << bits
    scaled = -((-x.numerator * S ** n) // x.denominator)
    r, exact = gmpy2.iroot(gmpy2.mpz(scaled), n)
    return Fraction(int(r) + (0 if exact else 1), S)


def smale_beta_gamma(coeffs: Sequence, t0) -> Tuple[Fraction, Fraction]:
    """Upper bounds for beta and gamma of a real rational polynomial at t0.

    ``coeffs`` lists c_0..c_n of phi(t) = sum c_k t^k. beta is exact;
    gamma = max_k |phi^(k)(t0) / (k! phi'(t0))|^(1/(k-1)) is rounded up.
    """
    c = [Fraction(x) for x in coeffs]
    t = Fraction(t0)
    n = len(c) - 1
    # Taylor coefficients at t0: a_k = phi^(k)(t0) / k!
    a = []
    for k in range(n + 1):
        s = Fraction(0)
        for j in range(k, n + 1):
            s += c[j] * _binom(j, k) * t ** (j - k)
        a.append(s)
    if n < 1 or a[1] == 0:
        raise InvalidInput("phi'(t0) must be nonzero")
    beta = abs(a[0] / a[1])
    gamma = Fraction(0)
    for k in range(2, n + 1):
        gamma = max(gamma, _root_upper(abs(a[k] / a[1]), k - 1))
    return beta, gamma


def _binom(n: int, k: int) -> int:
    from math import comb
    return comb(n, k)


# ---------------------------------------------------------------------------
# Liouville-type numbers

Theta = Union[int, TowerReal]


def _pow2_exponent(theta: Theta):
    """('int', k) when theta = 2**k with k an int, ('pow', j) when theta = 2**2**j, else None."""
    if isinstance(theta, TowerReal):
        if theta.direction != EXACT or not gmpy2.is_integer(theta.value) or theta.value < 0:
            raise InvalidInput("tower descriptors must be exact with integer value")
        v = int(theta.value)
        if theta.level == 1:
            return ("int", v)
        if theta.level == 2:
            return ("pow", v)
        return _pow2_exponent(v)
    if theta <= 0:
        raise InvalidInput("theta values must be positive")
    if theta & (theta - 1):
        return None
    return ("int", theta.bit_length() - 1)


def _exp_less(a, b) -> bool:
    """a < b for exponents given as ('int', k) or ('pow', j) meaning 2**j."""
    (ka, va), (kb, vb) = a, b
    if ka == "int" and kb == "int":
        return va < vb
    if ka == "pow" and kb == "pow":
        return va < vb
    if ka == "int":
        return va.bit_length() <= vb  # va < 2**vb
    # 2**va < vb; the shift is only evaluated when va is below vb's bit length
    return vb.bit_length() > va and vb != (1 << va)


def strictly_divides(a: Theta, b: Theta) -> bool:
    if isinstance(a, int) and isinstance(b, int):
        return b % a == 0 and b != a
    ea, eb = _pow2_exponent(a), _pow2_exponent(b)
    if isinstance(b, int):
        # a is a descriptor: b must be divisible by 2**ea
        if ea is None:
            return False
        v2 = (b & -b).bit_length() - 1
        need = ea[1] if ea[0] == "int" else (None if ea[1] > 62 else 1 << ea[1])
        return need is not None and v2 >= need and b != (1 << need)
    if eb is None:
        raise InvalidInput("descriptor is not a power of two")
    if isinstance(a, int) and ea is None:
        return False
    return _exp_less(ea, eb)


def _loglog_lower(theta: Theta, prec: int = 128) -> TowerReal:
    """Lower bound for log2 log2 theta."""
    if isinstance(theta, TowerReal):
        e = _pow2_exponent(theta)
        if e[0] == "pow":
            return TowerReal(0, e[1], EXACT)
        return TowerReal(0, _down(prec).log2(e[1]) if e[1] > 0 else mpfr("-inf"), DOWN, prec)
    if theta <= 1:
        return TowerReal(0, mpfr("-inf"), DOWN)
    d = _down(prec)
    return TowerReal(0, d.log2(d.log2(gmpy2.mpz(theta))), DOWN, prec)


def _tenth_power(theta: Theta) -> TowerReal:
    """theta ** 10 exactly, as a level-0 or level-1 tower number."""
    if isinstance(theta, TowerReal):
        kind, v = _pow2_exponent(theta)
        k = LIOUVILLE_POWER * (v if kind == "int" else (1 << v))
        return TowerReal(1, k, EXACT)
    return TowerReal(0, theta ** LIOUVILLE_POWER, EXACT)


@dataclass(frozen=True)
class LiouvilleCheck:
    ok: bool
    index: Optional[int] = None
    reason: Optional[str] = None

    def render(self) -> str:
        return "PASS" if self.ok else f"FAIL at index {self.index} ({self.reason})"


def liouville_growth_check(thetas: Sequence[Theta], growth: bool = True) -> LiouvilleCheck:
    """Strict divisibility and ``theta_{i+1} >= 2^(2^(theta_i^10))`` for consecutive terms.

    Entries are positive ints or exact tower descriptors: level 1 with value k
    stands for 2**k, level 2 with value j for 2**2**j.
    """
    if not thetas:
        raise InvalidInput("empty sequence")
    for i, (a, b) in enumerate(zip(thetas, thetas[1:])):
        if not strictly_divides(a, b):
            return LiouvilleCheck(False, i, "divisibility")
        if growth and not _loglog_lower(b) >= _tenth_power(a):
            return LiouvilleCheck(False, i, "growth")
    return LiouvilleCheck(True)


@dataclass(frozen=True)
class PartialSum:
    value: Fraction
    u: int
    theta_k: int


def liouville_partial_sum(thetas: Sequence[int]) -> PartialSum:
    """l_k = sum 1/theta_i written as u_k / theta_k, with the bound u_k <= 2 theta_k checked."""
    if not thetas:
        raise InvalidInput("empty sequence")
    for x in thetas:
        if not isinstance(x, int) or x <= 0:
            raise InvalidInput("theta values must be positive integers")
    for i, (a, b) in enumerate(zip(thetas, thetas[1:])):
        if b % a or b == a:
            raise ChainViolation(f"theta_{i} = {a} does not strictly divide theta_{i + 1} = {b}")
    tk = thetas[-1]
    u = sum(tk // t for t in thetas)
    if u > 2 * tk:
        raise ChainViolation(f"u_k = {u} exceeds 2 theta_k")
    return PartialSum(Fraction(u, tk), u, tk)
