"""Noether-Lefschetz index arithmetic and degree/height bound ledgers.

The loci are indexed either by (d, g), the degree and genus of a curve class,
or by the discriminant Delta = d^2 - 8g + 8. This module converts between
the two, computes the dimension bookkeeping of the Hilbert-scheme
construction, and evaluates the resulting degree and height bounds. Bounds
are returned as :class:`~k3sep.tower.TowerReal` values rounded upward.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import comb, factorial, isqrt
from typing import List, Optional

import gmpy2

from .errors import InvalidIndex, InvalidInput, LedgerInconsistency
from .tower import EXACT, TOWER_PREC, UP, TowerReal, _ctx

EXACT_MULTINOMIAL_LIMIT = 20000


@dataclass(frozen=True)
class DGIndex:
    d: int
    g: int

    def __post_init__(self):
        if self.d <= 0 or self.g < 0:
            raise InvalidIndex(f"need d > 0 and g >= 0, got ({self.d}, {self.g})")

    @property
    def delta(self) -> int:
        return self.d * self.d - 8 * self.g + 8


def delta_of(d: int, g: int) -> int:
    return d * d - 8 * g + 8


def _ceil_quarter_sqrt(delta: int) -> int:
    """Smallest t with 16 t^2 >= delta, i.e. ceil(sqrt(delta) / 4)."""
    t = isqrt(delta) // 4
    while 16 * t * t < delta:
        t += 1
    return t


def delta_to_dg(delta: int) -> Optional[DGIndex]:
    """The (d, g) representing NL_Delta, or None when the locus is empty."""
    if delta <= 0:
        raise InvalidInput(f"Delta must be positive, got {delta}")
    t = _ceil_quarter_sqrt(delta)
    r = delta % 8
    if r == 0:
        d, g = 4 * t, 2 * t * t + (8 - delta) // 8
    elif r == 1:
        d, g = 4 * t + 1, 2 * t * t + t + (9 - delta) // 8
    elif r == 4:
        d, g = 4 * t + 2, 2 * t * t + 2 * t + (12 - delta) // 8
    else:
        return None
    out = DGIndex(d, g)
    assert out.delta == delta
    return out


def normalize_steps(d: int, g: int) -> List[DGIndex]:
    """All indices visited while normalizing, starting at (|d|, g)."""
    if d == 0:
        raise InvalidIndex("d = 0 does not index a locus")
    d = abs(d)
    steps = [DGIndex(d, g)]
    while d - 4 >= 1 and g - d + 2 >= 0:
        d, g = d - 4, g - d + 2
        steps.append(DGIndex(d, g))
    return steps


def normalize_dg(d: int, g: int) -> DGIndex:
    """Canonical (d, g): flip the sign of d, then step (d, g) -> (d-4, g-d+2) while valid."""
    return normalize_steps(d, g)[-1]


def gotzmann_r(dg: DGIndex) -> int:
    return max(comb(dg.d, 2) + 1 - dg.g, 4)


def slice_dim(m: int) -> int:
    return comb(m + 3, 3) if m >= 0 else 0


@dataclass(frozen=True)
class HilbertDims:
    d: int
    g: int
    r: int
    N_r: int
    N_r_minus_3: int
    N_r_minus_4: int
    N_r_plus_1: int
    p_r_plus_1: int
    q_r: int
    alpha: int
    beta: int
    alpha_prime: int
    beta_prime: int
    s: int
    L: int

    @property
    def exponent(self) -> int:
        """alpha + beta - alpha' - beta' + 1, the power taken in the ledger (fiber dimension 0)."""
        return self.alpha + self.beta - self.alpha_prime - self.beta_prime + 1

    @property
    def sL(self) -> int:
        return self.s * self.L


def hilbert_dims(dg: DGIndex) -> HilbertDims:
    d, g = dg.d, dg.g
    if dg.delta <= 0:
        raise LedgerInconsistency(f"({d}, {g}) has non-positive discriminant; the locus is empty")
    r = gotzmann_r(dg)

    def p(m):
        return d * m + 1 - g

    def q(m):
        return slice_dim(m) - p(m)

    Nr, Nr3, Nr4, Nr1 = slice_dim(r), slice_dim(r - 3), slice_dim(r - 4), slice_dim(r + 1)
    pr1, qr = p(r + 1), q(r)
    free = qr - Nr4
    alpha = free * Nr - 1
    beta = pr1 * Nr1 - 1
    beta_p = pr1 * pr1 - 1
    alpha_p = free * qr - 1
    s = pr1 * Nr3 + 4 * pr1 * free
    dims = HilbertDims(d, g, r, Nr, Nr3, Nr4, Nr1, pr1, qr, alpha, beta, alpha_p, beta_p, s, Nr)
    for name in ("p_r_plus_1", "q_r", "alpha", "beta", "alpha_prime", "beta_prime", "s"):
        if getattr(dims, name) < 0:
            raise LedgerInconsistency(f"{name} is negative for ({d}, {g})")
    if free < 0 or alpha < alpha_p or beta < beta_p:
        raise LedgerInconsistency(f"dimension count is inconsistent for ({d}, {g})")
    if dims.sL > (d + 2) ** 15:
        raise LedgerInconsistency(f"s*L = {dims.sL} exceeds (d+2)^15 for ({d}, {g})")
    return dims


# ---------------------------------------------------------------------------
# coefficient extraction

def _as_mpfr_up(x, prec: int):
    c = _ctx(prec, gmpy2.RoundUp)
    if isinstance(x, (int, Fraction)):
        q = Fraction(x)
        return c.div(gmpy2.mpz(q.numerator), gmpy2.mpz(q.denominator))
    return c.plus(x)


def multinomial(parts) -> int:
    n = sum(parts)
    out = factorial(n)
    for k in parts:
        out //= factorial(k)
    return out


def log2_multinomial(parts, direction: str = UP, prec: int = TOWER_PREC):
    """log2 of N!/(k1!...km!) rounded in ``direction`` via MPFR's correctly rounded lngamma."""
    n = sum(parts)
    hi = _ctx(prec, gmpy2.RoundUp if direction == UP else gmpy2.RoundDown)
    lo = _ctx(prec, gmpy2.RoundDown if direction == UP else gmpy2.RoundUp)
    top = hi.lngamma(n + 1)
    bottom = gmpy2.mpfr(0)
    for k in parts:
        bottom = lo.add(bottom, lo.lngamma(k + 1))
    diff = hi.sub(top, bottom)
    return hi.div(diff, lo.log(2))


def chow_coeff(L, e_eta: int, e1: int, e2: int, e3: int, N: int, prec: int = TOWER_PREC) -> TowerReal:
    """Coefficient of eta^e_eta th1^e1 th2^e2 th3^e3 in (L eta + th1 + th2 + th3)^N, with eta^2 = 0.

    Exact multinomial for moderate N, correctly rounded log-gamma beyond
    that; the result never underestimates the coefficient.
    """
    if e_eta not in (0, 1):
        raise InvalidInput("eta squares to zero, so its exponent is 0 or 1")
    if min(e1, e2, e3) < 0:
        raise InvalidInput("exponents must be non-negative")
    if e_eta + e1 + e2 + e3 != N:
        raise InvalidInput(f"exponents sum to {e_eta + e1 + e2 + e3}, expected {N}")
    parts = (e_eta, e1, e2, e3)
    if N <= EXACT_MULTINOMIAL_LIMIT:
        m = multinomial(parts)
        base = TowerReal.from_int_log(m, UP, prec)
    else:
        base = TowerReal(1, log2_multinomial(parts, UP, prec), UP, prec)
    if e_eta == 0:
        return base
    Lv = _as_mpfr_up(L, prec)
    if Lv <= 0:
        return TowerReal(0, 0, EXACT)
    return base.with_direction(UP).mul(TowerReal(0, Lv, UP, prec), prec)


def _eta_length(d: int, prec: int):
    """L = 15 ln(d+2), rounded up."""
    c = _ctx(prec, gmpy2.RoundUp)
    return c.mul(15, c.log(d + 2))


def deg_bound_ledger(dg: DGIndex, prec: int = TOWER_PREC) -> TowerReal:
    """Upper bound on deg NL_{d,g} from the exact coefficient extraction (fiber dimension 0)."""
    dims = hilbert_dims(dg)
    e2 = dims.alpha - dims.alpha_prime
    e3 = dims.beta - dims.beta_prime
    return chow_coeff(_eta_length(dg.d, prec), 0, 1, e2, e3, dims.exponent, prec)


def mahler_bound_ledger(dg: DGIndex, prec: int = TOWER_PREC) -> TowerReal:
    """Upper bound on m(NL_{d,g}): the eta coefficient with L = 15 ln(d+2)."""
    dims = hilbert_dims(dg)
    e2 = dims.alpha - dims.alpha_prime
    e3 = dims.beta - dims.beta_prime
    return chow_coeff(_eta_length(dg.d, prec), 1, 0, e2, e3, dims.exponent, prec)


def height_bound_ledger(dg: DGIndex, prec: int = TOWER_PREC) -> TowerReal:
    """Upper bound on log2 ||NL_{d,g}||_1 = m log2(e) + deg log2(36)."""
    c = _ctx(prec, gmpy2.RoundUp)
    log2e = c.div(1, _ctx(prec, gmpy2.RoundDown).log(2))
    log2_36 = c.log2(36)
    deg = deg_bound_ledger(dg, prec).with_direction(UP)
    m = mahler_bound_ledger(dg, prec).with_direction(UP)
    a = m.mul(TowerReal(0, log2e, UP, prec), prec)
    b = deg.mul(TowerReal(0, log2_36, UP, prec), prec)
    return a.add(b, prec)


# ---------------------------------------------------------------------------
# closed forms

def _pow_nine_halves(x: int, direction: str, prec: int):
    """x^(9/2) = x^4 sqrt(x), rounded in ``direction``."""
    c = _ctx(prec, gmpy2.RoundUp if direction == UP else gmpy2.RoundDown)
    return c.mul(gmpy2.mpz(x) ** 4, c.sqrt(x))


def deg_exponent_closed(delta: int, direction: str = UP, prec: int = TOWER_PREC):
    """(Delta + 20)^(9/2) log2 3, the log2 of the closed-form degree bound."""
    if delta <= 0:
        raise InvalidInput("Delta must be positive")
    c = _ctx(prec, gmpy2.RoundUp if direction == UP else gmpy2.RoundDown)
    return c.mul(_pow_nine_halves(delta + 20, direction, prec), c.log2(3))


def deg_bound_closed(delta: int, direction: str = UP, prec: int = TOWER_PREC) -> TowerReal:
    """3^((Delta+20)^(9/2)) as a level-1 tower number."""
    return TowerReal(1, deg_exponent_closed(delta, direction, prec), direction, prec)


def height_bound_closed(delta: int, direction: str = UP, prec: int = TOWER_PREC) -> TowerReal:
    """(Delta+60)^5 3^((Delta+20)^(9/2)), bounding log2 ||NL_Delta||_1; stored at level 1."""
    c = _ctx(prec, gmpy2.RoundUp if direction == UP else gmpy2.RoundDown)
    v = c.add(c.mul(5, c.log2(delta + 60)), deg_exponent_closed(delta, direction, prec))
    return TowerReal(1, v, direction, prec)


# ---------------------------------------------------------------------------
# report

@dataclass(frozen=True)
class LedgerRow:
    delta: int
    dg: DGIndex
    r: int
    exponent: int
    ledger_log2_deg: object
    closed_log2_deg: object
    dominated: bool


def ledger_vs_closed(delta: int, prec: int = TOWER_PREC) -> Optional[LedgerRow]:
    dg = delta_to_dg(delta)
    if dg is None:
        return None
    dims = hilbert_dims(dg)
    ledger = deg_bound_ledger(dg, prec)
    closed = deg_bound_closed(delta, UP, prec)
    ledger_l1 = ledger.to_level(1, UP, prec) if ledger.level == 0 else ledger
    return LedgerRow(delta, dg, dims.r, dims.exponent, ledger_l1, closed, ledger <= closed)


def ledger_report(max_delta: int = 64, prec: int = TOWER_PREC) -> List[LedgerRow]:
    rows = []
    for delta in range(1, max_delta + 1):
        row = ledger_vs_closed(delta, prec)
        if row is not None:
            rows.append(row)
    return rows
