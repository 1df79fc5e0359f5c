"""Complex ball arithmetic on top of MPFR.

A :class:`Ball` is a midpoint ``re + i*im`` together with a radius ``rad``.
Midpoints are MPFR numbers at the ball's working precision, rounded to
nearest; every rounding that actually happens is charged to the radius, so an
operation on exact points returns an exact point. Radii are kept at
``RAD_PREC`` bits and always rounded upward.

Enclosure contract: for any points ``x`` in ``a`` and ``y`` in ``b`` the exact
value of ``x op y`` lies in the result ball.

Real-valued helpers (``lower``, ``upper``, ``abs_bounds``) return plain MPFR
numbers rounded in the stated direction.
"""

from __future__ import annotations

import threading
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Iterable, List, Optional, Sequence, Tuple

import gmpy2
from gmpy2 import mpfr

from .errors import InvalidInput, ParseError, PrecisionTooLow, ShapeMismatch

RAD_PREC = 64
DEFAULT_PRECISION = 256

_local = threading.local()


def context(prec: int, rnd=gmpy2.RoundToNearest):
    """Cached MPFR context for this thread; never installed globally."""
    cache = getattr(_local, "cache", None)
    if cache is None:
        cache = _local.cache = {}
    key = (prec, rnd)
    ctx = cache.get(key)
    if ctx is None:
        ctx = gmpy2.context(precision=prec, round=rnd)
        cache[key] = ctx
    return ctx


def up(prec: int = RAD_PREC):
    return context(prec, gmpy2.RoundUp)


def down(prec: int = RAD_PREC):
    return context(prec, gmpy2.RoundDown)


ZERO = mpfr(0)


def _round_err(y, prec: int):
    """Bound on |x - y| when y is x rounded to nearest at ``prec`` bits."""
    if y == 0:
        return ZERO
    return up().mul_2exp(up().abs(y), -prec)


def _neg(x):
    """Exact negation; the ``-`` operator would round to the global 53-bit context."""
    return context(max(x.precision, 2)).minus(x)


def _q(x) -> Fraction:
    if isinstance(x, (int, Fraction)):
        return Fraction(x)
    return to_fraction(x)


def to_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    n, d = x.as_integer_ratio()
    return Fraction(int(n), int(d))


def dyadic_to_decimal(x) -> str:
    """Exact decimal string of a finite dyadic number."""
    n, d = to_fraction(x).as_integer_ratio() if not isinstance(x, int) else (x, 1)
    if d == 1:
        return str(n)
    k = d.bit_length() - 1
    if d != 1 << k:
        raise InvalidInput("not a dyadic value")
    digits = abs(n) * 5 ** k
    s = str(digits).rjust(k + 1, "0")
    body = (s[:-k] + "." + s[-k:]).rstrip("0").rstrip(".")
    return ("-" if n < 0 else "") + body


def parse_decimal(s: str, source=None) -> Fraction:
    if not isinstance(s, str):
        raise ParseError(f"expected a decimal string, got {type(s).__name__}", source)
    try:
        d = Decimal(s)
    except InvalidOperation:
        raise ParseError(f"malformed decimal {s!r}", source) from None
    if not d.is_finite():
        raise ParseError(f"non-finite decimal {s!r}", source)
    return Fraction(d)


def round_fraction(q: Fraction, prec: int):
    """(nearest mpfr at ``prec`` bits, upward bound on the rounding error)."""
    if q == 0:
        return ZERO, ZERO
    n, d = abs(q.numerator), q.denominator
    # scale so that the integer part of |q| * 2**s has exactly prec bits
    s = prec - (n.bit_length() - d.bit_length())

    def parts(s):
        num, den = (n << s, d) if s >= 0 else (n, d << -s)
        return num, den, num // den

    num, den, m = parts(s)
    while m >= 1 << prec:
        s -= 1
        num, den, m = parts(s)
    while m < 1 << (prec - 1):
        s += 1
        num, den, m = parts(s)
    r = num - m * den
    if 2 * r > den or (2 * r == den and m & 1):
        m += 1
    if q < 0:
        m = -m
    y = context(prec).mul_2exp(gmpy2.mpz(m), -s)
    err = abs((Fraction(m, 1 << s) if s >= 0 else Fraction(m << -s)) - q)
    return y, (up().div(err.numerator, err.denominator) if err else ZERO)


class Ball:
    """Complex ball ``{z : |z - (re + i im)| <= rad}``."""

    __slots__ = ("re", "im", "rad", "prec")

    def __init__(self, re=0, im=0, rad=0, prec: int = DEFAULT_PRECISION):
        b = Ball.from_parts(re, im, rad, prec)
        self.re, self.im, self.rad, self.prec = b.re, b.im, b.rad, prec

    # ------------------------------------------------------------------ build
    @classmethod
    def exact(cls, value, prec: int = DEFAULT_PRECISION) -> "Ball":
        """Enclose an exact int, Fraction, float or complex of those."""
        if isinstance(value, complex):
            return cls.from_parts(value.real, value.imag, 0, prec)
        return cls.from_parts(value, 0, 0, prec)

    @classmethod
    def from_parts(cls, re, im=0, rad=0, prec: int = DEFAULT_PRECISION) -> "Ball":
        """Ball around ``re + i im`` (rationals or dyadics), rounding charged to the radius."""
        r_re, e_re = round_fraction(_q(re), prec)
        r_im, e_im = round_fraction(_q(im), prec)
        rad_q = _q(rad)
        if rad_q < 0:
            raise InvalidInput("radius must be non-negative")
        u = up()
        r = u.add(u.add(u.plus(gmpy2.mpq(rad_q.numerator, rad_q.denominator)), e_re), e_im)
        return cls._make(r_re, r_im, r, prec)

    @classmethod
    def _make(cls, re, im, rad, prec) -> "Ball":
        b = cls.__new__(cls)
        b.re = re
        b.im = im
        b.rad = rad
        b.prec = prec
        return b

    def with_prec(self, prec: int) -> "Ball":
        if prec >= self.prec:
            return Ball._make(self.re, self.im, self.rad, prec)
        ctx = context(prec)
        ctx.clear_flags()
        re = ctx.plus(self.re)
        im = ctx.plus(self.im)
        u = up()
        rad = u.add(self.rad, u.add(_round_err(re, prec), _round_err(im, prec))) if ctx.inexact else self.rad
        return Ball._make(re, im, rad, prec)

    # --------------------------------------------------------------- queries
    def is_exact(self) -> bool:
        return self.rad == 0

    def is_real(self) -> bool:
        return self.im == 0

    def mid(self) -> complex:
        return complex(float(self.re), float(self.im))

    def contains(self, z) -> bool:
        """Exact test whether the number ``z`` (rational/dyadic or complex of those) lies in the ball."""
        if isinstance(z, complex):
            zr, zi = Fraction(z.real), Fraction(z.imag)
        elif isinstance(z, Ball):
            raise TypeError("use overlaps for balls")
        else:
            zr, zi = _q(z), Fraction(0)
        dr = to_fraction(self.re) - zr
        di = to_fraction(self.im) - zi
        r = to_fraction(self.rad)
        return dr * dr + di * di <= r * r

    def contains_zero(self) -> bool:
        return self.contains(0)

    def overlaps(self, other: "Ball") -> bool:
        dr = to_fraction(self.re) - to_fraction(other.re)
        di = to_fraction(self.im) - to_fraction(other.im)
        r = to_fraction(self.rad) + to_fraction(other.rad)
        return dr * dr + di * di <= r * r

    def contains_ball(self, other: "Ball") -> bool:
        if other.rad > self.rad:
            return False
        dr = to_fraction(self.re) - to_fraction(other.re)
        di = to_fraction(self.im) - to_fraction(other.im)
        r = to_fraction(self.rad) - to_fraction(other.rad)
        return dr * dr + di * di <= r * r

    def abs_upper(self):
        u = up(self.prec)
        return u.add(u.hypot(self.re, self.im), self.rad)

    def abs_lower(self):
        d = down(self.prec)
        v = d.sub(d.hypot(self.re, self.im), self.rad)
        return v if v > 0 else ZERO

    def abs_bounds(self) -> Tuple:
        """Certified [lower, upper] for |z| over the ball."""
        return self.abs_lower(), self.abs_upper()

    def lower(self):
        """Lower bound of the real part."""
        return down(self.prec).sub(self.re, self.rad)

    def upper(self):
        """Upper bound of the real part."""
        return up(self.prec).add(self.re, self.rad)

    def __repr__(self) -> str:
        return f"Ball({float(self.re):.17g}{float(self.im):+.17g}j +/- {float(self.rad):.3g})"

    # ------------------------------------------------------------ arithmetic
    def _coerce(self, other) -> "Ball":
        if isinstance(other, Ball):
            return other
        if isinstance(other, (int, Fraction, float, complex)) or hasattr(other, "as_integer_ratio"):
            return Ball.exact(other, self.prec)
        raise TypeError(f"cannot combine Ball with {type(other).__name__}")

    def __add__(self, other) -> "Ball":
        other = self._coerce(other)
        prec = max(self.prec, other.prec)
        ctx = context(prec)
        u = up()
        ctx.clear_flags()
        re = ctx.add(self.re, other.re)
        e = _round_err(re, prec) if ctx.inexact else ZERO
        ctx.clear_flags()
        im = ctx.add(self.im, other.im)
        if ctx.inexact:
            e = u.add(e, _round_err(im, prec))
        rad = u.add(u.add(self.rad, other.rad), e)
        return Ball._make(re, im, rad, prec)

    __radd__ = __add__

    def __neg__(self) -> "Ball":
        return Ball._make(_neg(self.re), _neg(self.im), self.rad, self.prec)

    def __sub__(self, other) -> "Ball":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "Ball":
        return self._coerce(other) + (-self)

    def conj(self) -> "Ball":
        return Ball._make(self.re, _neg(self.im), self.rad, self.prec)

    def __mul__(self, other) -> "Ball":
        other = self._coerce(other)
        prec = max(self.prec, other.prec)
        ctx = context(prec)
        u = up()
        a, b, c, d = self.re, self.im, other.re, other.im
        ctx.clear_flags()
        re = ctx.fmms(a, c, b, d)
        e = _round_err(re, prec) if ctx.inexact else ZERO
        ctx.clear_flags()
        im = ctx.fmma(a, d, b, c)
        if ctx.inexact:
            e = u.add(e, _round_err(im, prec))
        r1, r2 = self.rad, other.rad
        if r1 or r2:
            m1 = u.hypot(a, b)
            m2 = u.hypot(c, d)
            e = u.add(e, u.add(u.add(u.mul(m1, r2), u.mul(m2, r1)), u.mul(r1, r2)))
        return Ball._make(re, im, e, prec)

    __rmul__ = __mul__

    def mul_2exp(self, k: int) -> "Ball":
        """Exact scaling by 2**k."""
        ctx = context(self.prec)
        return Ball._make(ctx.mul_2exp(self.re, k), ctx.mul_2exp(self.im, k),
                          up().mul_2exp(self.rad, k), self.prec)

    def abs2(self) -> "Ball":
        """Real ball enclosing |z|^2."""
        prec = self.prec
        ctx = context(prec)
        u = up()
        ctx.clear_flags()
        v = ctx.fmma(self.re, self.re, self.im, self.im)
        e = _round_err(v, prec) if ctx.inexact else ZERO
        if self.rad:
            m = u.hypot(self.re, self.im)
            e = u.add(e, u.add(u.mul_2exp(u.mul(m, self.rad), 1), u.mul(self.rad, self.rad)))
        return Ball._make(v, ZERO, e, prec)

    def inv(self) -> "Ball":
        """Reciprocal; raises PrecisionTooLow if the ball may contain 0."""
        prec = self.prec
        low = self.abs_lower()
        if low <= 0:
            raise PrecisionTooLow("cannot invert a ball that may contain zero", prec)
        ctx = context(prec)
        n2 = ctx.fmma(self.re, self.re, self.im, self.im)
        yr = ctx.div(self.re, n2)
        yi = ctx.div(_neg(self.im), n2)
        # residual 1 - m*y computed exactly in rationals
        mr, mi = to_fraction(self.re), to_fraction(self.im)
        qr, qi = to_fraction(yr), to_fraction(yi)
        rr = 1 - (mr * qr - mi * qi)
        ri = -(mr * qi + mi * qr)
        u = up()
        res = u.sqrt(u.plus(gmpy2.mpq(*(rr * rr + ri * ri).as_integer_ratio())))
        mlow = down().hypot(self.re, self.im)
        err = u.div(res, mlow)
        if self.rad:
            gap = down().sub(mlow, self.rad)
            err = u.add(err, u.div(self.rad, down().mul(mlow, gap)))
        return Ball._make(yr, yi, err, prec)

    def __truediv__(self, other) -> "Ball":
        return self * self._coerce(other).inv()

    def __rtruediv__(self, other) -> "Ball":
        return self._coerce(other) * self.inv()

    def sqrt_nonneg(self) -> "Ball":
        """Real ball enclosing sqrt(x) for the real x >= 0 in the ball.

        The imaginary part is ignored; use only for quantities known to be
        real and non-negative, such as squared norms.
        """
        prec = self.prec
        lo = self.lower()
        if lo < 0:
            lo = ZERO
        hi = self.upper()
        if hi < 0:
            raise InvalidInput("square root of a negative ball")
        slo = context(prec, gmpy2.RoundDown).sqrt(lo)
        shi = context(prec, gmpy2.RoundUp).sqrt(hi)
        mid = context(prec).div(context(prec + 1).add(slo, shi), 2)
        u = up()
        rad = max(u.sub(shi, mid), u.sub(mid, slo))
        return Ball._make(mid, ZERO, rad, prec)

    # --------------------------------------------------------- serialization
    def to_json(self) -> dict:
        return {"mid_re": dyadic_to_decimal(self.re), "mid_im": dyadic_to_decimal(self.im),
                "rad": dyadic_to_decimal(self.rad)}

    @classmethod
    def from_json(cls, data, prec: int = DEFAULT_PRECISION, source=None) -> "Ball":
        if not isinstance(data, dict) or set(data) != {"mid_re", "mid_im", "rad"}:
            raise ParseError("ball must have keys mid_re, mid_im, rad", source)
        re = parse_decimal(data["mid_re"], source)
        im = parse_decimal(data["mid_im"], source)
        rad = parse_decimal(data["rad"], source)
        if rad < 0:
            raise ParseError("negative radius", source)
        return cls.from_parts(re, im, rad, prec)


def ball_sum(items: Iterable[Ball], prec: int) -> Ball:
    acc = Ball._make(ZERO, ZERO, ZERO, prec)
    for b in items:
        acc = acc + b
    return acc


def dot(u: Sequence[Ball], v: Sequence[Ball], prec: int) -> Ball:
    """Bilinear sum u_i v_i (no conjugation)."""
    if len(u) != len(v):
        raise ShapeMismatch(f"vectors of length {len(u)} and {len(v)}")
    acc = Ball._make(ZERO, ZERO, ZERO, prec)
    for a, b in zip(u, v):
        if (a.re or a.im or a.rad) and (b.re or b.im or b.rad):
            acc = acc + a * b
    return acc


def hdot(u: Sequence[Ball], v: Sequence[Ball], prec: int) -> Ball:
    """Hermitian product sum u_i conj(v_i)."""
    return dot(u, [b.conj() for b in v], prec)


def norm2_bounds(v: Sequence[Ball]) -> Tuple:
    """[lower, upper] for the Euclidean norm of any point in the ball vector."""
    prec = max((b.prec for b in v), default=RAD_PREC)
    u, d = up(prec), down(prec)
    lo2 = ZERO
    hi2 = ZERO
    for b in v:
        lo, hi = b.abs_bounds()
        lo2 = d.add(lo2, d.mul(lo, lo))
        hi2 = u.add(hi2, u.mul(hi, hi))
    return d.sqrt(lo2), u.sqrt(hi2)


class BallMatrix:
    """Dense rectangular matrix of balls (rows of Ball)."""

    __slots__ = ("rows", "cols", "entries", "prec")

    def __init__(self, entries: List[List[Ball]], prec: Optional[int] = None):
        self.entries = entries
        self.rows = len(entries)
        self.cols = len(entries[0]) if entries else 0
        if any(len(r) != self.cols for r in entries):
            raise ShapeMismatch("ragged ball matrix")
        if prec is None:
            prec = max((b.prec for r in entries for b in r), default=DEFAULT_PRECISION)
        self.prec = prec

    @classmethod
    def from_exact(cls, m: Sequence[Sequence], prec: int = DEFAULT_PRECISION) -> "BallMatrix":
        return cls([[Ball.exact(x, prec) for x in row] for row in m], prec)

    @classmethod
    def zeros(cls, rows: int, cols: int, prec: int = DEFAULT_PRECISION) -> "BallMatrix":
        return cls([[Ball._make(ZERO, ZERO, ZERO, prec) for _ in range(cols)] for _ in range(rows)], prec)

    @classmethod
    def identity(cls, n: int, prec: int = DEFAULT_PRECISION) -> "BallMatrix":
        return cls.from_exact([[int(i == j) for j in range(n)] for i in range(n)], prec)

    def __getitem__(self, ij) -> Ball:
        i, j = ij
        return self.entries[i][j]

    @property
    def shape(self) -> Tuple[int, int]:
        return self.rows, self.cols

    def with_prec(self, prec: int) -> "BallMatrix":
        return BallMatrix([[b.with_prec(prec) for b in r] for r in self.entries], prec)

    def column(self, j: int) -> List[Ball]:
        return [r[j] for r in self.entries]

    def transpose(self) -> "BallMatrix":
        return BallMatrix([list(c) for c in zip(*self.entries)], self.prec)

    def conj(self) -> "BallMatrix":
        return BallMatrix([[b.conj() for b in r] for r in self.entries], self.prec)

    def adjoint(self) -> "BallMatrix":
        return self.transpose().conj()

    def scale(self, s) -> "BallMatrix":
        return BallMatrix([[b * s for b in r] for r in self.entries], self.prec)

    def __add__(self, other: "BallMatrix") -> "BallMatrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} + {other.shape}")
        return BallMatrix([[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                          max(self.prec, other.prec))

    def __sub__(self, other: "BallMatrix") -> "BallMatrix":
        if self.shape != other.shape:
            raise ShapeMismatch(f"{self.shape} - {other.shape}")
        return BallMatrix([[a - b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
                          max(self.prec, other.prec))

    def matmul(self, other: "BallMatrix") -> "BallMatrix":
        if self.cols != other.rows:
            raise ShapeMismatch(f"cannot multiply {self.shape} by {other.shape}")
        prec = max(self.prec, other.prec)
        cols = [other.column(j) for j in range(other.cols)]
        return BallMatrix([[dot(r, c, prec) for c in cols] for r in self.entries], prec)

    __matmul__ = matmul

    def apply(self, v: Sequence[Ball]) -> List[Ball]:
        if len(v) != self.cols:
            raise ShapeMismatch(f"matrix with {self.cols} columns applied to vector of length {len(v)}")
        return [dot(r, v, self.prec) for r in self.entries]

    def midpoint_complex(self):
        import numpy as np
        return np.array([[b.mid() for b in r] for r in self.entries], dtype=complex)

    def contains(self, m: Sequence[Sequence]) -> bool:
        return all(b.contains(x) for r, row in zip(self.entries, m) for b, x in zip(r, row))

    def max_rad(self):
        return max((b.rad for r in self.entries for b in r), default=ZERO)

    def to_json(self) -> List[List[dict]]:
        return [[b.to_json() for b in r] for r in self.entries]

    @classmethod
    def from_json(cls, data, prec: int = DEFAULT_PRECISION, source=None) -> "BallMatrix":
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise ParseError("ball matrix must be a non-empty list of rows", source)
        return cls([[Ball.from_json(x, prec, source) for x in r] for r in data], prec)


# --------------------------------------------------------------------------
# norms

def _abs_upper_matrix(M: BallMatrix):
    return [[b.abs_upper() for b in r] for r in M.entries]


def op_norm_upper(M: BallMatrix):
    """Upper bound on the spectral norm of every point matrix: sqrt(||M||_1 ||M||_inf).

    Since the spectral norm dominates the largest column 2-norm, this also
    bounds the operator norm from (C^n, 1-norm) to (C^m, 2-norm).
    """
    u = up(M.prec)
    absm = _abs_upper_matrix(M)
    if not absm or not absm[0]:
        return ZERO
    row_sums = [ZERO] * M.rows
    col_sums = [ZERO] * M.cols
    for i, r in enumerate(absm):
        for j, a in enumerate(r):
            row_sums[i] = u.add(row_sums[i], a)
            col_sums[j] = u.add(col_sums[j], a)
    return u.sqrt(u.mul(max(row_sums), max(col_sums)))


def op_norm_lower(M: BallMatrix, witness: Optional[Sequence] = None):
    """Certified lower bound on the spectral norm via ``||M v|| / ||v||``.

    The default witness is the top right singular vector of the midpoint
    matrix (double precision, used as an exact dyadic vector). Returns 0 when
    no positive bound can be certified.
    """
    import numpy as np

    if M.rows == 0 or M.cols == 0:
        return ZERO
    prec = M.prec
    if witness is None:
        mid = M.midpoint_complex()
        if not np.any(mid):
            return ZERO
        _, _, vh = np.linalg.svd(mid)
        witness = list(np.conj(vh[0]))
    v = [Ball.exact(complex(x), prec) if isinstance(x, (complex, np.complexfloating)) else Ball.exact(x, prec)
         for x in witness]
    mv = M.apply(v)
    num_lo, _ = norm2_bounds(mv)
    _, den_hi = norm2_bounds(v)
    if num_lo <= 0 or den_hi <= 0:
        return ZERO
    return down(prec).div(num_lo, den_hi)


# --------------------------------------------------------------------------
# Hermitian eigenvalue bound

def _eigenvectors(H: BallMatrix, prec: int) -> List[List[Ball]]:
    """Approximate eigenvector matrix of the Hermitian part of the midpoint, as exact balls."""
    n = H.rows
    if prec <= 53:
        import numpy as np
        mid = H.midpoint_complex()
        mid = (mid + mid.conj().T) / 2
        _, vecs = np.linalg.eigh(mid)
        return [[Ball.exact(complex(vecs[i, j]), prec) for j in range(n)] for i in range(n)]
    import mpmath
    ctx = mpmath.MPContext()
    ctx.prec = prec
    mid = ctx.matrix(n, n)
    for i in range(n):
        for j in range(n):
            a, b = H[i, j], H[j, i]
            re = (_to_mp(ctx, a.re) + _to_mp(ctx, b.re)) / 2
            im = (_to_mp(ctx, a.im) - _to_mp(ctx, b.im)) / 2
            mid[i, j] = ctx.mpc(re, im)
    _, vecs = ctx.eigh(mid)
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            z = vecs[i, j]
            row.append(Ball._make(_from_mp(z.real, prec), _from_mp(z.imag, prec), ZERO, prec))
        out.append(row)
    return out


def _to_mp(ctx, x):
    n, d = x.as_integer_ratio()
    return ctx.mpf((n, 1 - d.bit_length()))


def _from_mp(y, prec: int):
    """Nearest mpfr at ``prec`` bits to an mpmath number."""
    sign, man, e, _ = y._mpf_
    m = -int(man) if sign else int(man)
    exact = mpfr(m, max(m.bit_length(), 1))
    return context(prec).mul_2exp(exact, int(e))


def gershgorin_lower(W: BallMatrix):
    """min_i (lower Re W_ii - sum_{j != i} upper |W_ij|), rounded down."""
    d, u = down(W.prec), up(W.prec)
    best = None
    for i in range(W.rows):
        off = ZERO
        for j in range(W.cols):
            if j != i:
                off = u.add(off, W[i, j].abs_upper())
        val = d.sub(W[i, i].lower(), off)
        best = val if best is None or val < best else best
    return best


def hermitian_lambda_min_lower(H: BallMatrix, working_precision: int = DEFAULT_PRECISION,
                               require_positive: bool = False):
    """Certified lower bound on the smallest eigenvalue of every Hermitian point of ``H``.

    The midpoint is diagonalized approximately; with V the (exact, dyadic)
    eigenvector matrix, ``W = V^H H V`` is enclosed in balls and bounded by
    Gershgorin discs. Since V is only nearly unitary, the bound mu for W is
    transferred back with Ostrowski's theorem using ``e >= ||V^H V - I||_2``:
    ``lambda_min(H) >= mu/(1+e)`` if mu > 0 and ``mu/(1-e)`` otherwise.
    """
    if H.rows != H.cols:
        raise ShapeMismatch(f"square matrix required, got {H.shape}")
    n = H.rows
    for i in range(n):
        for j in range(i, n):
            if not H[i, j].overlaps(H[j, i].conj()):
                raise InvalidInput(f"entries ({i},{j}) and ({j},{i}) are not conjugate within radii")
    prec = working_precision
    Hp = H.with_prec(prec) if H.prec != prec else H
    V = BallMatrix(_eigenvectors(Hp, prec), prec)
    Vh = V.adjoint()
    W = Vh.matmul(Hp).matmul(V)
    mu = gershgorin_lower(W)
    K = Vh.matmul(V) - BallMatrix.identity(n, prec)
    e = op_norm_upper(K)
    if e >= 1:
        if require_positive:
            raise PrecisionTooLow("approximate eigenvectors are not close enough to unitary", prec)
        return mpfr("-inf")
    d = down(prec)
    if mu > 0:
        lam = d.div(mu, up(prec).add(1, e))
    else:
        lam = d.div(mu, down(prec).sub(1, e))
    if require_positive and not lam > 0:
        raise PrecisionTooLow(f"smallest eigenvalue not certified positive at {prec} bits", prec)
    return lam


# --------------------------------------------------------------------------
# orthogonal complements

def _greedy_order(funcs, n: int) -> List[int]:
    """Standard basis indices in the order a pivoted Gram-Schmidt would pick them."""
    import numpy as np

    basis = []
    for f in funcs:
        v = np.array(f, dtype=complex)
        for q in basis:
            v = v - np.vdot(q, v) * q
        nv = np.linalg.norm(v)
        if nv > 0:
            basis.append(v / nv)
    order = []
    remaining = list(range(n))
    while remaining and len(basis) < n:
        best, best_norm, best_vec = None, -1.0, None
        for j in remaining:
            v = np.zeros(n, dtype=complex)
            v[j] = 1
            for q in basis:
                v = v - np.vdot(q, v) * q
            nv = np.linalg.norm(v)
            if nv > best_norm:
                best, best_norm, best_vec = j, nv, v
        order.append(best)
        remaining.remove(best)
        basis.append(best_vec / best_norm)
    return order


def _normalize(v: List[Ball], prec: int) -> List[Ball]:
    n2 = ball_sum((b.abs2() for b in v), prec)
    if not n2.lower() > 0:
        raise PrecisionTooLow("cannot certify a nonzero vector during orthogonalization", prec)
    inv = n2.sqrt_nonneg().inv()
    return [b * inv for b in v]


def hermitian_gram_schmidt(vectors: Sequence[Sequence[Ball]], prec: int) -> List[List[Ball]]:
    out: List[List[Ball]] = []
    for v in vectors:
        w = list(v)
        for q in out:
            c = hdot(w, q, prec)
            w = [a - c * b for a, b in zip(w, q)]
        out.append(_normalize(w, prec))
    return out


def orthocomplement_basis(vectors: Sequence[Sequence[Ball]], form: Sequence[Sequence[int]],
                          prec: int = DEFAULT_PRECISION) -> List[List[Ball]]:
    """Basis of ``{eta : v . eta = 0 for every input v}`` with ``x . y = x^T G y``.

    The output is orthonormal for the coefficientwise Hermitian inner product.
    Each ball vector encloses the exact output of the same Gram-Schmidt
    sequence run on the exact inputs, so exact pairings with the inputs are 0.
    """
    n = len(form)
    if any(len(row) != n for row in form):
        raise ShapeMismatch("form must be square")
    G = BallMatrix.from_exact(form, prec)
    funcs = []
    for v in vectors:
        if len(v) != n:
            raise ShapeMismatch(f"vector of length {len(v)} for a form of size {n}")
        a = G.apply([b.with_prec(prec) for b in v])
        funcs.append([b.conj() for b in a])
    mids = [[b.mid() for b in f] for f in funcs]
    order = _greedy_order(mids, n)
    basis = hermitian_gram_schmidt(funcs, prec)
    k = len(basis)
    for j in order[: n - k]:
        e = [Ball._make(ZERO, ZERO, ZERO, prec) for _ in range(n)]
        e[j] = Ball._make(mpfr(1), ZERO, ZERO, prec)
        basis.extend(hermitian_gram_schmidt_step(basis, e, prec))
    return basis[k:]


def hermitian_gram_schmidt_step(basis: List[List[Ball]], v: List[Ball], prec: int) -> List[List[Ball]]:
    w = list(v)
    for q in basis:
        c = hdot(w, q, prec)
        w = [a - c * b for a, b in zip(w, q)]
    return [_normalize(w, prec)]
