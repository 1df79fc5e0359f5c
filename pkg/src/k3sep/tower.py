"""Tower numbers: reals stored as x, log2 x or log2 log2 x.

A :class:`TowerReal` carries a level (0, 1 or 2), an MPFR value and a
rounding tag. The represented number is ``value`` at level 0, ``2**value`` at
level 1 and ``2**2**value`` at level 2. The tag says how the stored value
relates to the quantity it stands for: ``up`` never underestimates, ``down``
never overestimates, ``exact`` is exact.

Values that reach ``2**53`` at level 0 or 1 move up a level automatically
(rounded in the direction of the tag), so bounds such as 2^c^(D^4.5) stay
representable. Comparisons are exact statements about the represented
numbers, decided by bracketing logarithms at increasing precision.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Optional, Tuple

import gmpy2
from gmpy2 import mpfr

from .errors import InvalidInput

TOWER_PREC = 128
PROMOTE_AT = mpfr(2) ** 53
_MAX_CMP_PREC = 1 << 14

UP, DOWN, EXACT = "up", "down", "exact"

_ctx_cache = {}


def _ctx(prec: int, rnd):
    key = (prec, rnd)
    c = _ctx_cache.get(key)
    if c is None:
        c = gmpy2.context(precision=prec, round=rnd, emax=gmpy2.get_emax_max(), emin=gmpy2.get_emin_min())
        _ctx_cache[key] = c
    return c


def _rnd(direction: str):
    return gmpy2.RoundDown if direction == DOWN else gmpy2.RoundUp


def _exact_mpfr(x) -> mpfr:
    """Exact MPFR copy of an int, Fraction with power-of-two denominator, or mpfr."""
    if isinstance(x, type(mpfr(0))):
        return x
    q = Fraction(x)
    n, d = q.numerator, q.denominator
    k = d.bit_length() - 1
    if d != 1 << k:
        raise InvalidInput(f"{x} is not dyadic; give a rounding direction")
    bits = max(abs(n).bit_length(), 1)
    return _ctx(bits, gmpy2.RoundToNearest).mul_2exp(gmpy2.mpz(n), -k)


def _round(x, direction: str, prec: int) -> mpfr:
    """Round an int/Fraction/mpfr in the given direction."""
    c = _ctx(prec, _rnd(direction))
    if isinstance(x, Fraction):
        return c.div(gmpy2.mpz(x.numerator), gmpy2.mpz(x.denominator))
    return c.plus(x)


def _combine(a: str, b: str) -> str:
    if a == EXACT:
        return b
    if b == EXACT or a == b:
        return a
    raise InvalidInput("cannot combine an upper bound with a lower bound")


class TowerReal:
    __slots__ = ("level", "value", "direction")

    def __init__(self, level: int, value, direction: str = UP, prec: int = TOWER_PREC):
        if level not in (0, 1, 2):
            raise InvalidInput(f"level must be 0, 1 or 2, got {level}")
        if direction not in (UP, DOWN, EXACT):
            raise InvalidInput(f"unknown rounding direction {direction!r}")
        if direction == EXACT:
            value = _exact_mpfr(value)
        else:
            value = _round(value if not isinstance(value, int) else Fraction(value), direction, prec) \
                if not isinstance(value, type(mpfr(0))) else value
        self.level = level
        self.value = value
        self.direction = direction
        self._promote(prec)

    @classmethod
    def _raw(cls, level: int, value, direction: str) -> "TowerReal":
        t = cls.__new__(cls)
        t.level, t.value, t.direction = level, value, direction
        return t

    def _promote(self, prec: int) -> None:
        while self.level < 2 and self.value >= PROMOTE_AT:
            if self.direction == EXACT:
                lg = _ctx(prec, gmpy2.RoundUp).log2(self.value)
                if not gmpy2.is_integer(lg) or _ctx(prec, gmpy2.RoundDown).log2(self.value) != lg:
                    return
                self.value = lg
            else:
                self.value = _ctx(prec, _rnd(self.direction)).log2(self.value)
            self.level += 1

    # ----------------------------------------------------------- factories
    @classmethod
    def from_number(cls, x, direction: str = EXACT, prec: int = TOWER_PREC) -> "TowerReal":
        """Level-0 number; large exact integers are kept exact at level 0."""
        if direction == EXACT:
            return cls(0, x, EXACT, prec)
        return cls(0, x, direction, prec)

    @classmethod
    def from_log2(cls, v, direction: str = UP, prec: int = TOWER_PREC) -> "TowerReal":
        return cls(1, v, direction, prec)

    @classmethod
    def from_loglog2(cls, v, direction: str = UP, prec: int = TOWER_PREC) -> "TowerReal":
        return cls(2, v, direction, prec)

    @classmethod
    def from_int_log(cls, n: int, direction: str, prec: int = TOWER_PREC) -> "TowerReal":
        """A positive integer bound, stored at level 1 when it is large."""
        if n <= 0:
            raise InvalidInput("expected a positive integer")
        if n.bit_length() <= 53:
            return cls(0, n, EXACT)
        return cls(1, _ctx(prec, _rnd(direction)).log2(gmpy2.mpz(n)), direction, prec)

    # -------------------------------------------------------------- queries
    def __repr__(self) -> str:
        return f"TowerReal(level={self.level}, value={self.value}, {self.direction})"

    def render(self, digits: int = 12, name: str = "x") -> str:
        """Text such as ``log2(log2(x)) = 9.5 [level 2, rounded up]``; the level is always shown."""
        names = {0: name, 1: f"log2({name})", 2: f"log2(log2({name}))"}
        v = self.value
        # print with a fixed number of significant digits, rounded in the tag's direction
        txt = _format(v, digits, self.direction)
        tag = {UP: "rounded up", DOWN: "rounded down", EXACT: "exact"}[self.direction]
        return f"{names[self.level]} = {txt} [level {self.level}, {tag}]"

    def log2_value(self, direction: Optional[str] = None, prec: int = TOWER_PREC) -> "TowerReal":
        """log2 of the represented number, as a TowerReal one level lower in meaning."""
        d = direction or self.direction
        if self.level == 0:
            if self.value <= 0:
                raise InvalidInput("log2 of a non-positive number")
            if d == EXACT:
                raise InvalidInput("log2 needs a rounding direction")
            return TowerReal(0, _ctx(prec, _rnd(d)).log2(self.value), d, prec)
        return TowerReal(self.level - 1, self.value, self.direction, prec)

    def exp2(self, prec: int = TOWER_PREC) -> "TowerReal":
        """2 ** x."""
        if self.level == 2:
            raise OverflowError("2**x is beyond level 2")
        return TowerReal(self.level + 1, self.value, self.direction, prec)

    def to_level(self, level: int, direction: Optional[str] = None, prec: int = TOWER_PREC) -> "TowerReal":
        """Re-express at ``level`` (up or down), rounding in ``direction``."""
        d = direction or self.direction
        if d == EXACT and level != self.level:
            raise InvalidInput("level changes need a rounding direction")
        v, lvl = self.value, self.level
        c = _ctx(prec, _rnd(d))
        while lvl < level:
            if v <= 0 or (lvl == 1 and v <= 0):
                raise InvalidInput("number too small for the requested level")
            v = c.log2(v)
            lvl += 1
        while lvl > level:
            v = c.exp2(v)
            if gmpy2.is_infinite(v):
                raise OverflowError("value does not fit at the requested level")
            lvl -= 1
        return TowerReal._raw(level, v, d)

    # ---------------------------------------------------------- comparisons
    def _interval(self, level: int, prec: int) -> Tuple[mpfr, mpfr]:
        """Enclosure of the level-``level`` representation (level >= self.level)."""
        lo = hi = self.value
        lvl = self.level
        cd, cu = _ctx(prec, gmpy2.RoundDown), _ctx(prec, gmpy2.RoundUp)
        while lvl < level:
            lo = cd.log2(lo) if lo > 0 else mpfr("-inf")
            hi = cu.log2(hi)
            lvl += 1
        return lo, hi

    def compare(self, other: "TowerReal") -> int:
        """-1, 0 or 1 according to the exact order of the represented numbers."""
        a, b = self, other
        if a.level == b.level:
            return (a.value > b.value) - (a.value < b.value)
        sign = 1
        if a.level > b.level:
            a, b, sign = b, a, -1
        # a has the lower level; the numbers at level >= 1 are positive, at level 2 > 1
        if a.value <= 0 and a.level == 0:
            return -sign
        if b.level == 2 and a.level == 1 and a.value <= 0:
            return -sign
        if b.level == 2 and a.level == 0 and a.value <= 1:
            return -sign
        exact = _exact_equal(a, b)
        if exact:
            return 0
        prec = TOWER_PREC
        while prec <= _MAX_CMP_PREC:
            lo, hi = a._interval(b.level, prec)
            if hi < b.value:
                return -sign
            if lo > b.value:
                return sign
            prec *= 2
        raise ArithmeticError("comparison undecided at maximum precision")

    def __lt__(self, other) -> bool:
        return self.compare(_as_tower(other)) < 0

    def __le__(self, other) -> bool:
        return self.compare(_as_tower(other)) <= 0

    def __gt__(self, other) -> bool:
        return self.compare(_as_tower(other)) > 0

    def __ge__(self, other) -> bool:
        return self.compare(_as_tower(other)) >= 0

    def __eq__(self, other) -> bool:
        if not isinstance(other, (TowerReal, int, float, Fraction)):
            return NotImplemented
        return self.compare(_as_tower(other)) == 0

    def __hash__(self):
        return hash((self.level, self.value))

    # ----------------------------------------------------------- arithmetic
    def mul(self, other, prec: int = TOWER_PREC) -> "TowerReal":
        other = _as_tower(other)
        d = _combine(self.direction, other.direction)
        if self.level == 0 and other.level == 0:
            if d == EXACT:
                return TowerReal(0, _exact_mpfr(_fr(self.value) * _fr(other.value)), EXACT, prec)
            if self.value < 0 or other.value < 0:
                raise InvalidInput("rounded tower multiplication needs non-negative operands")
            return TowerReal(0, _ctx(prec, _rnd(d)).mul(self.value, other.value), d, prec)
        if d == EXACT:
            raise InvalidInput("multiplying exact tower numbers needs a rounding direction")
        rd = d
        if (self.level == 0 and self.value <= 0) or (other.level == 0 and other.value <= 0):
            raise InvalidInput("tower multiplication is defined for positive numbers")
        level = max(self.level, other.level)
        if level == 1:
            a = self.to_level(1, rd, prec).value
            b = other.to_level(1, rd, prec).value
            return TowerReal(1, _ctx(prec, _rnd(rd)).add(a, b), rd, prec)
        a = self._lift(2, rd, prec)
        b = other._lift(2, rd, prec)
        return TowerReal(2, _log2_sum_exp2(a, b, rd, prec), rd, prec)

    __mul__ = mul

    def add(self, other, prec: int = TOWER_PREC) -> "TowerReal":
        other = _as_tower(other)
        d = _combine(self.direction, other.direction)
        if self.level == 0 and other.level == 0:
            if d == EXACT:
                return TowerReal(0, _exact_mpfr(_fr(self.value) + _fr(other.value)), EXACT, prec)
            return TowerReal(0, _ctx(prec, _rnd(d)).add(self.value, other.value), d, prec)
        if d == EXACT:
            raise InvalidInput("adding exact tower numbers needs a rounding direction")
        if (self.level == 0 and self.value < 0) or (other.level == 0 and other.value < 0):
            raise InvalidInput("tower addition is defined for non-negative numbers")
        if self.level == 0 and self.value == 0:
            return other.with_direction(d)
        if other.level == 0 and other.value == 0:
            return self.with_direction(d)
        level = max(self.level, other.level)
        if level == 1:
            a = self.to_level(1, d, prec).value
            b = other.to_level(1, d, prec).value
            return TowerReal(1, _log2_sum_exp2(a, b, d, prec), d, prec)
        a = self._lift(2, d, prec)
        b = other._lift(2, d, prec)
        hi = max(a, b)
        if d == DOWN:
            return TowerReal(2, hi, DOWN, prec)
        # log2(x + y) <= log2(max) + 1, so log2 log2(x + y) <= L + log2(1 + 2**-L)
        c = _ctx(prec, gmpy2.RoundUp)
        if hi > 0:
            return TowerReal(2, c.add(hi, c.log2(c.add(1, c.exp2(c.minus(hi))))), UP, prec)
        return TowerReal(2, c.log2(c.add(c.exp2(hi), 1)), UP, prec)

    __add__ = add

    def pow(self, t, prec: int = TOWER_PREC) -> "TowerReal":
        """x ** t for t > 0 (t an int, Fraction or mpfr, taken exactly)."""
        d = self.direction
        if d == EXACT:
            raise InvalidInput("pow needs a rounding direction")
        tq = Fraction(t) if isinstance(t, (int, Fraction)) else Fraction(*t.as_integer_ratio())
        if tq <= 0:
            raise InvalidInput("exponent must be positive")
        c = _ctx(prec, _rnd(d))
        if self.level == 0:
            if self.value <= 0:
                raise InvalidInput("pow of a non-positive number")
            lg = c.log2(self.value)
            return TowerReal(1, _signed_mul(tq, lg, d, prec), d, prec)
        if self.level == 1:
            return TowerReal(1, _signed_mul(tq, self.value, d, prec), d, prec)
        return TowerReal(2, c.add(self.value, c.log2(_round(tq, d, prec))), d, prec)

    def with_direction(self, d: str) -> "TowerReal":
        if self.direction == d:
            return self
        if self.direction != EXACT:
            raise InvalidInput("cannot retag a rounded bound")
        return TowerReal._raw(self.level, self.value, d)

    def _lift(self, level: int, d: str, prec: int):
        return self.to_level(level, d, prec).value

    def to_float(self) -> float:
        if self.level == 0:
            return float(self.value)
        t = self.to_level(0, UP if self.direction == EXACT else self.direction)
        return float(t.value)


def _fr(v) -> Fraction:
    return Fraction(*v.as_integer_ratio())


def _signed_mul(t: Fraction, v, d: str, prec: int):
    """t * v rounded in direction d; t > 0 is exact, v is already rounded in d."""
    c = _ctx(prec, _rnd(d))
    return c.div(c.mul(gmpy2.mpz(t.numerator), v), gmpy2.mpz(t.denominator))


def _log2_sum_exp2(a, b, d: str, prec: int):
    """log2(2**a + 2**b) rounded in direction d."""
    c = _ctx(prec, _rnd(d))
    hi, lo = (a, b) if a >= b else (b, a)
    gap = _ctx(prec, gmpy2.RoundDown if d == UP else gmpy2.RoundUp).sub(hi, lo)
    return c.add(hi, c.log2(c.add(1, c.exp2(c.minus(gap)))))


def _as_tower(x) -> TowerReal:
    if isinstance(x, TowerReal):
        return x
    if isinstance(x, float):
        x = Fraction(x)
    return TowerReal(0, x, EXACT)


def _exact_equal(a: TowerReal, b: TowerReal) -> bool:
    """Whether lower-level ``a`` equals higher-level ``b`` exactly (a.level < b.level)."""
    v = b.value
    lvl = b.level
    while lvl > a.level:
        # 2**v is a dyadic number only when v is an integer
        if not gmpy2.is_integer(v):
            return False
        if v > 1 << 20 or v < -(1 << 20):
            return False
        v = _exact_mpfr(Fraction(2) ** int(v))
        lvl -= 1
    return v == a.value


def _format(v, digits: int, direction: str) -> str:
    if gmpy2.is_zero(v):
        return "0"
    rnd = {UP: "U", DOWN: "D"}.get(direction, "N")
    return ("{0:." + str(digits) + rnd + "g}").format(v)


def tower_min(a: TowerReal, b: TowerReal) -> TowerReal:
    _combine(a.direction, b.direction)
    return a if a.compare(b) <= 0 else b


def tower_max(a: TowerReal, b: TowerReal) -> TowerReal:
    _combine(a.direction, b.direction)
    return a if a.compare(b) >= 0 else b
