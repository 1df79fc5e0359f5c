"""Exact homogeneous polynomials in w, x, y, z over the rationals.

A :class:`QPoly` is a sparse map from exponent 4-tuples to nonzero
``Fraction`` coefficients, together with its degree. The zero polynomial of
any degree is allowed and has an empty coefficient map.

Monomials are ordered graded-lex with w > x > y > z: within a fixed degree the
exponent tuples are sorted in descending lexicographic order, so
``monomial_basis(2)`` starts ``w^2, wx, wy, wz, x^2, ...``.
"""

from __future__ import annotations

import random
from fractions import Fraction
from functools import lru_cache
from math import comb
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .errors import DegreeMismatch, DegreeUnderflow, InvalidInput, ParseError

Exponent = Tuple[int, int, int, int]

VARIABLES = ("w", "x", "y", "z")


@lru_cache(maxsize=None)
def _basis(d: int) -> Tuple[Exponent, ...]:
    out = []
    for a in range(d, -1, -1):
        for b in range(d - a, -1, -1):
            for c in range(d - a - b, -1, -1):
                out.append((a, b, c, d - a - b - c))
    return tuple(out)


def monomial_basis(d: int) -> List[Exponent]:
    """Exponent tuples of degree ``d`` in graded-lex order (w > x > y > z)."""
    if d < 0:
        raise InvalidInput(f"degree must be non-negative, got {d}")
    return list(_basis(d))


@lru_cache(maxsize=None)
def monomial_index(d: int) -> Dict[Exponent, int]:
    return {m: i for i, m in enumerate(_basis(d))}


def slice_dim(d: int) -> int:
    """N_d = C(d+3, 3), zero for negative d."""
    return comb(d + 3, 3) if d >= 0 else 0


class QPoly:
    """Homogeneous polynomial with exact rational coefficients."""

    __slots__ = ("degree", "coeffs")

    def __init__(self, degree: int, coeffs: Optional[Mapping[Exponent, object]] = None):
        if degree < 0:
            raise InvalidInput(f"degree must be non-negative, got {degree}")
        clean: Dict[Exponent, Fraction] = {}
        for e, c in (coeffs or {}).items():
            e = tuple(int(v) for v in e)
            if len(e) != 4 or min(e) < 0:
                raise InvalidInput(f"bad exponent {e}")
            if sum(e) != degree:
                raise DegreeMismatch(f"exponent {e} does not have degree {degree}")
            c = Fraction(c)
            if c:
                clean[e] = clean.get(e, 0) + c
                if not clean[e]:
                    del clean[e]
        self.degree = degree
        self.coeffs = clean

    @classmethod
    def _raw(cls, degree: int, coeffs: Dict[Exponent, Fraction]) -> "QPoly":
        # trusted constructor: exponents already valid, zeros already pruned
        p = cls.__new__(cls)
        p.degree = degree
        p.coeffs = coeffs
        return p

    @classmethod
    def zero(cls, degree: int) -> "QPoly":
        return cls._raw(degree, {})

    @classmethod
    def monomial(cls, exponent: Sequence[int], coeff=1) -> "QPoly":
        e = tuple(exponent)
        return cls(sum(e), {e: coeff})

    @classmethod
    def from_dense(cls, degree: int, vector: Sequence) -> "QPoly":
        basis = _basis(degree)
        if len(vector) != len(basis):
            raise InvalidInput(f"dense vector of length {len(vector)} for degree {degree}")
        return cls._raw(degree, {m: Fraction(c) for m, c in zip(basis, vector) if c})

    def to_dense(self) -> List[Fraction]:
        return [self.coeffs.get(m, Fraction(0)) for m in _basis(self.degree)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def __len__(self) -> int:
        return len(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, QPoly):
            if not self.coeffs and not other.coeffs:
                return True
            return self.degree == other.degree and self.coeffs == other.coeffs
        if other == 0:
            return not self.coeffs
        return NotImplemented

    def __hash__(self):
        return hash((self.degree, frozenset(self.coeffs.items())))

    def __repr__(self) -> str:
        return f"QPoly({self.degree}, {to_string(self)!r})"

    def __add__(self, other: "QPoly") -> "QPoly":
        if not isinstance(other, QPoly):
            return NotImplemented
        if not other.coeffs:
            return self
        if not self.coeffs:
            return other
        if other.degree != self.degree:
            raise DegreeMismatch(f"cannot add degrees {self.degree} and {other.degree}")
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            v = out.get(e, 0) + c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return QPoly._raw(self.degree, out)

    def __neg__(self) -> "QPoly":
        return QPoly._raw(self.degree, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other: "QPoly") -> "QPoly":
        return self + (-other)

    def scale(self, c) -> "QPoly":
        c = Fraction(c)
        if not c:
            return QPoly.zero(self.degree)
        return QPoly._raw(self.degree, {e: v * c for e, v in self.coeffs.items()})

    def __mul__(self, other):
        if isinstance(other, QPoly):
            return multiply(self, other)
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    __rmul__ = __mul__

    def one_norm(self) -> Fraction:
        return one_norm(self)


def multiply(p: QPoly, q: QPoly) -> QPoly:
    """Exact product; the degree of the result is the sum of the degrees."""
    out: Dict[Exponent, Fraction] = {}
    for (a0, a1, a2, a3), c in p.coeffs.items():
        for (b0, b1, b2, b3), d in q.coeffs.items():
            e = (a0 + b0, a1 + b1, a2 + b2, a3 + b3)
            out[e] = out.get(e, 0) + c * d
    return QPoly._raw(p.degree + q.degree, {e: c for e, c in out.items() if c})


def partial(p: QPoly, i: int) -> QPoly:
    """Partial derivative with respect to variable ``i`` (0=w .. 3=z)."""
    if p.degree == 0:
        raise DegreeUnderflow("cannot differentiate a degree-0 polynomial")
    if i not in (0, 1, 2, 3):
        raise InvalidInput(f"variable index must be 0..3, got {i}")
    out = {}
    for e, c in p.coeffs.items():
        k = e[i]
        if k:
            f = list(e)
            f[i] -= 1
            out[tuple(f)] = c * k
    return QPoly._raw(p.degree - 1, out)


def one_norm(p: QPoly) -> Fraction:
    """Sum of absolute values of the coefficients."""
    return sum((abs(c) for c in p.coeffs.values()), Fraction(0))


def split_by_variable(a: QPoly) -> Tuple[QPoly, QPoly, QPoly, QPoly]:
    """Write ``a = w a0 + x a1 + y a2 + z a3`` with disjoint monomial supports.

    Each monomial goes to the lowest-index variable dividing it.
    """
    if a.degree == 0:
        raise DegreeUnderflow("cannot split a degree-0 polynomial")
    parts: List[Dict[Exponent, Fraction]] = [{}, {}, {}, {}]
    for e, c in a.coeffs.items():
        i = next(k for k in range(4) if e[k])
        f = list(e)
        f[i] -= 1
        parts[i][tuple(f)] = c
    return tuple(QPoly._raw(a.degree - 1, part) for part in parts)  # type: ignore[return-value]


def variable(i: int) -> QPoly:
    e = [0, 0, 0, 0]
    e[i] = 1
    return QPoly._raw(1, {tuple(e): Fraction(1)})


def power(p: QPoly, n: int) -> QPoly:
    out = QPoly._raw(0, {(0, 0, 0, 0): Fraction(1)})
    for _ in range(n):
        out = multiply(out, p)
    return out


def random_poly(degree: int, terms: Optional[int] = None, rng: Optional[random.Random] = None,
                height: int = 9, denominators: int = 1) -> QPoly:
    """Random polynomial with ``terms`` distinct monomials (dense when None).

    Coefficients are p/q with |p| <= height and 1 <= q <= denominators.
    """
    rng = rng or random.Random()
    basis = _basis(degree)
    support = basis if terms is None or terms >= len(basis) else rng.sample(basis, terms)
    coeffs = {}
    for m in support:
        num = 0
        while num == 0:
            num = rng.randint(-height, height)
        coeffs[m] = Fraction(num, rng.randint(1, denominators))
    return QPoly._raw(degree, coeffs)


# ---------------------------------------------------------------------------
# text formats

def to_records(p: QPoly) -> List[dict]:
    """Serialize as ``[{"e": [..4 ints..], "c": "p/q"}, ...]`` in basis order."""
    index = monomial_index(p.degree)
    items = sorted(p.coeffs.items(), key=lambda kv: index[kv[0]])
    return [{"e": list(e), "c": _frac_str(c)} for e, c in items]


def _frac_str(c: Fraction) -> str:
    return f"{c.numerator}/{c.denominator}"


def from_records(records, degree: Optional[int] = None, source=None) -> QPoly:
    """Parse the record list produced by :func:`to_records`.

    The degree is inferred from the exponents; ``degree`` is required only for
    the zero polynomial and is otherwise checked against the inferred value.
    """
    if not isinstance(records, list):
        raise ParseError("polynomial must be a list of records", source)
    coeffs: Dict[Exponent, Fraction] = {}
    inferred = None
    for k, rec in enumerate(records):
        where = f"record {k}"
        if not isinstance(rec, dict) or set(rec) != {"e", "c"}:
            raise ParseError(f"{where}: expected keys 'e' and 'c'", source)
        e = rec["e"]
        if (not isinstance(e, list) or len(e) != 4
                or not all(isinstance(v, int) and not isinstance(v, bool) and v >= 0 for v in e)):
            raise ParseError(f"{where}: exponent must be 4 non-negative integers", source)
        d = sum(e)
        if inferred is None:
            inferred = d
        elif d != inferred:
            raise ParseError(f"{where}: exponent {e} has degree {d}, expected {inferred}", source)
        c = rec["c"]
        if not isinstance(c, str):
            raise ParseError(f"{where}: coefficient must be a string 'p/q'", source)
        try:
            num, _, den = c.partition("/")
            num_i = int(num)
            den_i = int(den) if den else 1
            if den_i <= 0:
                raise ValueError
        except ValueError:
            raise ParseError(f"{where}: malformed coefficient {c!r}", source) from None
        from math import gcd
        if den and gcd(num_i, den_i) != 1:
            raise ParseError(f"{where}: coefficient {c!r} is not in lowest terms", source)
        t = tuple(e)
        if t in coeffs:
            raise ParseError(f"{where}: duplicate exponent {e}", source)
        coeffs[t] = Fraction(num_i, den_i)
    if inferred is None:
        if degree is None:
            raise ParseError("empty polynomial needs an explicit degree", source)
        inferred = degree
    if degree is not None and degree != inferred:
        raise ParseError(f"expected degree {degree}, found {inferred}", source)
    return QPoly(inferred, coeffs)


def to_string(p: QPoly) -> str:
    if not p.coeffs:
        return "0"
    index = monomial_index(p.degree)
    parts = []
    for e, c in sorted(p.coeffs.items(), key=lambda kv: index[kv[0]]):
        mon = "*".join(
            v if k == 1 else f"{v}^{k}" for v, k in zip(VARIABLES, e) if k
        )
        if not mon:
            parts.append(str(c))
        elif c == 1:
            parts.append(mon)
        elif c == -1:
            parts.append("-" + mon)
        else:
            parts.append(f"{c}*{mon}")
    return " + ".join(parts).replace("+ -", "- ")


def fermat_quartic() -> QPoly:
    return QPoly(4, {(4, 0, 0, 0): 1, (0, 4, 0, 0): 1, (0, 0, 4, 0): 1, (0, 0, 0, 4): 1})


def iter_terms(p: QPoly) -> Iterable[Tuple[Exponent, Fraction]]:
    index = monomial_index(p.degree)
    return sorted(p.coeffs.items(), key=lambda kv: index[kv[0]])
