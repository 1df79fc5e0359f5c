"""Macaulay division by the Jacobian ideal and Griffiths-Dwork reduction.

For a smooth quartic f every degree-12 form m can be written as
``m = b0*df/dw + b1*df/dx + b2*df/dy + b3*df/dz`` with ``bi`` of degree 9.
:func:`build_Q12` fixes one such choice per monomial, :func:`apply_Qd` extends
it to higher degrees by peeling off variables, and :func:`reduce_Gk` uses it
to lower the pole order of ``a/f^k`` down to 3.

All arithmetic here is exact. The 455 x 880 division system is solved with
FLINT; its reduced row echelon form is unique, so the selected solution is
the one obtained by first-nonzero pivoting with free variables set to zero.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import flint

from .errors import (DegreeMismatch, DegreeTooLow, InvalidInput, ParseError,
                     SingularSurface)
from .polyring import (Exponent, QPoly, from_records, monomial_basis,
                       monomial_index, multiply, one_norm, partial, to_records)

Quad = Tuple[QPoly, QPoly, QPoly, QPoly]

BASE_DEGREE = 12


def jacobian(f: QPoly) -> Quad:
    """The four partial derivatives of a quartic."""
    if f.degree != 4:
        raise DegreeMismatch(f"expected a quartic, got degree {f.degree}")
    return tuple(partial(f, i) for i in range(4))  # type: ignore[return-value]


@dataclass(frozen=True)
class DivisionMap:
    """A fixed choice of Q12: one 4-tuple of degree-9 forms per degree-12 monomial.

    ``columns[j]`` belongs to ``monomial_basis(12)[j]``. ``norm`` is the
    operator norm for the 1-norm on both sides, i.e. the largest column sum
    of the ``||bi||_1``.
    """

    f: QPoly
    columns: Tuple[Quad, ...]
    norm: Fraction

    def column(self, m: Exponent) -> Quad:
        return self.columns[monomial_index(BASE_DEGREE)[tuple(m)]]


def _column_norm(col: Sequence[QPoly]) -> Fraction:
    return sum((one_norm(b) for b in col), Fraction(0))


def division_matrix(f: QPoly) -> List[List[Fraction]]:
    """The 455 x 880 matrix of ``(b0..b3) -> sum bi * dif`` in monomial coordinates.

    Column ``i*220 + j`` is the unknown coefficient of ``monomial_basis(9)[j]``
    in ``bi``; rows follow ``monomial_basis(12)``.
    """
    jac = jacobian(f)
    basis9 = monomial_basis(9)
    index12 = monomial_index(12)
    n9 = len(basis9)
    rows = [[Fraction(0)] * (4 * n9) for _ in range(len(index12))]
    for i, d in enumerate(jac):
        for j, m in enumerate(basis9):
            for e, c in d.coeffs.items():
                t = (e[0] + m[0], e[1] + m[1], e[2] + m[2], e[3] + m[3])
                rows[index12[t]][i * n9 + j] = c
    return rows


def _to_fraction(q) -> Fraction:
    return Fraction(int(q.p), int(q.q))


def build_Q12(f: QPoly) -> DivisionMap:
    """Solve the division system for every degree-12 monomial.

    Raises SingularSurface when some monomial is not in the Jacobian ideal,
    which happens exactly when the quartic surface is singular.
    """
    rows = division_matrix(f)
    n12 = len(rows)
    nvars = len(rows[0])
    flat = []
    for r, row in enumerate(rows):
        flat.extend(flint.fmpq(c.numerator, c.denominator) if c else 0 for c in row)
        flat.extend(1 if r == k else 0 for k in range(n12))
    red = flint.fmpq_mat(n12, nvars + n12, flat).rref()[0].tolist()

    pivots = [_first_nonzero(row, nvars) for row in red]
    if pivots[-1] is None:
        # rows whose pivot sits in the identity block are left null vectors of
        # the division matrix; any monomial such a row touches is not in the ideal
        row = red[pivots.index(None)]
        witness = monomial_basis(12)[_first_nonzero(row[nvars:], n12)]
        raise SingularSurface(
            f"the Jacobian ideal misses monomial {witness} in degree 12; the surface is singular",
            witness,
        )

    basis9 = monomial_basis(9)
    n9 = len(basis9)
    columns = []
    for m in range(n12):
        parts: List[Dict[Exponent, Fraction]] = [{}, {}, {}, {}]
        for r, c in enumerate(pivots):
            v = red[r][nvars + m]
            if v != 0:
                parts[c // n9][basis9[c % n9]] = _to_fraction(v)
        columns.append(tuple(QPoly._raw(9, p) for p in parts))
    norm = max(_column_norm(col) for col in columns)
    return DivisionMap(f, tuple(columns), norm)


def _first_nonzero(row, stop: int) -> Optional[int]:
    for c in range(stop):
        if row[c] != 0:
            return c
    return None


def is_smooth(f: QPoly) -> bool:
    try:
        build_Q12(f)
    except SingularSurface:
        return False
    return True


def _peel(e: Exponent, count: int) -> Tuple[Exponent, Exponent]:
    """Split ``e`` into (shift, base) by removing ``count`` factors, lowest variable first."""
    shift = [0, 0, 0, 0]
    base = list(e)
    i = 0
    while count:
        while not base[i]:
            i += 1
        take = min(base[i], count)
        base[i] -= take
        shift[i] += take
        count -= take
    return tuple(shift), tuple(base)  # type: ignore[return-value]


def apply_Qd(Q: DivisionMap, a: QPoly) -> Quad:
    """Divide a form of degree d >= 12: ``a = sum bi * dif``.

    Equivalent to the recursion ``Q_d(a) = sum xi * Q_{d-1}(ai)`` with ``ai``
    from :func:`split_by_variable`; unrolled, each monomial is divided by its
    leading ``d-12`` variables and the stored column of the remainder is used.
    """
    d = a.degree
    if d < BASE_DEGREE:
        raise DegreeTooLow(f"division needs degree >= {BASE_DEGREE}, got {d}")
    index12 = monomial_index(BASE_DEGREE)
    out: List[Dict[Exponent, Fraction]] = [{}, {}, {}, {}]
    for mu, c in a.coeffs.items():
        shift, base = _peel(mu, d - BASE_DEGREE)
        s0, s1, s2, s3 = shift
        col = Q.columns[index12[base]]
        for i in range(4):
            acc = out[i]
            for (e0, e1, e2, e3), v in col[i].coeffs.items():
                t = (e0 + s0, e1 + s1, e2 + s2, e3 + s3)
                acc[t] = acc.get(t, 0) + c * v
    return tuple(QPoly._raw(d - 3, {e: v for e, v in acc.items() if v}) for acc in out)  # type: ignore[return-value]


def apply_Qd_recursive(Q: DivisionMap, a: QPoly) -> Quad:
    """Literal form of the recursion, kept as a reference for :func:`apply_Qd`."""
    from .polyring import split_by_variable, variable

    if a.degree < BASE_DEGREE:
        raise DegreeTooLow(f"division needs degree >= {BASE_DEGREE}, got {a.degree}")
    if a.degree == BASE_DEGREE:
        out = [QPoly.zero(9) for _ in range(4)]
        for m, c in a.coeffs.items():
            col = Q.column(m)
            out = [o + b.scale(c) for o, b in zip(out, col)]
        return tuple(out)  # type: ignore[return-value]
    out = [QPoly.zero(a.degree - 3) for _ in range(4)]
    for i, ai in enumerate(split_by_variable(a)):
        if ai.is_zero():
            continue
        sub = apply_Qd_recursive(Q, ai)
        xi = variable(i)
        out = [o + multiply(xi, b) for o, b in zip(out, sub)]
    return tuple(out)  # type: ignore[return-value]


def recombine(f: QPoly, parts: Sequence[QPoly]) -> QPoly:
    """``sum bi * dif``; the inverse direction of division."""
    jac = jacobian(f)
    total = QPoly.zero(parts[0].degree + 3)
    for b, d in zip(parts, jac):
        total = total + multiply(b, d)
    return total


def reduce_step(Q: DivisionMap, a: QPoly, k: int) -> QPoly:
    """One pole-order reduction: degree 4k-4 at order k to degree 4k-8 at order k-1."""
    b = apply_Qd(Q, a)
    acc: Dict[Exponent, Fraction] = {}
    for i in range(4):
        for e, c in partial(b[i], i).coeffs.items():
            acc[e] = acc.get(e, 0) + c
    scale = Fraction(1, k - 1)
    return QPoly._raw(a.degree - 4, {e: c * scale for e, c in acc.items() if c})


def reduce_Gk(Q: DivisionMap, a: QPoly, k: int) -> QPoly:
    """Reduce ``a/f^k`` (deg a = 4k-4, k >= 3) to a degree-8 numerator over ``f^3``."""
    if k < 3:
        raise InvalidInput(f"reduce_Gk needs k >= 3, got {k}; use raise_pole for k = 1, 2")
    if a.degree != 4 * k - 4:
        raise DegreeMismatch(f"order {k} needs degree {4 * k - 4}, got {a.degree}")
    while k > 3:
        a = reduce_step(Q, a, k)
        k -= 1
    return a


def raise_pole(f: QPoly, a: QPoly, k: int) -> QPoly:
    """Numerator over ``f^3`` for ``a/f^k`` when k is 1 or 2: ``a f^2`` and ``a f``."""
    if k not in (1, 2):
        raise InvalidInput(f"raise_pole handles k = 1, 2, got {k}")
    if a.degree != 4 * k - 4:
        raise DegreeMismatch(f"order {k} needs degree {4 * k - 4}, got {a.degree}")
    out = multiply(a, f)
    return multiply(out, f) if k == 1 else out


def to_pole_three(Q: DivisionMap, a: QPoly, k: int) -> QPoly:
    """Degree-8 numerator ``G_k(a)`` for any k >= 1."""
    return raise_pole(Q.f, a, k) if k < 3 else reduce_Gk(Q, a, k)


def gd_norm_bound(k: int, normQ12) -> Fraction:
    """(4 ||Q12||)^(k-3), the 1-norm bound for G_k."""
    if k < 3:
        raise InvalidInput(f"k must be >= 3, got {k}")
    q = Fraction(normQ12)
    if q < 0:
        raise InvalidInput("norm must be non-negative")
    return (4 * q) ** (k - 3)


def gamma_upper_bound(normQ12, normA_upper) -> Fraction:
    """Exact value of ``C max(||A|| C^2, 1)`` with ``C = max(4 ||Q12||, 1)``.

    Inputs are rationals or binary floats (converted exactly). The clamp of C
    at 1 keeps the bound valid when ``4 ||Q12|| < 1``; for ``4 ||Q12|| >= 1``
    it is the plain formula.
    """
    q = Fraction(normQ12)
    norm_a = Fraction(*normA_upper.as_integer_ratio()) if hasattr(normA_upper, "as_integer_ratio") \
        and not isinstance(normA_upper, (int, Fraction)) else Fraction(normA_upper)
    if q < 0 or norm_a < 0:
        raise InvalidInput("norms must be non-negative")
    if norm_a == 0:
        raise InvalidInput("the period matrix bound must be positive; a zero matrix has no holomorphic form")
    c = max(4 * q, Fraction(1))
    return c * max(norm_a * c * c, Fraction(1))


# ---------------------------------------------------------------------------
# serialization

def division_map_to_json(Q: DivisionMap) -> dict:
    return {
        "f": to_records(Q.f),
        "norm": f"{Q.norm.numerator}/{Q.norm.denominator}",
        "monomial_order": "grlex w>x>y>z",
        "columns": [[to_records(b) for b in col] for col in Q.columns],
    }


def division_map_from_json(data: dict, source=None, verify: bool = True) -> DivisionMap:
    try:
        f = from_records(data["f"], source=source)
        norm = Fraction(data["norm"])
        raw = data["columns"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed division map: {exc}", source) from None
    if len(raw) != len(monomial_basis(BASE_DEGREE)):
        raise ParseError(f"expected 455 columns, found {len(raw)}", source)
    columns = []
    for col in raw:
        if len(col) != 4:
            raise ParseError("each column needs four polynomials", source)
        columns.append(tuple(from_records(b, degree=9, source=source) for b in col))
    Q = DivisionMap(f, tuple(columns), norm)
    if verify:
        if max(_column_norm(col) for col in columns) != norm:
            raise ParseError("stored norm does not match the columns", source)
        for m, col in zip(monomial_basis(BASE_DEGREE), columns):
            if recombine(f, col) != QPoly.monomial(m):
                raise ParseError(f"column for {m} does not divide", source)
    return Q


def save_division_map(Q: DivisionMap, path) -> None:
    with open(path, "w") as fh:
        json.dump(division_map_to_json(Q), fh)
        fh.write("\n")
