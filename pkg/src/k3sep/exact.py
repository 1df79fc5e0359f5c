"""Small exact linear algebra over the rationals.

Matrices are lists of rows. Entries may be ``int`` or ``Fraction``; results
are ``Fraction`` unless stated otherwise. These routines are meant for
matrices of size up to a few dozen; the large division system in
:mod:`k3sep.reduction` goes through FLINT when it is available.
"""

from __future__ import annotations

from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

Matrix = List[List[Fraction]]


def to_fraction_matrix(m: Sequence[Sequence]) -> Matrix:
    return [[Fraction(x) for x in row] for row in m]


def rref(m: Sequence[Sequence], ncols_pivot: Optional[int] = None) -> Tuple[Matrix, List[int]]:
    """Reduced row echelon form with first-nonzero pivoting.

    Pivots are searched only in the first ``ncols_pivot`` columns (all columns
    by default), which lets callers reduce an augmented matrix ``[M | B]``.
    Returns the reduced matrix and the list of pivot columns.
    """
    a = to_fraction_matrix(m)
    nrows = len(a)
    if nrows == 0:
        return a, []
    ncols = len(a[0])
    limit = ncols if ncols_pivot is None else ncols_pivot
    pivots: List[int] = []
    r = 0
    for c in range(limit):
        if r == nrows:
            break
        p = next((i for i in range(r, nrows) if a[i][c] != 0), None)
        if p is None:
            continue
        a[r], a[p] = a[p], a[r]
        inv = 1 / a[r][c]
        row = a[r]
        for j in range(c, ncols):
            if row[j]:
                row[j] *= inv
        for i in range(nrows):
            if i != r and a[i][c] != 0:
                factor = a[i][c]
                other = a[i]
                for j in range(c, ncols):
                    if row[j]:
                        other[j] -= factor * row[j]
        pivots.append(c)
        r += 1
    return a, pivots


def solve(m: Sequence[Sequence], b: Sequence) -> Optional[List[Fraction]]:
    """One solution of ``m x = b`` with free variables set to zero, or None."""
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    aug = [list(m[i]) + [b[i]] for i in range(nrows)]
    red, pivots = rref(aug, ncols_pivot=ncols)
    for i in range(len(pivots), nrows):
        if red[i][ncols] != 0:
            return None
    x = [Fraction(0)] * ncols
    for i, c in enumerate(pivots):
        x[c] = red[i][ncols]
    return x


def inverse(m: Sequence[Sequence]) -> Matrix:
    n = len(m)
    aug = [list(m[i]) + [int(i == j) for j in range(n)] for i in range(n)]
    red, pivots = rref(aug, ncols_pivot=n)
    if len(pivots) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def matmul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list:
    bt = list(zip(*b))
    return [[sum((x * y for x, y in zip(row, col) if x and y), 0) for col in bt] for row in a]


def det_int(m: Sequence[Sequence[int]]) -> int:
    """Determinant of an integer matrix by fraction-free Bareiss elimination."""
    a = [list(map(int, row)) for row in m]
    n = len(a)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            p = next((i for i in range(k + 1, n) if a[i][k] != 0), None)
            if p is None:
                return 0
            a[k], a[p] = a[p], a[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def charpoly_int(m: Sequence[Sequence[int]]) -> List[int]:
    """Characteristic polynomial det(xI - m) of an integer matrix.

    Coefficients are returned highest degree first, leading coefficient 1.
    Faddeev-LeVerrier; every division is exact over the integers.
    """
    n = len(m)
    a = [list(map(int, row)) for row in m]
    coeffs = [1]
    mk = [[0] * n for _ in range(n)]
    c = 1
    for k in range(1, n + 1):
        # M_k = A M_{k-1} + c_{n-k+1} I
        for i in range(n):
            mk[i][i] += c
        am = [[sum(a[i][t] * mk[t][j] for t in range(n) if a[i][t]) for j in range(n)] for i in range(n)]
        tr = sum(am[i][i] for i in range(n))
        if tr % k:
            raise ArithmeticError("non-integral trace quotient")
        c = -tr // k
        coeffs.append(c)
        mk = am
    return coeffs
