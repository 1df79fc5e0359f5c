"""The rank-22 lattice of integral classes with its intersection form.

Classes are integer coordinate vectors in a user-supplied basis; the Gram
matrix of that basis is validated on load (symmetric, even, unimodular,
signature (3, 19), and h.h = 4).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from typing import List, Sequence, Tuple

from .errors import (InvalidInput, NotEven, NotSymmetric, NotUnimodular, ParseError,
                     ShapeMismatch, WrongHSquare, WrongSignature)
from .exact import charpoly_int, det_int, inverse

RANK = 22
SIGNATURE = (3, 19)

E8_EDGES = [(0, 2), (2, 3), (3, 4), (4, 5), (5, 6), (6, 7), (1, 3)]


@dataclass(frozen=True)
class LatticeClass:
    coords: Tuple[int, ...]

    def __post_init__(self):
        if not all(isinstance(c, int) and not isinstance(c, bool) for c in self.coords):
            raise InvalidInput("lattice classes have integer coordinates")

    def __add__(self, other: "LatticeClass") -> "LatticeClass":
        return LatticeClass(tuple(a + b for a, b in zip(self.coords, other.coords)))

    def __neg__(self) -> "LatticeClass":
        return LatticeClass(tuple(-a for a in self.coords))

    def scale(self, n: int) -> "LatticeClass":
        return LatticeClass(tuple(n * a for a in self.coords))


@dataclass(frozen=True)
class LatticeData:
    gram: Tuple[Tuple[int, ...], ...]
    h: Tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.gram)

    @property
    def h_class(self) -> LatticeClass:
        return LatticeClass(self.h)

    def gram_inverse(self) -> List[List[int]]:
        inv = inverse(self.gram)
        return [[int(x) for x in row] for row in inv]


def _coords(x) -> Sequence[int]:
    return x.coords if isinstance(x, LatticeClass) else x


def pair(gamma, delta, L: LatticeData) -> int:
    """gamma^T G delta."""
    g, d = _coords(gamma), _coords(delta)
    if len(g) != L.rank or len(d) != L.rank:
        raise ShapeMismatch(f"classes must have {L.rank} coordinates")
    total = 0
    for i, gi in enumerate(g):
        if gi:
            row = L.gram[i]
            total += gi * sum(row[j] * dj for j, dj in enumerate(d) if dj)
    return total


def discriminant(gamma, L: LatticeData) -> int:
    """(h.gamma)^2 - 4 gamma.gamma."""
    hg = pair(L.h, gamma, L)
    return hg * hg - 4 * pair(gamma, gamma, L)


def is_admissible_delta(delta: int) -> bool:
    return delta > 0 and delta % 8 in (0, 1, 4)


def is_multiple_of_h(gamma, L: LatticeData) -> Tuple[bool, Fraction]:
    """(True, n) when gamma = n h for a rational n, else (False, 0)."""
    g = _coords(gamma)
    ratio = None
    for gi, hi in zip(g, L.h):
        if hi == 0:
            if gi != 0:
                return False, Fraction(0)
            continue
        r = Fraction(gi, hi)
        if ratio is None:
            ratio = r
        elif r != ratio:
            return False, Fraction(0)
    return True, ratio if ratio is not None else Fraction(0)


def project_off_h(gamma, L: LatticeData) -> List[Fraction]:
    """gamma - (gamma.h / 4) h, which is orthogonal to h; coordinates lie in (1/4)Z."""
    c = Fraction(pair(gamma, L.h, L), 4)
    return [gi - c * hi for gi, hi in zip(_coords(gamma), L.h)]


def signature(gram: Sequence[Sequence[int]]) -> Tuple[int, int, int]:
    """(positive, negative, zero) inertia via Descartes' rule on the characteristic polynomial.

    The polynomial of a symmetric matrix has only real roots, so the sign
    change counts are exact.
    """
    cp = charpoly_int(gram)  # highest degree first
    n = len(cp) - 1
    zero = 0
    while cp and cp[-1] == 0:
        cp = cp[:-1]
        zero += 1

    def changes(coeffs):
        signs = [c > 0 for c in coeffs if c != 0]
        return sum(1 for a, b in zip(signs, signs[1:]) if a != b)

    pos = changes(cp)
    deg = len(cp) - 1
    neg = changes([c * (-1) ** (deg - i) for i, c in enumerate(cp)])
    assert pos + neg + zero == n
    return pos, neg, zero


def validate(gram: Sequence[Sequence[int]], h: Sequence[int]) -> LatticeData:
    n = len(gram)
    if n != RANK or any(len(r) != n for r in gram):
        raise ShapeMismatch(f"Gram matrix must be {RANK} x {RANK}")
    if len(h) != n:
        raise ShapeMismatch(f"h must have {RANK} coordinates")
    for i in range(n):
        for j in range(i + 1, n):
            if gram[i][j] != gram[j][i]:
                raise NotSymmetric(f"Gram matrix differs at ({i},{j}) and ({j},{i})")
    for i in range(n):
        if gram[i][i] % 2:
            raise NotEven(f"diagonal entry {i} is odd")
    if abs(det_int(gram)) != 1:
        raise NotUnimodular("Gram determinant is not +-1")
    pos, neg, zero = signature(gram)
    if (pos, neg) != SIGNATURE or zero:
        raise WrongSignature(f"signature is ({pos},{neg}), expected {SIGNATURE}")
    L = LatticeData(tuple(tuple(int(x) for x in r) for r in gram), tuple(int(x) for x in h))
    hh = pair(L.h, L.h, L)
    if hh != 4:
        raise WrongHSquare(f"h.h = {hh}, expected 4")
    return L


def hyperbolic_plane() -> List[List[int]]:
    return [[0, 1], [1, 0]]


def e8_negative() -> List[List[int]]:
    m = [[0] * 8 for _ in range(8)]
    for i in range(8):
        m[i][i] = -2
    for a, b in E8_EDGES:
        m[a][b] = m[b][a] = 1
    return m


def block_diagonal(blocks: Sequence[Sequence[Sequence[int]]]) -> List[List[int]]:
    n = sum(len(b) for b in blocks)
    out = [[0] * n for _ in range(n)]
    k = 0
    for b in blocks:
        for i, row in enumerate(b):
            for j, x in enumerate(row):
                out[k + i][k + j] = x
        k += len(b)
    return out


def standard_k3_lattice() -> LatticeData:
    """U^3 + E8(-1)^2 with h = e1 + 2 f1 (so h.h = 4)."""
    gram = block_diagonal([hyperbolic_plane()] * 3 + [e8_negative()] * 2)
    h = [1, 2] + [0] * 20
    return validate(gram, h)


def lattice_to_json(L: LatticeData) -> dict:
    return {"gram": [list(r) for r in L.gram], "h": list(L.h)}


def lattice_from_json(data, source=None) -> LatticeData:
    if not isinstance(data, dict) or set(data) != {"gram", "h"}:
        raise ParseError("lattice file needs exactly the keys 'gram' and 'h'", source)
    gram, h = data["gram"], data["h"]

    def ints(xs):
        return isinstance(xs, list) and all(isinstance(x, int) and not isinstance(x, bool) for x in xs)

    if not isinstance(gram, list) or not all(ints(r) for r in gram) or not ints(h):
        raise ParseError("gram and h must be integer arrays", source)
    return validate(gram, h)


def load_lattice(path) -> LatticeData:
    from .io import read_json
    return lattice_from_json(read_json(path), source=str(path))


def save_lattice(L: LatticeData, path) -> None:
    with open(path, "w") as fh:
        json.dump(lattice_to_json(L), fh)
        fh.write("\n")
