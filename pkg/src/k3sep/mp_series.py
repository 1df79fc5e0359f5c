"""Theta-series bound for Noether-Lefschetz degrees.

A and B are the Jacobi-type theta series sum q^(n^2) and sum (-1)^n q^(n^2);
Theta is a fixed integer combination of homogeneous degree-21 products in A
and B divided by 2^22, and Psi = 108 sum_{n>0} q^(8 n^2). The coefficient of
q^Delta in Theta - Psi bounds deg NL_Delta. All arithmetic is exact on
truncated integer power series.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import isqrt
from typing import Dict, List, Tuple

from .errors import DivisibilityViolation, InvalidInput

# coefficient of A^(21-b) B^b in 2^22 Theta, indexed by b
THETA_COEFFS = (
    3, 0, -81, -627, -14436, -20007, -169092, -120636, -621558, -292796, -1038366,
    -346122, -878388, -207186, -361908, -56364, -60021, -4812, -1881, -27, 0, 1,
)
THETA_SHIFT = 22
PSI_WEIGHT = 108


@dataclass(frozen=True)
class IntSeries:
    """Integer power series truncated after q^N."""

    coeffs: Tuple[int, ...]

    @classmethod
    def zero(cls, N: int) -> "IntSeries":
        return cls((0,) * (N + 1))

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, k: int) -> int:
        return self.coeffs[k]

    def __len__(self) -> int:
        return len(self.coeffs)

    def _check(self, other: "IntSeries") -> None:
        if other.order != self.order:
            raise InvalidInput(f"truncation orders differ: {self.order} vs {other.order}")

    def __add__(self, other: "IntSeries") -> "IntSeries":
        self._check(other)
        return IntSeries(tuple(a + b for a, b in zip(self.coeffs, other.coeffs)))

    def __sub__(self, other: "IntSeries") -> "IntSeries":
        self._check(other)
        return IntSeries(tuple(a - b for a, b in zip(self.coeffs, other.coeffs)))

    def scale(self, c: int) -> "IntSeries":
        return IntSeries(tuple(c * a for a in self.coeffs))

    def __mul__(self, other: "IntSeries") -> "IntSeries":
        self._check(other)
        return IntSeries(tuple(_mul_sparse(list(self.coeffs), _support(other.coeffs), self.order)))

    def __pow__(self, e: int) -> "IntSeries":
        if e < 0:
            raise InvalidInput("negative powers are not supported")
        out = IntSeries((1,) + (0,) * self.order)
        base = self
        while e:
            if e & 1:
                out = out * base
            e >>= 1
            if e:
                base = base * base
        return out


def _support(coeffs) -> List[Tuple[int, int]]:
    return [(k, c) for k, c in enumerate(coeffs) if c]


def _mul_sparse(dense: List[int], sparse: List[Tuple[int, int]], N: int) -> List[int]:
    """dense * sparse truncated at N; cost is N times the number of sparse terms."""
    out = [0] * (N + 1)
    for k, c in sparse:
        if c == 1:
            for i in range(N + 1 - k):
                out[i + k] += dense[i]
        else:
            for i in range(N + 1 - k):
                out[i + k] += c * dense[i]
    return out


def _square_terms(N: int, alternating: bool) -> Dict[int, int]:
    out = {0: 1}
    for n in range(1, isqrt(N) + 1):
        out[n * n] = -2 if (alternating and n % 2) else 2
    return out


def theta_A_B(N: int) -> Tuple[IntSeries, IntSeries]:
    if N < 0:
        raise InvalidInput("truncation order must be non-negative")
    A = [0] * (N + 1)
    B = [0] * (N + 1)
    for k, c in _square_terms(N, False).items():
        A[k] = c
    for k, c in _square_terms(N, True).items():
        B[k] = c
    return IntSeries(tuple(A)), IntSeries(tuple(B))


def theta_numerator(N: int) -> IntSeries:
    """2^22 Theta truncated at N, before the division.

    Evaluated by homogeneous Horner: S <- S B + c_b A^(21-b), so every
    product is with a sparse theta series.
    """
    if N < 0:
        raise InvalidInput("truncation order must be non-negative")
    a_terms = sorted(_square_terms(N, False).items())
    b_terms = sorted(_square_terms(N, True).items())
    a_pows = [[1] + [0] * N]
    for _ in range(21):
        a_pows.append(_mul_sparse(a_pows[-1], a_terms, N))
    S = [THETA_COEFFS[21]] + [0] * N
    for b in range(20, -1, -1):
        S = _mul_sparse(S, b_terms, N)
        c = THETA_COEFFS[b]
        if c:
            ap = a_pows[21 - b]
            S = [s + c * x for s, x in zip(S, ap)]
    return IntSeries(tuple(S))


@lru_cache(maxsize=8)
def theta_series(N: int) -> IntSeries:
    num = theta_numerator(N)
    out = []
    for k, c in enumerate(num.coeffs):
        q, r = divmod(c, 1 << THETA_SHIFT)
        if r:
            raise DivisibilityViolation(f"coefficient {k} of the numerator is not divisible by 2^22")
        out.append(q)
    return IntSeries(tuple(out))


def psi_series(N: int) -> IntSeries:
    if N < 0:
        raise InvalidInput("truncation order must be non-negative")
    out = [0] * (N + 1)
    n = 1
    while 8 * n * n <= N:
        out[8 * n * n] = PSI_WEIGHT
        n += 1
    return IntSeries(tuple(out))


def mp_degree_upper(delta: int, N: int = None) -> int:
    """Coefficient of q^Delta in Theta - Psi, an upper bound for deg NL_Delta."""
    if delta <= 0:
        raise InvalidInput("Delta must be positive")
    N = delta if N is None else N
    if N < delta:
        raise InvalidInput(f"truncation order {N} is below Delta = {delta}")
    return theta_series(N)[delta] - psi_series(N)[delta]


@lru_cache(maxsize=64)
def _r_table(dim: int, N: int) -> Tuple[int, ...]:
    A, _ = theta_A_B(N)
    return (A ** dim).coeffs


def r_n(k: int, dim: int) -> int:
    """Number of integer vectors of length ``dim`` with squared norm k."""
    if k < 0:
        raise InvalidInput("k must be non-negative")
    return _r_table(dim, k)[k]


def r21(k: int) -> int:
    return r_n(k, 21)


def r_n_bruteforce(k: int, dim: int) -> int:
    """Explicit nested enumeration, one coordinate per level, no caching."""
    if k < 0:
        raise InvalidInput("k must be non-negative")
    count = 0

    def walk(i: int, rest: int) -> None:
        nonlocal count
        if rest == 0:
            count += 1  # every remaining coordinate is zero
            return
        if i == dim:
            return
        a = 0
        while a * a <= rest:
            walk(i + 1, rest - a * a)
            if a:
                walk(i + 1, rest - a * a)
            a += 1

    walk(0, k)
    return count


def r_n_recursive(k: int, dim: int) -> int:
    """Nested enumeration peeling one coordinate at a time; exact for any dim."""

    @lru_cache(maxsize=None)
    def count(rest: int, d: int) -> int:
        if d == 0:
            return 1 if rest == 0 else 0
        total = 0
        a = 0
        while a * a <= rest:
            total += (1 if a == 0 else 2) * count(rest - a * a, d - 1)
            a += 1
        return total

    return count(k, dim)
