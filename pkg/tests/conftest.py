"""Shared fixtures and independent oracles."""

import random
from fractions import Fraction

import flint
import pytest

from k3sep.polyring import QPoly, fermat_quartic
from k3sep.reduction import build_Q12

FLINT_CTX = flint.fmpq_mpoly_ctx.get(("w", "x", "y", "z"), "deglex")


def to_flint(p: QPoly):
    return FLINT_CTX.from_dict({e: flint.fmpq(c.numerator, c.denominator) for e, c in p.coeffs.items()})


def from_flint(q, degree: int) -> QPoly:
    return QPoly(degree, {tuple(e): Fraction(int(c.p), int(c.q)) for e, c in q.to_dict().items()})


@pytest.fixture(scope="session")
def fermat_Q():
    return build_Q12(fermat_quartic())


@pytest.fixture
def rng():
    return random.Random(20261016)
