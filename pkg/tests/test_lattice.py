import json

import pytest
from hypothesis import given, settings, strategies as st

from k3sep.errors import NotEven, NotSymmetric, NotUnimodular, ParseError, ShapeMismatch, WrongHSquare, WrongSignature
from k3sep.lattice import (RANK, LatticeClass, block_diagonal, discriminant, e8_negative,
                           hyperbolic_plane, is_admissible_delta, is_multiple_of_h, lattice_from_json,
                           lattice_to_json, load_lattice, pair, project_off_h, signature,
                           standard_k3_lattice, validate)

L = standard_k3_lattice()
vec = st.lists(st.integers(-5, 5), min_size=RANK, max_size=RANK)


def unit(i):
    v = [0] * RANK
    v[i] = 1
    return v


def test_standard_lattice():
    assert pair(L.h, L.h, L) == 4
    assert signature(L.gram) == (3, 19, 0)
    assert signature(e8_negative()) == (0, 8, 0)


def test_discriminant_examples():
    assert discriminant(L.h, L) == 0
    # f1 plus a (-2)-root of the first E8 block: gamma.h = 1, gamma.gamma = -2
    g = [a + b for a, b in zip(unit(1), unit(6))]
    assert pair(g, L.h, L) == 1 and pair(g, g, L) == -2
    assert discriminant(g, L) == 9
    # 4 f1 + e2 + f2: gamma.h = 4, gamma.gamma = 2
    g = [4 * a + b + c for a, b, c in zip(unit(1), unit(2), unit(3))]
    assert pair(g, L.h, L) == 4 and pair(g, g, L) == 2
    assert discriminant(g, L) == 8


def test_admissible():
    assert is_admissible_delta(9)
    assert not is_admissible_delta(3)
    assert not is_admissible_delta(0)
    assert [d for d in range(1, 20) if is_admissible_delta(d)] == [1, 4, 8, 9, 12, 16, 17]


@settings(max_examples=60, deadline=None)
@given(vec, vec, vec)
def test_pair_properties(a, b, c):
    assert pair(a, b, L) == pair(b, a, L)
    assert pair(a, a, L) % 2 == 0
    s = [x + y for x, y in zip(a, b)]
    assert pair(s, c, L) == pair(a, c, L) + pair(b, c, L)


@settings(max_examples=60, deadline=None)
@given(vec, st.integers(-4, 4))
def test_discriminant_symmetries(g, k):
    d = discriminant(g, L)
    assert discriminant([x + k * y for x, y in zip(g, L.h)], L) == d
    assert discriminant([-x for x in g], L) == d
    # the part orthogonal to h has square -Delta/4
    p = project_off_h(g, L)
    from fractions import Fraction
    sq = sum(p[i] * L.gram[i][j] * p[j] for i in range(RANK) for j in range(RANK) if L.gram[i][j])
    assert sq == Fraction(-d, 4)


def test_multiple_of_h():
    assert is_multiple_of_h([3 * x for x in L.h], L) == (True, 3)
    assert not is_multiple_of_h(unit(0), L)[0]


def test_lattice_class():
    a = LatticeClass(tuple(unit(0)))
    assert (a + a).coords == a.scale(2).coords
    assert (-a).coords[0] == -1


def _modified(fn):
    gram = [list(r) for r in L.gram]
    h = list(L.h)
    fn(gram, h)
    return gram, h


@pytest.mark.parametrize("mutate,exc", [
    (lambda g, h: g[0].__setitem__(1, 2), NotSymmetric),
    (lambda g, h: (g[0].__setitem__(0, 1)), NotEven),
    (lambda g, h: (g[0].__setitem__(0, 2), g[1].__setitem__(1, 2)), NotUnimodular),
    (lambda g, h: h.__setitem__(1, 1), WrongHSquare),
])
def test_validation_errors(mutate, exc):
    gram, h = _modified(mutate)
    with pytest.raises(exc):
        validate(gram, h)


def test_wrong_signature():
    # U^3 + E8(-1)^2 with one hyperbolic plane swapped for E8... keep rank 22 but signature (2, 20)
    gram = block_diagonal([hyperbolic_plane()] * 2 + [e8_negative()] * 2 + [[[-2, 1], [1, -2]]])
    with pytest.raises((WrongSignature, NotUnimodular)):
        validate(gram, [1, 2] + [0] * 20)
    # even unimodular but of signature (1, 17) plus padding is rejected on shape first
    with pytest.raises(ShapeMismatch):
        validate(block_diagonal([hyperbolic_plane()] + [e8_negative()] * 2), [1, 2] + [0] * 16)


def test_signature_only_failure():
    # signature (3, 19) broken by flipping the sign of all E8 blocks: (19, 3), still even unimodular
    pos8 = [[-x for x in r] for r in e8_negative()]
    gram = block_diagonal([hyperbolic_plane()] * 3 + [pos8] * 2)
    with pytest.raises(WrongSignature):
        validate(gram, [1, 2] + [0] * 20)


def test_json_roundtrip(tmp_path):
    p = tmp_path / "lat.json"
    p.write_text(json.dumps(lattice_to_json(L)))
    assert load_lattice(p) == L
    with pytest.raises(ParseError):
        lattice_from_json({"gram": [[1.5]], "h": []})
    bad = tmp_path / "bad.json"
    bad.write_text('{"gram": [\n[1, 2,\n')
    with pytest.raises(ParseError, match=r"bad.json:\d+"):
        load_lattice(bad)
