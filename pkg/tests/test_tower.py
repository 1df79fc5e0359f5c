from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from k3sep.errors import InvalidInput
from k3sep.tower import DOWN, EXACT, UP, TowerReal, tower_max, tower_min


def loglog(t: TowerReal):
    """Independent evaluation of log2 log2 x in mpmath at 400 bits."""
    n, d = t.value.as_integer_ratio()
    with mpmath.workprec(400):
        v = mpmath.mpf(n) / d
        if t.level == 0:
            return mpmath.log(mpmath.log(v, 2), 2)
        if t.level == 1:
            return mpmath.log(v, 2)
        return v


level0 = st.fractions(2, 2 ** 50, max_denominator=64).map(lambda q: TowerReal(0, Fraction(q), UP))
level1 = st.fractions(Fraction(3, 2), 200, max_denominator=1024).map(lambda q: TowerReal(1, q, UP))
level2 = st.fractions(Fraction(3, 5), 12, max_denominator=1024).map(lambda q: TowerReal(2, q, UP))
towers = st.one_of(level0, level1, level2)


@settings(max_examples=1000, deadline=None)
@given(towers, towers)
def test_order_matches_direct_evaluation(a, b):
    la, lb = loglog(a), loglog(b)
    c = a.compare(b)
    if la < lb:
        assert c == -1
    elif la > lb:
        assert c == 1


def test_exact_cross_level_equality():
    assert TowerReal(1, 3, EXACT) == TowerReal(0, 8, EXACT)
    assert TowerReal(2, 2, EXACT) == TowerReal(0, 16, EXACT)
    assert TowerReal(2, 2, EXACT) > TowerReal(1, 3, EXACT)


def test_promotion_keeps_meaning():
    t = TowerReal(1, 2 ** 60, UP)
    assert t.level == 2 and t.value >= 60
    big = TowerReal.from_int_log(3 ** 200, UP)
    assert big.level == 1
    assert big >= TowerReal(0, 3 ** 30, EXACT)


@settings(max_examples=200, deadline=None)
@given(level1, level1)
def test_mul_add_directions(a, b):
    p = a.mul(b)
    s = a.add(b)
    with mpmath.workprec(300):
        va, vb = loglog(a), loglog(b)
        ea, eb = mpmath.power(2, va), mpmath.power(2, vb)
        exact_sum = mpmath.log(mpmath.power(2, ea) + mpmath.power(2, eb), 2)
        assert mpmath.mpf(p.value) >= ea + eb - mpmath.mpf(2) ** -250
        assert mpmath.mpf(s.value) >= exact_sum - mpmath.mpf(2) ** -250


def test_down_never_overestimates():
    a = TowerReal(1, 100, DOWN)
    b = TowerReal(1, 100, DOWN)
    s = a.add(b)
    assert s.value <= 101
    with pytest.raises(InvalidInput):
        TowerReal(1, 1, UP).add(TowerReal(1, 1, DOWN))


def test_pow_and_levels():
    t = TowerReal(1, 10, UP)
    assert t.pow(Fraction(9, 2)).value >= 45
    assert t.to_level(0).value == 1024
    assert t.log2_value().level == 0


def test_min_max():
    a, b = TowerReal(0, 5, UP), TowerReal(1, 3, UP)
    assert tower_max(a, b) is b and tower_min(a, b) is a


def test_render_states_level():
    t = TowerReal(2, Fraction(39, 4), UP)
    txt = t.render(name="1/eps")
    assert txt.startswith("log2(log2(1/eps)) = 9.75") and "level 2" in txt
    assert "rounded up" in txt
    assert "level 0" in TowerReal(0, 3, EXACT).render()


def test_huge_values_do_not_overflow():
    t = TowerReal(2, 1 << 40, UP)
    assert "inf" not in t.render()
    assert t > TowerReal(1, 2 ** 52, UP)


def test_invalid():
    with pytest.raises(InvalidInput):
        TowerReal(3, 1)
    with pytest.raises(InvalidInput):
        TowerReal(0, Fraction(1, 3), EXACT)
