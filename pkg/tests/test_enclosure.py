from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from bandlim.dyadic import Dyadic
from bandlim.enclosure import Enclosure
from bandlim.errors import DivisionByZero

fracs = st.fractions(
    min_value=-1000, max_value=1000, max_denominator=10**6
)


def enc_around(fr, slack=Fraction(1, 977)):
    return Enclosure.from_endpoints_fraction(fr - slack, fr + slack, 40)


@given(fracs, fracs)
def test_interval_add_sub_contain(a, b):
    ea, eb = enc_around(a), enc_around(b)
    assert (ea + eb).contains(a + b)
    assert (ea - eb).contains(a - b)


@given(fracs, fracs)
def test_interval_mul_contains(a, b):
    ea, eb = enc_around(a), enc_around(b)
    assert ea.mul(eb, 48).contains(a * b)


@given(fracs, fracs)
def test_interval_div_contains(a, b):
    ea, eb = enc_around(a), enc_around(b)
    if eb.contains_zero():
        with pytest.raises(DivisionByZero):
            ea.div(eb, 48)
    else:
        assert ea.div(eb, 48).contains(a / b)


@given(fracs, st.integers(min_value=0, max_value=6))
def test_pow_int_contains(a, k):
    ea = enc_around(a)
    assert ea.pow_int(k, 48).contains(a**k)


@given(st.fractions(min_value=0, max_value=10**6, max_denominator=10**4),
       st.integers(min_value=1, max_value=5))
def test_root_contains(a, k):
    ea = Enclosure.from_fraction(a, 48)
    r = ea.root(k, 48)
    assert r.lo.as_fraction() ** k <= a
    assert r.hi.as_fraction() ** k >= a


def test_abs_and_mag():
    e = Enclosure(Dyadic(-3), Dyadic(2))
    assert e.abs().lo.m == 0
    assert e.abs().hi == Dyadic(3)
    assert e.mag_upper() == Dyadic(3)
    assert e.mag_lower().m == 0


def test_exactness_bulk(rng):
    # arithmetic against the Fraction oracle on 10^4 random operand pairs
    for _ in range(10_000):
        a = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4))
        b = Fraction(rng.randint(-10**6, 10**6), rng.randint(1, 10**4))
        ea = Enclosure.from_fraction(a, 60)
        eb = Enclosure.from_fraction(b, 60)
        assert (ea + eb).contains(a + b)
        assert ea.mul(eb, 60).contains(a * b)
        if not eb.contains_zero():
            assert ea.div(eb, 60).contains(a / b)


def test_pow_fraction():
    e = Enclosure.from_fraction(Fraction(4), 40)
    r = e.pow_fraction(Fraction(3, 2), 40)
    assert r.contains(Fraction(8))
    assert r.width().as_fraction() <= Fraction(1, 1 << 38)
