from fractions import Fraction

from hypothesis import given, strategies as st

from bandlim.dyadic import Dyadic

dyadics = st.builds(
    Dyadic,
    st.integers(min_value=-(10**12), max_value=10**12),
    st.integers(min_value=-60, max_value=60),
)


@given(dyadics, dyadics)
def test_add_mul_match_fraction(a, b):
    assert (a + b).as_fraction() == a.as_fraction() + b.as_fraction()
    assert (a - b).as_fraction() == a.as_fraction() - b.as_fraction()
    assert (a * b).as_fraction() == a.as_fraction() * b.as_fraction()


@given(dyadics, dyadics)
def test_comparisons_match_fraction(a, b):
    assert (a < b) == (a.as_fraction() < b.as_fraction())
    assert (a == b) == (a.as_fraction() == b.as_fraction())


@given(dyadics, st.integers(min_value=0, max_value=80))
def test_rounding_brackets(a, prec):
    grid = Fraction(1, 1 << prec)
    lo = a.round_floor(prec).as_fraction()
    hi = a.round_ceil(prec).as_fraction()
    v = a.as_fraction()
    assert lo <= v <= hi
    assert hi - lo <= grid


@given(dyadics, dyadics, st.integers(min_value=0, max_value=80))
def test_division_directed(a, b, prec):
    if b.is_zero():
        return
    q = a.as_fraction() / b.as_fraction()
    lo = Dyadic.div_floor(a, b, prec).as_fraction()
    hi = Dyadic.div_ceil(a, b, prec).as_fraction()
    grid = Fraction(1, 1 << prec)
    assert lo <= q <= hi
    assert hi - lo <= grid


def test_from_fraction_directed(rng):
    for _ in range(2000):
        fr = Fraction(rng.randint(-10**9, 10**9), rng.randint(1, 10**9))
        prec = rng.randint(0, 64)
        lo = Dyadic.from_fraction_floor(fr, prec).as_fraction()
        hi = Dyadic.from_fraction_ceil(fr, prec).as_fraction()
        assert lo <= fr <= hi
        assert hi - lo <= Fraction(1, 1 << prec)


def test_normalization_strips_trailing_zeros():
    d = Dyadic(8, 0)
    assert d.m == 1 and d.e == 3
    z = Dyadic(0, 17)
    assert z.m == 0 and z.e == 0


def test_decimal_str():
    assert Dyadic(3, -1).decimal_str(3) == "1.500"
    assert Dyadic(-1, -3).decimal_str(4) == "-0.1250"
