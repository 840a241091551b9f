from fractions import Fraction

import mpmath
import pytest

from bandlim.dyadic import Dyadic
from bandlim.enclosure import Enclosure
from bandlim.series import (
    BERNOULLI,
    cos_pi,
    digamma,
    harmonic_offset,
    harmonic_offset_direct,
    ln2_enclosure,
    ln_enclosure,
    pi_enclosure,
    pi_rational_approx,
    sin_pi,
    sinc_enclosure,
    sinc_prime_enclosure,
)

from conftest import assert_encloses, assert_width_le, mpf_fraction


@pytest.mark.parametrize("prec", [8, 32, 64, 128, 256])
def test_pi(prec):
    enc = pi_enclosure(prec)
    assert_encloses(enc, mpmath.pi, "pi")
    assert_width_le(enc, prec, "pi")


def test_pi_rational_approx():
    for n in (4, 16, 48):
        r = pi_rational_approx(n)
        assert abs(r - mpf_fraction(mpmath.pi)) <= Fraction(1, 1 << n)


@pytest.mark.parametrize("prec", [16, 64, 200])
def test_ln2(prec):
    enc = ln2_enclosure(prec)
    assert_encloses(enc, mpmath.log(2), "ln2")
    assert_width_le(enc, prec, "ln2")


@pytest.mark.parametrize(
    "value",
    [Fraction(1), Fraction(2), Fraction(1, 3), Fraction(10**9), Fraction(7, 5),
     Fraction(1, 10**6), Fraction(2) ** 300],
)
def test_ln(value):
    enc = ln_enclosure(value, 64)
    assert_encloses(enc, mpmath.log(mpmath.mpf(value.numerator) / value.denominator),
                    f"ln({value})")
    assert_width_le(enc, 60, "ln")


def test_sin_cos_pi_grid():
    for num in range(-24, 25):
        t = Fraction(num, 8)
        e = Enclosure.from_fraction(t, 80)
        s = sin_pi(e, 64)
        c = cos_pi(e, 64)
        assert_encloses(s, mpmath.sinpi(mpmath.mpf(num) / 8), f"sin_pi({t})")
        assert_encloses(c, mpmath.cospi(mpmath.mpf(num) / 8), f"cos_pi({t})")
        assert_width_le(s, 58, "sin_pi")
        assert_width_le(c, 58, "cos_pi")


def test_sin_pi_integer_zeros():
    for n in (-3, 0, 7, 1000):
        s = sin_pi(Enclosure.from_int(n), 64)
        assert s.contains(Fraction(0))
        assert_width_le(s, 60, "sin at integer")


def test_sin_pi_wide_interval():
    e = Enclosure(Dyadic(-5), Dyadic(7))
    s = sin_pi(e, 32)
    assert s.contains(Fraction(1)) and s.contains(Fraction(-1))


def test_sinc_values(rng):
    assert sinc_enclosure(Enclosure.from_int(0), 64).contains(Fraction(1))
    for n in (1, -2, 9):
        enc = sinc_enclosure(Enclosure.from_int(n), 64)
        assert enc.contains(Fraction(0))
        assert_width_le(enc, 60, "sinc integer")
    for _ in range(300):
        t = Fraction(rng.randint(-4000, 4000), rng.randint(1, 64))
        enc = sinc_enclosure(Enclosure.from_fraction(t, 80), 64)
        assert_encloses(enc, mpmath.sincpi(mpmath.mpf(t.numerator) / t.denominator),
                        f"sinc({t})")
        assert_width_le(enc, 56, f"sinc({t})")


def test_sinc_decay_bound(rng):
    # |sinc(t)| <= 1/(pi t) must be visible in the enclosure for large t
    enc = sinc_enclosure(Enclosure.from_fraction(Fraction(1001, 2), 80), 64)
    assert enc.mag_upper().as_fraction() <= Fraction(1, 1500)


def test_sinc_prime(rng):
    # symbolic oracle: sinc'(t) = cos(pi t)/t - sin(pi t)/(pi t^2)
    assert sinc_prime_enclosure(Enclosure.from_int(0), 64).contains(Fraction(0))
    half = sinc_prime_enclosure(
        Enclosure.from_fraction(Fraction(1, 2), 80), 64
    )
    assert_encloses(half, -4 / mpmath.pi, "sinc'(1/2)")
    for _ in range(200):
        t = Fraction(rng.randint(-2000, 2000), rng.randint(1, 32))
        enc = sinc_prime_enclosure(Enclosure.from_fraction(t, 80), 64)
        tf = mpmath.mpf(t.numerator) / t.denominator
        if t == 0:
            oracle = mpmath.mpf(0)
        else:
            oracle = (mpmath.cospi(tf) / tf
                      - mpmath.sinpi(tf) / (mpmath.pi * tf**2))
        assert_encloses(enc, oracle, f"sinc'({t})")
        assert_width_le(enc, 52, f"sinc'({t})")


def test_bernoulli_table():
    import sympy

    for j, b in enumerate(BERNOULLI, start=1):
        assert b == Fraction(*sympy.bernoulli(2 * j).as_numer_denom())


@pytest.mark.parametrize(
    "x",
    [Fraction(1, 2), Fraction(1), Fraction(3, 2), Fraction(7, 3),
     Fraction(20), Fraction(1000), Fraction(1, 100), Fraction(2) ** 296],
)
def test_digamma(x):
    enc = digamma(x, 64)
    oracle = mpmath.digamma(mpmath.mpf(x.numerator) / x.denominator)
    assert_encloses(enc, oracle, f"digamma({x})")
    assert_width_le(enc, 60, f"digamma({x})")


def test_harmonic_offset_routes_agree():
    c = Fraction(-1, 2)
    direct = harmonic_offset_direct(5000, c, 64)
    via_psi = (digamma(5000 + 1 + c, 70) - digamma(1 + c, 70))
    assert direct.intersect(via_psi).width().as_fraction() >= 0  # overlap
    oracle = mpmath.fsum(1 / (mpmath.mpf(k) - 0.5) for k in range(1, 5001))
    assert_encloses(direct, oracle, "harmonic direct")
    assert_encloses(via_psi, oracle, "harmonic psi")


def test_harmonic_offset_big_uses_psi():
    n = (1 << 15) + 7
    enc = harmonic_offset(n, Fraction(-1, 2), 64)
    oracle = mpmath.digamma(n + mpmath.mpf(1) / 2) - mpmath.digamma(mpmath.mpf(1) / 2)
    assert_encloses(enc, oracle, "harmonic big")
    assert_width_le(enc, 60, "harmonic big")
