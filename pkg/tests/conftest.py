import random
from fractions import Fraction

import mpmath
import pytest

mpmath.mp.dps = 80

# the mpmath oracle itself is exact only to ~2^-260; allow this slop
# when checking containment of transcendental values
ORACLE_EPS = Fraction(1, 1 << 192)


@pytest.fixture
def rng():
    return random.Random(0xBA5D11)


def mpf_fraction(x) -> Fraction:
    """Exact rational value of an mpmath float."""
    sign, man, exp, _ = mpmath.mpf(x)._mpf_
    v = Fraction(-man if sign else man)
    if exp >= 0:
        return v * (1 << exp)
    return v / (1 << -exp)


def assert_encloses(enc, value, label=""):
    """enc must contain the oracle value (up to oracle slop)."""
    fr = value if isinstance(value, Fraction) else mpf_fraction(value)
    lo, hi = enc.lo.as_fraction(), enc.hi.as_fraction()
    assert lo - ORACLE_EPS <= fr <= hi + ORACLE_EPS, (
        f"{label}: {enc} does not contain {float(fr)}"
    )


def assert_width_le(enc, bits, label=""):
    assert enc.width().as_fraction() <= Fraction(1, 1 << bits), (
        f"{label}: width {float(enc.width().as_fraction())} > 2^-{bits}"
    )
