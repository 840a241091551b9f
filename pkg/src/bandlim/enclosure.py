"""Certified intervals with dyadic endpoints.

An ``Enclosure`` [lo, hi] asserts that the exact real value under
discussion lies between its endpoints.  All rounding is outward, so the
assertion survives every operation.  Operations that can widen the
interval take an explicit working precision ``prec`` and round to the
absolute grid ``2**-prec``.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .dyadic import Dyadic, ZERO
from .errors import DivisionByZero

__all__ = ["Enclosure"]


def _nth_root_floor(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0, k >= 1, by Newton iteration."""
    if n < 0:
        raise ValueError("negative radicand")
    if n == 0:
        return 0
    if k == 1:
        return n
    if k == 2:
        return math.isqrt(n)
    x = 1 << (-(-n.bit_length() // k))
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x**k > n:
        x -= 1
    return x


class Enclosure:
    __slots__ = ("lo", "hi")

    def __init__(self, lo: Dyadic, hi: Dyadic):
        if lo > hi:
            raise ValueError(f"inverted interval [{lo}, {hi}]")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __setattr__(self, *a):
        raise AttributeError("Enclosure is immutable")

    # -- constructors --------------------------------------------------

    @staticmethod
    def point(d: Dyadic) -> "Enclosure":
        return Enclosure(d, d)

    @staticmethod
    def from_int(n: int) -> "Enclosure":
        d = Dyadic(n)
        return Enclosure(d, d)

    @staticmethod
    def from_fraction(fr: Fraction, prec: int) -> "Enclosure":
        """Tightest grid interval containing fr; degenerate if fr is dyadic."""
        if (fr.denominator & (fr.denominator - 1)) == 0:
            d = Dyadic(fr.numerator, -(fr.denominator.bit_length() - 1))
            return Enclosure(d, d)
        return Enclosure(
            Dyadic.from_fraction_floor(fr, prec),
            Dyadic.from_fraction_ceil(fr, prec),
        )

    @staticmethod
    def from_endpoints_fraction(lo: Fraction, hi: Fraction, prec: int) -> "Enclosure":
        return Enclosure(
            Dyadic.from_fraction_floor(lo, prec),
            Dyadic.from_fraction_ceil(hi, prec),
        )

    ZERO: "Enclosure"
    ONE: "Enclosure"

    # -- queries ---------------------------------------------------------

    def width(self) -> Dyadic:
        return self.hi - self.lo

    def midpoint(self, prec: int = 64) -> Dyadic:
        return (self.lo + self.hi).shifted(-1).round_floor(prec)

    def contains_zero(self) -> bool:
        return self.lo.m <= 0 <= self.hi.m

    def contains(self, v) -> bool:
        if isinstance(v, Dyadic):
            return self.lo <= v and v <= self.hi
        fr = v if isinstance(v, Fraction) else Fraction(v)
        return self.lo.as_fraction() <= fr <= self.hi.as_fraction()

    def contains_enclosure(self, other: "Enclosure") -> bool:
        return self.lo <= other.lo and other.hi <= self.hi

    def strictly_positive(self) -> bool:
        return self.lo.m > 0

    def strictly_negative(self) -> bool:
        return self.hi.m < 0

    def sign_definite(self) -> bool:
        return self.lo.m > 0 or self.hi.m < 0

    def is_point(self) -> bool:
        return self.lo == self.hi

    def mag_upper(self) -> Dyadic:
        """Upper bound on |x| over the interval."""
        a, b = abs(self.lo), abs(self.hi)
        return a if a > b else b

    def mag_lower(self) -> Dyadic:
        """Lower bound on |x| over the interval (0 if it straddles)."""
        if self.contains_zero():
            return ZERO
        a, b = abs(self.lo), abs(self.hi)
        return a if a < b else b

    # -- exact operations -------------------------------------------------

    def __add__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo + other.lo, self.hi + other.hi)

    def __sub__(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(self.lo - other.hi, self.hi - other.lo)

    def __neg__(self) -> "Enclosure":
        return Enclosure(-self.hi, -self.lo)

    def abs(self) -> "Enclosure":
        if self.lo.m >= 0:
            return self
        if self.hi.m <= 0:
            return -self
        return Enclosure(ZERO, self.mag_upper())

    def scale(self, d: Dyadic) -> "Enclosure":
        """Exact multiplication by a dyadic scalar."""
        a, b = self.lo * d, self.hi * d
        return Enclosure(a, b) if d.m >= 0 else Enclosure(b, a)

    def shifted(self, k: int) -> "Enclosure":
        return Enclosure(self.lo.shifted(k), self.hi.shifted(k))

    def round(self, prec: int) -> "Enclosure":
        return Enclosure(self.lo.round_floor(prec), self.hi.round_ceil(prec))

    def widen(self, err: Dyadic) -> "Enclosure":
        """Add [-err, err]; err must be nonnegative."""
        return Enclosure(self.lo - err, self.hi + err)

    def widen_2exp(self, k: int) -> "Enclosure":
        return self.widen(Dyadic(1, k))

    def hull(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(
            self.lo if self.lo < other.lo else other.lo,
            self.hi if self.hi > other.hi else other.hi,
        )

    def intersect(self, other: "Enclosure") -> "Enclosure":
        lo = self.lo if self.lo > other.lo else other.lo
        hi = self.hi if self.hi < other.hi else other.hi
        return Enclosure(lo, hi)

    # -- rounded operations -----------------------------------------------

    def mul(self, other: "Enclosure", prec: int) -> "Enclosure":
        ps = (
            self.lo * other.lo,
            self.lo * other.hi,
            self.hi * other.lo,
            self.hi * other.hi,
        )
        return Enclosure(
            min(ps).round_floor(prec), max(ps).round_ceil(prec)
        )

    def square(self, prec: int) -> "Enclosure":
        a = self.abs()
        return Enclosure(
            (a.lo * a.lo).round_floor(prec), (a.hi * a.hi).round_ceil(prec)
        )

    def recip(self, prec: int) -> "Enclosure":
        if self.contains_zero():
            raise DivisionByZero("reciprocal of interval containing zero")
        one = Dyadic(1)
        return Enclosure(
            Dyadic.div_floor(one, self.hi, prec),
            Dyadic.div_ceil(one, self.lo, prec),
        )

    def div(self, other: "Enclosure", prec: int) -> "Enclosure":
        if other.contains_zero():
            raise DivisionByZero("division by interval containing zero")
        cands = (
            Dyadic.div_floor(self.lo, other.lo, prec),
            Dyadic.div_floor(self.lo, other.hi, prec),
            Dyadic.div_floor(self.hi, other.lo, prec),
            Dyadic.div_floor(self.hi, other.hi, prec),
        )
        cands_up = (
            Dyadic.div_ceil(self.lo, other.lo, prec),
            Dyadic.div_ceil(self.lo, other.hi, prec),
            Dyadic.div_ceil(self.hi, other.lo, prec),
            Dyadic.div_ceil(self.hi, other.hi, prec),
        )
        return Enclosure(min(cands), max(cands_up))

    def pow_int(self, k: int, prec: int) -> "Enclosure":
        if k == 0:
            return Enclosure.from_int(1)
        if k < 0:
            return self.pow_int(-k, prec + 4).recip(prec)
        if k % 2 == 0:
            base = self.abs()
        else:
            base = self
        # binary powering on endpoint fractions, single outward rounding
        lo = base.lo.as_fraction() ** k
        hi = base.hi.as_fraction() ** k
        if k % 2 == 0 and self.contains_zero():
            lo = Fraction(0)
        return Enclosure.from_endpoints_fraction(min(lo, hi), max(lo, hi), prec)

    def sqrt(self, prec: int) -> "Enclosure":
        return self.root(2, prec)

    def root(self, k: int, prec: int) -> "Enclosure":
        """k-th root; requires a nonnegative interval."""
        if self.lo.m < 0:
            raise ValueError("root of an interval with negative part")

        def rt_floor(d: Dyadic) -> Dyadic:
            # d = m * 2**e; floor(d**(1/k) * 2**prec) needs
            # floor((m * 2**(e + k*prec)) ** (1/k))
            shift = d.e + k * prec
            if shift >= 0:
                return Dyadic(_nth_root_floor(d.m << shift, k), -prec)
            return Dyadic(_nth_root_floor(d.m >> (-shift), k), -prec)

        lo = rt_floor(self.lo)
        hi_f = rt_floor(self.hi)
        # hi_f**k <= hi; candidate + 1 grid step is a safe ceiling
        hi = hi_f + Dyadic(1, -prec)
        return Enclosure(lo, hi)

    def pow_fraction(self, p: Fraction, prec: int) -> "Enclosure":
        """|self| ** p for nonnegative intervals and rational p > 0."""
        a, b = p.numerator, p.denominator
        base = self.abs()
        g = prec + 8
        powed = base.pow_int(a, g * b)
        return powed.root(b, prec)

    # -- ordering helpers ---------------------------------------------------

    def max_with(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(
            self.lo if self.lo > other.lo else other.lo,
            self.hi if self.hi > other.hi else other.hi,
        )

    def min_with(self, other: "Enclosure") -> "Enclosure":
        return Enclosure(
            self.lo if self.lo < other.lo else other.lo,
            self.hi if self.hi < other.hi else other.hi,
        )

    def entirely_below(self, v: Dyadic) -> bool:
        return self.hi < v

    def entirely_above(self, v: Dyadic) -> bool:
        return self.lo > v

    # -- formatting -----------------------------------------------------------

    def __eq__(self, other):
        return (
            isinstance(other, Enclosure)
            and self.lo == other.lo
            and self.hi == other.hi
        )

    def __hash__(self):
        return hash((self.lo, self.hi))

    def __repr__(self):
        return f"Enclosure({self.lo!r}, {self.hi!r})"

    def __str__(self):
        return f"[{self.lo}, {self.hi}]"

    def render(self, digits: int = 12) -> str:
        """Exact dyadic endpoints plus advisory decimal rendering."""
        return (
            f"[{self.lo}, {self.hi}] "
            f"~ [{self.lo.decimal_str(digits)}, {self.hi.decimal_str(digits)}]"
        )


Enclosure.ZERO = Enclosure.point(ZERO)
Enclosure.ONE = Enclosure.from_int(1)
