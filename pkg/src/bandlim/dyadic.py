"""Exact dyadic rationals: integers scaled by a power of two.

A ``Dyadic`` stores an integer mantissa ``m`` and exponent ``e`` and
represents ``m * 2**e``.  Addition, subtraction and multiplication are
exact; division and conversion from general rationals round in a caller
chosen direction to a fixed absolute grid of ``2**-prec``.  All interval
endpoints in the library are dyadics, so outward rounding is exact and
results are bit-reproducible.
"""

from __future__ import annotations

from fractions import Fraction

__all__ = ["Dyadic", "ZERO", "ONE"]


def _div_floor(a: int, b: int) -> int:
    return a // b


def _div_ceil(a: int, b: int) -> int:
    return -((-a) // b)


class Dyadic:
    __slots__ = ("m", "e")

    def __init__(self, m: int, e: int = 0):
        # strip trailing zero bits so mantissas stay small under chaining
        if m == 0:
            e = 0
        else:
            shift = (m & -m).bit_length() - 1
            if shift:
                m >>= shift
                e += shift
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "e", e)

    def __setattr__(self, *a):  # immutable
        raise AttributeError("Dyadic is immutable")

    # -- constructors -------------------------------------------------

    @staticmethod
    def from_int(n: int) -> "Dyadic":
        return Dyadic(n, 0)

    @staticmethod
    def from_fraction_floor(fr: Fraction, prec: int) -> "Dyadic":
        """Largest multiple of 2**-prec that is <= fr."""
        return Dyadic(_div_floor(fr.numerator << prec, fr.denominator), -prec)

    @staticmethod
    def from_fraction_ceil(fr: Fraction, prec: int) -> "Dyadic":
        return Dyadic(_div_ceil(fr.numerator << prec, fr.denominator), -prec)

    # -- exact arithmetic ---------------------------------------------

    def __add__(self, other: "Dyadic") -> "Dyadic":
        a, b = self, other
        if a.e == b.e:
            return Dyadic(a.m + b.m, a.e)
        if a.e < b.e:
            return Dyadic(a.m + (b.m << (b.e - a.e)), a.e)
        return Dyadic((a.m << (a.e - b.e)) + b.m, b.e)

    def __sub__(self, other: "Dyadic") -> "Dyadic":
        return self + (-other)

    def __neg__(self) -> "Dyadic":
        return Dyadic(-self.m, self.e)

    def __abs__(self) -> "Dyadic":
        return Dyadic(abs(self.m), self.e)

    def __mul__(self, other: "Dyadic") -> "Dyadic":
        return Dyadic(self.m * other.m, self.e + other.e)

    def shifted(self, k: int) -> "Dyadic":
        """self * 2**k, exact."""
        return Dyadic(self.m, self.e + k)

    # -- rounded operations -------------------------------------------

    def round_floor(self, prec: int) -> "Dyadic":
        """Round down to the 2**-prec grid."""
        if self.e >= -prec:
            return self
        return Dyadic(self.m >> (-prec - self.e), -prec)

    def round_ceil(self, prec: int) -> "Dyadic":
        if self.e >= -prec:
            return self
        shift = -prec - self.e
        return Dyadic(_div_ceil(self.m, 1 << shift), -prec)

    @staticmethod
    def div_floor(a: "Dyadic", b: "Dyadic", prec: int) -> "Dyadic":
        if b.m == 0:
            raise ZeroDivisionError("dyadic division by zero")
        num = a.m
        den = b.m
        if den < 0:
            num, den = -num, -den
        shift = prec + a.e - b.e
        if shift >= 0:
            return Dyadic(_div_floor(num << shift, den), -prec)
        return Dyadic(_div_floor(num, den << (-shift)), -prec)

    @staticmethod
    def div_ceil(a: "Dyadic", b: "Dyadic", prec: int) -> "Dyadic":
        if b.m == 0:
            raise ZeroDivisionError("dyadic division by zero")
        num = a.m
        den = b.m
        if den < 0:
            num, den = -num, -den
        shift = prec + a.e - b.e
        if shift >= 0:
            return Dyadic(_div_ceil(num << shift, den), -prec)
        return Dyadic(_div_ceil(num, den << (-shift)), -prec)

    # -- comparisons ---------------------------------------------------

    def _cmp(self, other: "Dyadic") -> int:
        a, b = self, other
        if a.e == b.e:
            am, bm = a.m, b.m
        elif a.e < b.e:
            am, bm = a.m, b.m << (b.e - a.e)
        else:
            am, bm = a.m << (a.e - b.e), b.m
        return (am > bm) - (am < bm)

    def __lt__(self, other):
        return self._cmp(other) < 0

    def __le__(self, other):
        return self._cmp(other) <= 0

    def __gt__(self, other):
        return self._cmp(other) > 0

    def __ge__(self, other):
        return self._cmp(other) >= 0

    def __eq__(self, other):
        return isinstance(other, Dyadic) and self.m == other.m and self.e == other.e

    def __hash__(self):
        return hash((self.m, self.e))

    @property
    def sign(self) -> int:
        return (self.m > 0) - (self.m < 0)

    def is_zero(self) -> bool:
        return self.m == 0

    # -- conversions ----------------------------------------------------

    def as_fraction(self) -> Fraction:
        if self.e >= 0:
            return Fraction(self.m << self.e, 1)
        return Fraction(self.m, 1 << (-self.e))

    def __float__(self) -> float:
        try:
            return self.m * (2.0 ** self.e)
        except OverflowError:
            f = self.as_fraction()
            return f.numerator / f.denominator

    def decimal_str(self, digits: int = 12) -> str:
        """Plain decimal rendering, advisory only."""
        fr = self.as_fraction()
        scaled = fr * 10**digits
        n = scaled.numerator // scaled.denominator
        sign = "-" if n < 0 else ""
        n = abs(n)
        whole, frac = divmod(n, 10**digits)
        return f"{sign}{whole}.{str(frac).zfill(digits)}"

    def __repr__(self):
        return f"Dyadic({self.m}, {self.e})"

    def __str__(self):
        if self.e >= 0:
            return str(self.m << self.e)
        return f"{self.m}/2^{-self.e}"


ZERO = Dyadic(0)
ONE = Dyadic(1)
