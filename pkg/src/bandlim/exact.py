"""Exact rational scalars and effective (modulus-controlled) reals.

A real number is represented by a pair of programs: a rational sequence
and a modulus of convergence guaranteeing |value - seq(n)| <= 2**-M for
all n >= modulus(M).  Programs are expressions in the description DSL
(see :mod:`bandlim.dsl`); this module only relies on their ``eval_int``
/ ``eval_fraction`` duck type so it stays import-light.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .dyadic import Dyadic
from .enclosure import Enclosure
from .errors import DivisionByZero, GeneratorFailure

__all__ = [
    "rational",
    "rational_arith",
    "rational_sign",
    "rational_parts",
    "RealDescription",
    "ComplexDescription",
    "approximate",
]


def rational(numerator: int, denominator: int = 1) -> Fraction:
    """Normalized exact rational; gcd(num, den) = 1, denominator > 0."""
    if denominator == 0:
        raise DivisionByZero("rational with zero denominator")
    return Fraction(numerator, denominator)


def rational_sign(r: Fraction) -> int:
    """+1 or -1; zero carries +1 by convention."""
    return -1 if r < 0 else 1


def rational_parts(r: Fraction) -> tuple[int, int, int]:
    """(sign, natural numerator, natural denominator), normalized."""
    return rational_sign(r), abs(r.numerator), r.denominator


def rational_arith(a: Fraction, b: Fraction, op: str) -> Fraction:
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    if op == "/":
        if b == 0:
            raise DivisionByZero("rational division by zero")
        return a / b
    raise ValueError(f"unknown operation {op!r}")


@dataclass(frozen=True)
class RealDescription:
    """A computable real: rational sequence program plus recursive
    modulus program.

    Contract (testable on constructed instances, not decidable): for
    all n >= modulus(M), |true value - sequence(n)| <= 2**-M.
    """

    sequence: object  # program: natural -> Fraction
    modulus: object  # program: natural -> natural

    def approximate(self, m_bits: int) -> Enclosure:
        return approximate(self, m_bits)


@dataclass(frozen=True)
class ComplexDescription:
    re: RealDescription
    im: RealDescription

    def approximate(self, m_bits: int) -> tuple[Enclosure, Enclosure]:
        return approximate(self.re, m_bits), approximate(self.im, m_bits)


def approximate(x: RealDescription, m_bits: int) -> Enclosure:
    """Enclosure of the described real with width <= 2**-(m_bits-2)."""
    if m_bits < 0:
        raise ValueError("precision must be nonnegative")
    try:
        n = x.modulus.eval_int(m_bits)
        r = x.sequence.eval_fraction(n)
    except (DivisionByZero, GeneratorFailure):
        raise
    except Exception as exc:  # a program failed internally
        raise GeneratorFailure(f"description program raised: {exc}") from exc
    eps = Fraction(1, 1 << m_bits)
    return Enclosure.from_endpoints_fraction(r - eps, r + eps, m_bits + 2)
