"""Certified enclosures for the elementary functions the library needs.

Every routine returns an interval that provably contains the exact
value: power series are truncated with explicit remainder bounds
(alternating-series or Lagrange), and the digamma asymptotic series is
truncated at a term whose magnitude bounds the error.  Nothing here
consults floating point.
"""

from __future__ import annotations

from fractions import Fraction

from .dyadic import Dyadic
from .enclosure import Enclosure

__all__ = [
    "pi_enclosure",
    "pi_rational_approx",
    "ln2_enclosure",
    "ln_enclosure",
    "sin_pi",
    "cos_pi",
    "sinc_enclosure",
    "sinc_prime_enclosure",
    "digamma",
    "trigamma",
    "tetragamma",
    "harmonic_offset",
    "harmonic_offset_direct",
    "BERNOULLI",
]

_QUARTER = Dyadic(1, -2)


# ---------------------------------------------------------------------------
# pi via Machin's formula
# ---------------------------------------------------------------------------

def _atan_recip_scaled(q: int, w: int) -> tuple[int, int]:
    """Enclosure of atan(1/q) as integers at scale 2**-w.

    Alternating series sum_k (-1)^k / ((2k+1) q^(2k+1)); the remainder
    is bounded by the first omitted term.
    """
    num = 1 << w
    qsq = q * q
    denom_pow = q
    lo = hi = 0
    k = 0
    sign = 1
    while True:
        d = (2 * k + 1) * denom_pow
        if d > num:
            # first omitted term < 1 ulp
            return lo - 1, hi + 1
        t_lo = num // d
        t_hi = -((-num) // d)
        if sign > 0:
            lo += t_lo
            hi += t_hi
        else:
            lo -= t_hi
            hi -= t_lo
        sign = -sign
        denom_pow *= qsq
        k += 1


_pi_cache: dict[str, object] = {"prec": -1, "enc": None}


def pi_enclosure(prec: int) -> Enclosure:
    """Interval containing pi with width <= 2**-prec."""
    if _pi_cache["prec"] >= prec:
        return _pi_cache["enc"].round(prec + 4)
    w = prec + 16
    a5_lo, a5_hi = _atan_recip_scaled(5, w)
    a239_lo, a239_hi = _atan_recip_scaled(239, w)
    lo = 16 * a5_lo - 4 * a239_hi
    hi = 16 * a5_hi - 4 * a239_lo
    enc = Enclosure(Dyadic(lo, -w), Dyadic(hi, -w))
    _pi_cache["prec"] = prec
    _pi_cache["enc"] = enc
    return enc.round(prec + 4)


def pi_rational_approx(n: int) -> Fraction:
    """Dyadic rational r with |pi - r| <= 2**-n; the sequence behind the
    built-in description of pi."""
    enc = pi_enclosure(n + 3)
    return enc.midpoint(n + 3).as_fraction()


# ---------------------------------------------------------------------------
# logarithms
# ---------------------------------------------------------------------------

def _atanh_frac_scaled(p: int, q: int, w: int) -> tuple[int, int]:
    """Enclosure of atanh(p/q), 0 < p/q <= 1/3, at scale 2**-w.

    Positive series sum y^(2k+1)/(2k+1); geometric tail bound with
    ratio y^2 <= 1/9, so tail <= (9/8) * next term.
    """
    lo = hi = 0
    # y^(2k+1) * 2^w held as directed scaled ints
    pw_lo = (p << w) // q
    pw_hi = -(((-p) << w) // q)
    psq, qsq = p * p, q * q
    k = 0
    while True:
        d = 2 * k + 1
        t_lo = pw_lo // d
        t_hi = -((-pw_hi) // d)
        if t_hi <= 1:
            # tail <= (9/8)(t_hi + 1) + rounding slack
            return lo, hi + 2 * (t_hi + 1)
        lo += t_lo
        hi += t_hi
        pw_lo = (pw_lo * psq) // qsq
        pw_hi = -((-(pw_hi * psq)) // qsq)
        k += 1


_ln2_cache: dict[str, object] = {"prec": -1, "enc": None}


def ln2_enclosure(prec: int) -> Enclosure:
    if _ln2_cache["prec"] >= prec:
        return _ln2_cache["enc"].round(prec + 4)
    w = prec + 16
    lo, hi = _atanh_frac_scaled(1, 3, w)
    enc = Enclosure(Dyadic(2 * lo, -w), Dyadic(2 * hi, -w))
    _ln2_cache["prec"] = prec
    _ln2_cache["enc"] = enc
    return enc.round(prec + 4)


def _ln_fraction(fr: Fraction, prec: int) -> Enclosure:
    """ln of an exact positive rational."""
    if fr <= 0:
        raise ValueError("log of nonpositive value")
    # fr = f * 2**s with f in [1, 2)
    s = fr.numerator.bit_length() - fr.denominator.bit_length()
    f = fr / Fraction(2) ** s
    if f >= 2:
        f /= 2
        s += 1
    elif f < 1:
        f *= 2
        s -= 1
    y = (f - 1) / (f + 1)  # in [0, 1/3]
    w = prec + 16
    a_lo, a_hi = _atanh_frac_scaled(y.numerator, y.denominator, w)
    at = Enclosure(Dyadic(2 * a_lo, -w), Dyadic(2 * a_hi, -w))
    if s == 0:
        return at
    return at + ln2_enclosure(prec + 8).scale(Dyadic(s))


def ln_enclosure(x, prec: int) -> Enclosure:
    """ln over an enclosure or exact value; requires positivity."""
    if isinstance(x, Fraction):
        return _ln_fraction(x, prec)
    if isinstance(x, Dyadic):
        return _ln_fraction(x.as_fraction(), prec)
    if x.lo.m <= 0:
        raise ValueError("log of interval reaching zero")
    lo = _ln_fraction(x.lo.as_fraction(), prec)
    hi = _ln_fraction(x.hi.as_fraction(), prec)
    return Enclosure(lo.lo, hi.hi)


# ---------------------------------------------------------------------------
# trigonometry at pi-scaled arguments
# ---------------------------------------------------------------------------

def _sin_series(z: Enclosure, prec: int) -> Enclosure:
    """sin on |z| <~ 5 by Taylor series with Lagrange remainder."""
    g = prec + 8
    zsq = z.square(g)
    term = z
    acc = z
    zmag = z.mag_upper().as_fraction()
    # remainder after degree d is |z|^(d+2)/(d+2)!
    bound = zmag**3 / 6
    k = 1
    while bound > Fraction(1, 1 << (prec + 4)):
        term = term.mul(zsq, g).scale(Dyadic(-1)).div(
            Enclosure.from_int((2 * k) * (2 * k + 1)), g
        )
        acc = acc + term
        k += 1
        bound = bound * zmag * zmag / ((2 * k) * (2 * k + 1))
    acc = acc.widen(Dyadic.from_fraction_ceil(bound, prec + 4))
    return acc.intersect(Enclosure(Dyadic(-1), Dyadic(1))).round(prec)


def _cos_series(z: Enclosure, prec: int) -> Enclosure:
    g = prec + 8
    zsq = z.square(g)
    term = Enclosure.ONE
    acc = Enclosure.ONE
    zmag = z.mag_upper().as_fraction()
    bound = zmag**2 / 2
    k = 1
    while bound > Fraction(1, 1 << (prec + 4)):
        term = term.mul(zsq, g).scale(Dyadic(-1)).div(
            Enclosure.from_int((2 * k - 1) * (2 * k)), g
        )
        acc = acc + term
        k += 1
        bound = bound * zmag * zmag / ((2 * k - 1) * (2 * k))
    acc = acc.widen(Dyadic.from_fraction_ceil(bound, prec + 4))
    return acc.intersect(Enclosure(Dyadic(-1), Dyadic(1))).round(prec)


_FULL_UNIT = Enclosure(Dyadic(-1), Dyadic(1))


def _reduce_mod2(x: Enclosure) -> tuple[Enclosure, int]:
    """Shift x by an integer q so the result is near [0, 1]; returns
    (x - q, q mod 2)."""
    mid = (x.lo + x.hi).shifted(-1).as_fraction()
    q = int(mid // 1)
    shift = Enclosure.from_int(q)
    return x - shift, q & 1


def sin_pi(x: Enclosure, prec: int) -> Enclosure:
    """Enclosure of sin(pi * x)."""
    if x.width() >= Dyadic(2):
        return _FULL_UNIT
    x1, parity = _reduce_mod2(x)
    z = x1.mul(pi_enclosure(prec + 8), prec + 8)
    res = _sin_series(z, prec)
    return -res if parity else res


def cos_pi(x: Enclosure, prec: int) -> Enclosure:
    if x.width() >= Dyadic(2):
        return _FULL_UNIT
    x1, parity = _reduce_mod2(x)
    z = x1.mul(pi_enclosure(prec + 8), prec + 8)
    res = _cos_series(z, prec)
    return -res if parity else res


# ---------------------------------------------------------------------------
# sinc and its derivative
# ---------------------------------------------------------------------------

def _sinc_series(x: Enclosure, prec: int) -> Enclosure:
    """sinc on |x| <= 1/4 via s(u) = sum (-u)^k/(2k+1)!, u = (pi x)^2.

    Terms alternate and decrease (u < 1), so the remainder is bounded
    by the first omitted term.
    """
    g = prec + 8
    u = x.mul(pi_enclosure(g), g).square(g)
    term = Enclosure.ONE
    acc = Enclosure.ONE
    u_hi = u.hi.as_fraction()
    bound = u_hi / 6
    k = 1
    while bound > Fraction(1, 1 << (prec + 4)):
        term = term.mul(u, g).scale(Dyadic(-1)).div(
            Enclosure.from_int((2 * k) * (2 * k + 1)), g
        )
        acc = acc + term
        k += 1
        bound = bound * u_hi / ((2 * k) * (2 * k + 1))
    return acc.widen(Dyadic.from_fraction_ceil(bound, prec + 4)).round(prec)


def sinc_enclosure(x: Enclosure, prec: int) -> Enclosure:
    """Enclosure of sinc(x) = sin(pi x)/(pi x), sinc(0) = 1."""
    pieces = []
    neg_quarter = -_QUARTER
    inner = x.intersect(Enclosure(neg_quarter, _QUARTER)) if (
        x.lo <= _QUARTER and x.hi >= neg_quarter
    ) else None
    if inner is not None:
        pieces.append(_sinc_series(inner, prec))
    if x.hi > _QUARTER:
        seg = Enclosure(max(x.lo, _QUARTER), x.hi)
        pieces.append(_sinc_quotient(seg, prec))
    if x.lo < neg_quarter:
        seg = Enclosure(x.lo, min(x.hi, neg_quarter))
        pieces.append(_sinc_quotient(seg, prec))
    out = pieces[0]
    for p in pieces[1:]:
        out = out.hull(p)
    return out.intersect(_FULL_UNIT)


def _sinc_quotient(x: Enclosure, prec: int) -> Enclosure:
    g = prec + 8
    s = sin_pi(x, g)
    return s.div(x.mul(pi_enclosure(g), g), prec)


def _sinc_prime_series(x: Enclosure, prec: int) -> Enclosure:
    """sinc'(x) on |x| <= 1/4: 2 pi^2 x * s'(u) with
    s'(u) = sum_{k>=1} (-1)^k k u^(k-1)/(2k+1)!, u = (pi x)^2.

    Terms alternate and decrease in magnitude for u < 1, so the
    remainder is bounded by the first omitted term.
    """
    g = prec + 8
    pi_e = pi_enclosure(g)
    u = x.mul(pi_e, g).square(g)
    u_hi = u.hi.as_fraction()
    acc = Enclosure.ZERO
    upow = Enclosure.ONE  # u^(k-1)
    fact = 6  # (2k+1)!
    k = 1
    sign = -1
    bound = Fraction(1, 6)  # magnitude bound of term k
    eps = Fraction(1, 1 << (prec + 4))
    while bound > eps:
        term = upow.scale(Dyadic(sign * k)).div(Enclosure.from_int(fact), g)
        acc = acc + term
        upow = upow.mul(u, g)
        bound = bound * u_hi * Fraction(k + 1, k * (2 * k + 2) * (2 * k + 3))
        fact *= (2 * k + 2) * (2 * k + 3)
        k += 1
        sign = -sign
    acc = acc.widen(Dyadic.from_fraction_ceil(bound, prec + 4))
    two_pi_sq = pi_e.square(g).shifted(1)
    return acc.mul(two_pi_sq, g).mul(x, prec)


def sinc_prime_enclosure(x: Enclosure, prec: int) -> Enclosure:
    """Enclosure of d/dx sinc(x)."""
    pieces = []
    neg_quarter = -_QUARTER
    if x.lo <= _QUARTER and x.hi >= neg_quarter:
        inner = x.intersect(Enclosure(neg_quarter, _QUARTER))
        pieces.append(_sinc_prime_series(inner, prec))
    g = prec + 8
    for seg in _outer_segments(x):
        num = cos_pi(seg, g) - sinc_enclosure(seg, g)
        pieces.append(num.div(seg, prec))
    out = pieces[0]
    for p in pieces[1:]:
        out = out.hull(p)
    return out


def _outer_segments(x: Enclosure):
    neg_quarter = -_QUARTER
    if x.hi > _QUARTER:
        yield Enclosure(max(x.lo, _QUARTER), x.hi)
    if x.lo < neg_quarter:
        yield Enclosure(x.lo, min(x.hi, neg_quarter))


# ---------------------------------------------------------------------------
# digamma and harmonic-type sums
# ---------------------------------------------------------------------------

# B_2 .. B_32
BERNOULLI = (
    Fraction(1, 6),
    Fraction(-1, 30),
    Fraction(1, 42),
    Fraction(-1, 30),
    Fraction(5, 66),
    Fraction(-691, 2730),
    Fraction(7, 6),
    Fraction(-3617, 510),
    Fraction(43867, 798),
    Fraction(-174611, 330),
    Fraction(854513, 138),
    Fraction(-236364091, 2730),
    Fraction(8553103, 6),
    Fraction(-23749461029, 870),
    Fraction(8615841276005, 14322),
    Fraction(-7709321041217, 510),
)

_DIGAMMA_TERMS = 12  # Bernoulli terms used; B_26 bounds the remainder


def _digamma_threshold(prec: int) -> int:
    """Smallest integer Y with remainder bound <= 2**-(prec+4) at y >= Y."""
    j1 = _DIGAMMA_TERMS + 1
    b = abs(BERNOULLI[_DIGAMMA_TERMS])  # B_(2J+2)
    # need b/(2 j1 y^(2 j1)) <= 2^-(prec+4)
    target = b * (1 << (prec + 4)) / (2 * j1)
    # integer 2j1-th root, rounded up
    n = target.numerator // target.denominator + 1
    y = 1
    while y ** (2 * j1) < n:
        y *= 2
    lo, hi = y // 2, y
    while lo < hi:
        mid = (lo + hi) // 2
        if mid ** (2 * j1) < n:
            lo = mid + 1
        else:
            hi = mid
    return max(lo, 2)


def digamma(x: Fraction, prec: int) -> Enclosure:
    """Certified digamma of an exact rational x > 0.

    Uses the asymptotic series at a shifted argument; the truncation
    error of the series is bounded by the first omitted term.
    """
    if x <= 0:
        raise ValueError("digamma requires a positive argument")
    g = prec + 12
    y0 = _digamma_threshold(prec)
    shift = 0
    if x < y0:
        shift = int(y0 - x) + 1
    y = x + shift
    acc = ln_enclosure(y, g)
    y_enc = Enclosure.from_fraction(y, g)
    acc = acc - Enclosure.ONE.div(y_enc.shifted(1), g)
    ysq = Enclosure.from_fraction(y * y, g)
    ypow = Enclosure.ONE
    for j in range(1, _DIGAMMA_TERMS + 1):
        ypow = ypow.mul(ysq, g)
        b = BERNOULLI[j - 1]
        term = Enclosure.from_fraction(Fraction(b, 2 * j), g).div(ypow, g)
        acc = acc - term
    j1 = _DIGAMMA_TERMS + 1
    rem = abs(BERNOULLI[_DIGAMMA_TERMS]) / (2 * j1 * y ** (2 * j1))
    acc = acc.widen(Dyadic.from_fraction_ceil(rem, g))
    if shift:
        acc = acc - _sum_inv_shift(x, shift, g)
    return acc.round(prec)


def _sum_inv_shift(x: Fraction, count: int, prec: int) -> Enclosure:
    """sum_{j=0}^{count-1} 1/(x+j) by directed scaled-integer summation."""
    w = prec + count.bit_length() + 4
    lo = hi = 0
    num, den = x.numerator, x.denominator
    for j in range(count):
        p = num + j * den  # x + j = p/den
        lo += (den << w) // p
        hi += -((-(den << w)) // p)
    return Enclosure(Dyadic(lo, -w), Dyadic(hi + count, -w))


def trigamma(x: Fraction, prec: int) -> Enclosure:
    """Certified psi'(x) = sum_{i>=0} 1/(x+i)^2 for exact rational x > 0.

    Asymptotic series 1/x + 1/(2x^2) + sum_j B_2j / x^(2j+1); the
    truncation error is bounded by the first omitted term.
    """
    if x <= 0:
        raise ValueError("trigamma requires a positive argument")
    g = prec + 12
    y0 = _digamma_threshold(prec)
    shift = int(y0 - x) + 1 if x < y0 else 0
    y = x + shift
    y_enc = Enclosure.from_fraction(y, g)
    ysq = Enclosure.from_fraction(y * y, g)
    acc = y_enc.recip(g) + Enclosure.from_fraction(y * y * 2, g).recip(g)
    ypow = y_enc
    for j in range(1, _DIGAMMA_TERMS + 1):
        ypow = ypow.mul(ysq, g)  # y^(2j+1)
        acc = acc + Enclosure.from_fraction(BERNOULLI[j - 1], g).div(ypow, g)
    j1 = _DIGAMMA_TERMS + 1
    rem = abs(BERNOULLI[_DIGAMMA_TERMS]) / y ** (2 * j1 + 1)
    acc = acc.widen(Dyadic.from_fraction_ceil(rem, g))
    if shift:
        # psi'(x) = psi'(x+K) + sum_{j<K} 1/(x+j)^2
        acc = acc + _sum_inv_pow_shift(x, shift, 2, g)
    return acc.round(prec)


def tetragamma(x: Fraction, prec: int) -> Enclosure:
    """Certified psi''(x) = -2 sum_{i>=0} 1/(x+i)^3 for rational x > 0.

    Asymptotic series -1/x^2 - 1/x^3 - sum_j B_2j (2j+1)/x^(2j+2);
    truncation error bounded by the first omitted term.
    """
    if x <= 0:
        raise ValueError("tetragamma requires a positive argument")
    g = prec + 12
    y0 = _digamma_threshold(prec)
    shift = int(y0 - x) + 1 if x < y0 else 0
    y = x + shift
    ysq = Enclosure.from_fraction(y * y, g)
    acc = -(ysq.recip(g) + Enclosure.from_fraction(y**3, g).recip(g))
    ypow = ysq
    for j in range(1, _DIGAMMA_TERMS + 1):
        ypow = ypow.mul(ysq, g)  # y^(2j+2)
        term = Enclosure.from_fraction(BERNOULLI[j - 1] * (2 * j + 1), g).div(ypow, g)
        acc = acc - term
    j1 = _DIGAMMA_TERMS + 1
    rem = abs(BERNOULLI[_DIGAMMA_TERMS]) * (2 * j1 + 1) / y ** (2 * j1 + 2)
    acc = acc.widen(Dyadic.from_fraction_ceil(rem, g))
    if shift:
        # psi''(x) = psi''(x+K) - 2 sum_{j<K} 1/(x+j)^3
        acc = acc - _sum_inv_pow_shift(x, shift, 3, g).shifted(1)
    return acc.round(prec)


def _sum_inv_pow_shift(x: Fraction, count: int, power: int, prec: int) -> Enclosure:
    """sum_{j=0}^{count-1} 1/(x+j)^power by directed summation."""
    w = prec + count.bit_length() + 4
    lo = hi = 0
    num, den = x.numerator, x.denominator
    dp = den**power
    for j in range(count):
        p = (num + j * den) ** power
        lo += (dp << w) // p
        hi += -((-(dp << w)) // p)
    return Enclosure(Dyadic(lo, -w), Dyadic(hi + count, -w))


def harmonic_offset_direct(n: int, c: Fraction, prec: int) -> Enclosure:
    """sum_{k=1}^{n} 1/(k+c) by direct directed summation; exact route,
    cost O(n)."""
    if n == 0:
        return Enclosure.ZERO
    w = prec + n.bit_length() + 4
    lo = hi = 0
    num, den = c.numerator, c.denominator
    for k in range(1, n + 1):
        p = k * den + num  # k + c = p/den
        if p <= 0:
            raise ValueError("pole inside summation range")
        lo += (den << w) // p
        hi += -((-(den << w)) // p)
    return Enclosure(Dyadic(lo, -w), Dyadic(hi + n, -w)).round(prec)


_HARMONIC_DIRECT_LIMIT = 1 << 14


def harmonic_offset(n: int, c: Fraction, prec: int) -> Enclosure:
    """sum_{k=1}^{n} 1/(k+c) with 1+c > 0, via digamma for large n:
    the sum telescopes to digamma(n+1+c) - digamma(1+c)."""
    if n <= _HARMONIC_DIRECT_LIMIT:
        return harmonic_offset_direct(n, c, prec)
    g = prec + 6
    return (digamma(n + 1 + c, g) - digamma(1 + c, g)).round(prec)
