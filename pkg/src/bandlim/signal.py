"""Elementary signals and sequences: finite sinc series with exact
coefficient expressions.

Coefficient slots hold closed DSL expressions (or (re, im) pairs for
complex entries).  Small windows are materialized slot by slot; the
huge witness windows use a run structure that stores one shared base
expression, so window size never drives memory.  A signal may carry a
common scalar ``factor`` so that normalized constructions keep exact
rational bases.
"""

from __future__ import annotations

from fractions import Fraction

from . import dsl
from .config import DEFAULT_BUDGET, Budget
from .dyadic import Dyadic
from .enclosure import Enclosure
from .errors import GeneratorFailure, Inconclusive, ResourceLimit
from .exact import ComplexDescription, RealDescription
from .series import (
    digamma,
    pi_enclosure,
    sin_pi,
    cos_pi,
    sinc_enclosure,
    sinc_prime_enclosure,
)

__all__ = [
    "MaterializedCoeffs",
    "AlternatingCoeffs",
    "ElementarySignal",
    "ElementarySequence",
    "sinc_signal",
    "zero_signal",
    "delta_sequence",
    "signal_from_fractions",
    "sequence_from_fractions",
    "sample",
    "interpolate",
    "linear_combine",
    "discrete_convolution",
    "eval_signal",
    "derivative",
    "is_zero",
]

_ZERO = dsl.ZERO


def _entry_pair(entry):
    """(re_expr, im_expr) view of a coefficient slot."""
    if isinstance(entry, tuple):
        return entry
    return entry, _ZERO


def _neg_expr(e):
    if isinstance(e, dsl.Lit):
        return dsl.Lit(-e.value)
    if isinstance(e, dsl.Neg):
        return e.a
    return dsl.Neg(e)


# ---------------------------------------------------------------------------
# coefficient stores
# ---------------------------------------------------------------------------

class MaterializedCoeffs:
    """Slot-per-index storage for windows of moderate size."""

    __slots__ = ("lo", "entries")

    def __init__(self, lo: int, entries: tuple):
        self.lo = lo
        self.entries = entries

    @property
    def hi(self) -> int:
        return self.lo + len(self.entries) - 1

    def support(self):
        return self.lo, self.hi

    def count(self) -> int:
        return len(self.entries)

    def get(self, k: int):
        if self.lo <= k <= self.hi:
            return self.entries[k - self.lo]
        return _ZERO

    def items(self):
        for i, e in enumerate(self.entries):
            yield self.lo + i, e

    def distinct(self):
        groups = {}
        for e in self.entries:
            groups[e] = groups.get(e, 0) + 1
        return list(groups.items())


class AlternatingCoeffs:
    """Run storage: value at k is (-1)^(k+flip) * base on [lo, hi]
    (or just base when mode is "const"); zero outside."""

    __slots__ = ("lo", "hi", "base", "mode", "_neg")

    def __init__(self, lo: int, hi: int, base, mode):
        self.lo = lo
        self.hi = hi
        self.base = base
        self.mode = mode  # 0 | 1 | "const"
        self._neg = _neg_expr(base)

    def support(self):
        return self.lo, self.hi

    def count(self) -> int:
        return self.hi - self.lo + 1

    def get(self, k: int):
        if not (self.lo <= k <= self.hi):
            return _ZERO
        if self.mode == "const":
            return self.base
        return self.base if (k + self.mode) % 2 == 0 else self._neg

    def items(self):
        for k in range(self.lo, self.hi + 1):
            yield k, self.get(k)

    def distinct(self):
        n = self.count()
        if self.mode == "const":
            return [(self.base, n)]
        even_count = (n + (1 if (self.lo + self.mode) % 2 == 0 else 0)) // 2
        return [(self.base, even_count), (self._neg, n - even_count)]


# ---------------------------------------------------------------------------
# elementary objects
# ---------------------------------------------------------------------------

class _Elementary:
    __slots__ = ("store", "factor")

    def __init__(self, store, factor=None):
        self.store = store
        self.factor = factor  # optional common scalar expression

    @property
    def L(self) -> int:
        lo, hi = self.store.support()
        return max(abs(lo), abs(hi))

    def support(self):
        return self.store.support()

    def coeff(self, k: int):
        """Effective coefficient expression at index k (factor applied)."""
        e = self.store.get(k)
        if self.factor is None:
            return e
        re, im = _entry_pair(e)
        fre = dsl._simplify_binop("*", self.factor, re)
        if im is _ZERO:
            return fre
        return (fre, dsl._simplify_binop("*", self.factor, im))

    def coeff_fraction(self, k: int):
        """Exact rational value of a real coefficient; None if inexact."""
        e = self.coeff(k)
        if isinstance(e, tuple):
            re, im = e
            iv = dsl.eval_exact(im, {})
            if iv is None or iv != 0:
                return None
            e = re
        return dsl.eval_exact(e, {})

    def with_factor(self, factor_expr):
        merged = factor_expr if self.factor is None else dsl._simplify_binop(
            "*", factor_expr, self.factor
        )
        return type(self)(self.store, merged)


class ElementarySignal(_Elementary):
    """f(z) = sum_k c_k sinc(z - k)."""


class ElementarySequence(_Elementary):
    """x(k) = c_k inside the window, 0 outside."""


def sinc_signal() -> ElementarySignal:
    return ElementarySignal(MaterializedCoeffs(0, (dsl.ONE,)))


def zero_signal(L: int = 0) -> ElementarySignal:
    return ElementarySignal(
        MaterializedCoeffs(-L, tuple(_ZERO for _ in range(2 * L + 1)))
    )


def delta_sequence() -> ElementarySequence:
    return ElementarySequence(MaterializedCoeffs(0, (dsl.ONE,)))


def signal_from_fractions(lo: int, values) -> ElementarySignal:
    return ElementarySignal(
        MaterializedCoeffs(lo, tuple(dsl.lit(v) for v in values))
    )


def sequence_from_fractions(lo: int, values) -> ElementarySequence:
    return ElementarySequence(
        MaterializedCoeffs(lo, tuple(dsl.lit(v) for v in values))
    )


# ---------------------------------------------------------------------------
# sampling / interpolation (coefficient copies: sinc(m-k) is the
# Kronecker delta on integers)
# ---------------------------------------------------------------------------

def sample(f: ElementarySignal) -> ElementarySequence:
    return ElementarySequence(f.store, f.factor)


def interpolate(x: ElementarySequence) -> ElementarySignal:
    return ElementarySignal(x.store, x.factor)


# ---------------------------------------------------------------------------
# algebra
# ---------------------------------------------------------------------------

def _scalar_pair(scalar):
    """Normalize a scalar to an (re_expr, im_expr) pair."""
    if isinstance(scalar, ComplexDescription):
        return (_real_to_expr(scalar.re), _real_to_expr(scalar.im))
    if isinstance(scalar, RealDescription):
        return (_real_to_expr(scalar), _ZERO)
    if isinstance(scalar, (int, Fraction)):
        return (dsl.lit(scalar), _ZERO)
    if isinstance(scalar, tuple):
        return scalar
    return (scalar, _ZERO)  # a closed expression


def _real_to_expr(r: RealDescription):
    seq = r.sequence
    if isinstance(seq, dsl.ExprProgram):
        if isinstance(seq.body, dsl.Approx) and isinstance(seq.body.prec, dsl.Var):
            return seq.body.body
        if isinstance(seq.body, dsl.Lit):
            return seq.body
    raise GeneratorFailure(
        "scalar description is not expression-backed; build it with the "
        "dsl.real_* constructors"
    )


def _mul_pair(a_pair, c_pair):
    ar, ai = a_pair
    cr, ci = c_pair
    s = dsl._simplify_binop
    re = s("-", s("*", ar, cr), s("*", ai, ci))
    im = s("+", s("*", ar, ci), s("*", ai, cr))
    return re, im


def _add_pair(p, q):
    s = dsl._simplify_binop
    return s("+", p[0], q[0]), s("+", p[1], q[1])


def _pack(pair):
    return pair[0] if pair[1] == _ZERO else pair


def linear_combine(a, f: _Elementary, b, g: _Elementary,
                   budget: Budget = DEFAULT_BUDGET):
    """a*f + b*g with the union window; coefficients stay expressions."""
    if type(f) is not type(g):
        raise GeneratorFailure("cannot combine a signal with a sequence")
    flo, fhi = f.support()
    glo, ghi = g.support()
    lo, hi = min(flo, glo), max(fhi, ghi)
    if hi - lo + 1 > budget.materialize_limit:
        raise ResourceLimit("combined window exceeds materialization budget")
    ap, bp = _scalar_pair(a), _scalar_pair(b)
    entries = []
    for k in range(lo, hi + 1):
        fk = _entry_pair(f.coeff(k))
        gk = _entry_pair(g.coeff(k))
        entries.append(_pack(_add_pair(_mul_pair(ap, fk), _mul_pair(bp, gk))))
    return type(f)(MaterializedCoeffs(lo, tuple(entries)))


def discrete_convolution(h: ElementarySequence, x: ElementarySequence,
                         budget: Budget = DEFAULT_BUDGET) -> ElementarySequence:
    """(h * x)(m) = sum_l h(m-l) x(l) on the Minkowski-sum window."""
    hlo, hhi = h.support()
    xlo, xhi = x.support()
    if h.store.count() * x.store.count() > budget.materialize_limit * 64:
        raise ResourceLimit("convolution size exceeds budget")
    lo, hi = hlo + xlo, hhi + xhi
    entries = []
    for m in range(lo, hi + 1):
        acc = (_ZERO, _ZERO)
        for l in range(max(xlo, m - hhi), min(xhi, m - hlo) + 1):
            hk = _entry_pair(h.coeff(m - l))
            xk = _entry_pair(x.coeff(l))
            acc = _add_pair(acc, _mul_pair(hk, xk))
        entries.append(_pack(acc))
    return ElementarySequence(MaterializedCoeffs(lo, tuple(entries)))


def is_zero(obj: _Elementary):
    """True if the object is exactly zero, False if certainly not,
    raises Inconclusive when exactness is unavailable."""
    if obj.factor is not None:
        fv = dsl.eval_exact(obj.factor, {})
        if fv == 0:
            return True
    lo, hi = obj.support()
    if hi - lo + 1 > DEFAULT_BUDGET.materialize_limit:
        for e, _count in obj.store.distinct():
            if not _entry_is_zero(e, obj.factor):
                return False
        return True
    for _k, e in obj.store.items():
        if not _entry_is_zero(e, obj.factor):
            return False
    return True


def _entry_is_zero(entry, factor):
    for part in _entry_pair(entry):
        v = dsl.eval_exact(part, {})
        if v is None:
            enc = dsl.interval_eval(part, 40)
            if not enc.contains_zero():
                return False
            if not enc.is_point():
                raise Inconclusive(
                    "coefficient cannot be certified zero at working precision"
                )
        elif v != 0:
            return False
    return True


# ---------------------------------------------------------------------------
# certified evaluation
# ---------------------------------------------------------------------------

class _EntryCache:
    """Per-operation cache of coefficient enclosures keyed by the
    (interned or structurally equal) expression objects."""

    __slots__ = ("prec", "_d")

    def __init__(self, prec: int):
        self.prec = prec
        self._d = {}

    def pair(self, entry):
        out = self._d.get(entry)
        if out is None:
            re, im = _entry_pair(entry)
            out = (
                dsl.eval_enclosure(re, {}, self.prec),
                dsl.eval_enclosure(im, {}, self.prec) if im is not _ZERO
                else Enclosure.ZERO,
            )
            self._d[entry] = out
        return out


def _coerce_time(t, prec: int) -> Enclosure:
    if isinstance(t, Enclosure):
        return t
    if isinstance(t, RealDescription):
        return t.approximate(prec)
    if isinstance(t, Dyadic):
        return Enclosure.point(t)
    if isinstance(t, (int, Fraction)):
        return Enclosure.from_fraction(Fraction(t), prec)
    raise GeneratorFailure(f"unsupported time argument {type(t).__name__}")


_PSI_RANGE_THRESHOLD = 1 << 14


def _sum_inv_range(t: Fraction, a: int, b: int, prec: int) -> Enclosure:
    """Enclosure of sum_{k=a}^{b} 1/(t-k); t must avoid [a, b]."""
    count = b - a + 1
    if count <= 0:
        return Enclosure.ZERO
    if count > _PSI_RANGE_THRESHOLD:
        g = prec + 6
        if t > b:
            # sum 1/j for j = t-b .. t-a
            return (digamma(t - a + 1, g) - digamma(t - b, g)).round(prec)
        if t < a:
            return -(digamma(b + 1 - t, g) - digamma(a - t, g)).round(prec)
        raise GeneratorFailure("pole inside reciprocal range sum")
    w = prec + count.bit_length() + 4
    lo = hi = 0
    num = t.numerator
    den = t.denominator
    x = den << w
    for k in range(a, b + 1):
        p = num - k * den  # t - k = p/den
        if p == 0:
            raise GeneratorFailure("pole inside reciprocal range sum")
        if p > 0:
            lo += x // p
            hi += -((-x) // p)
        else:
            lo += (-x) // (-p)
            hi += -(x // (-p))
    return Enclosure(Dyadic(lo, -w), Dyadic(hi, -w)).round(prec)


def eval_signal(f: ElementarySignal, t, m_bits: int,
                budget: Budget = DEFAULT_BUDGET):
    """Certified point evaluation: enclosure pair (re, im) of f(t) with
    width <= 2**-m_bits."""
    lo, hi = f.support()
    count = hi - lo + 1
    if count > budget.max_window:
        raise ResourceLimit("window exceeds evaluation budget")
    target = Fraction(1, 1 << m_bits)
    prec = m_bits + max(count.bit_length(), 8) + 8
    for _ in range(4):
        re, im = _eval_signal_at(f, t, prec)
        if (re.width().as_fraction() <= target
                and im.width().as_fraction() <= target):
            return re.round(m_bits + 2), im.round(m_bits + 2)
        prec += max(24, prec // 2)
    return re, im


def _eval_signal_at(f: ElementarySignal, t, w: int):
    lo, hi = f.support()
    t_enc = _coerce_time(t, w)
    s = sin_pi(t_enc, w)
    cache = _EntryCache(w)

    # indices whose sinc argument may enter the series zone
    near_lo = int((t_enc.lo.as_fraction() - Fraction(1, 2)).__floor__())
    near_hi = int((t_enc.hi.as_fraction() + Fraction(1, 2)).__ceil__())

    acc_re = Enclosure.ZERO
    acc_im = Enclosure.ZERO
    store = f.store

    fast = (
        isinstance(store, AlternatingCoeffs)
        and store.mode != "const"
        and t_enc.is_point()
    )
    if fast:
        t_frac = t_enc.lo.as_fraction()
        sign = -1 if store.mode == 1 else 1
        base_re, base_im = cache.pair(store.base)
        pi_enc = pi_enclosure(w)
        # far zone: coeff * (-1)^k * sinc(t-k) telescopes to
        # (+-base) * (s/pi) * 1/(t-k)
        segs = []
        if near_lo - 1 >= lo:
            segs.append((lo, min(hi, near_lo - 1)))
        if near_hi + 1 <= hi:
            segs.append((max(lo, near_hi + 1), hi))
        inv_sum = Enclosure.ZERO
        for a, b in segs:
            if a <= b:
                inv_sum = inv_sum + _sum_inv_range(t_frac, a, b, w)
        common = s.div(pi_enc, w).mul(inv_sum, w).scale(Dyadic(sign))
        acc_re = acc_re + base_re.mul(common, w)
        if not (base_im.lo.is_zero() and base_im.hi.is_zero()):
            acc_im = acc_im + base_im.mul(common, w)
        near_items = (
            (k, store.get(k))
            for k in range(max(lo, near_lo), min(hi, near_hi) + 1)
        )
        items = near_items
    else:
        items = store.items()

    pi_enc = pi_enclosure(w)
    for k, entry in items:
        ce_re, ce_im = cache.pair(entry)
        d = t_enc - Enclosure.from_int(k)
        if near_lo <= k <= near_hi:
            sk = sinc_enclosure(d, w)
        else:
            # sinc(t-k) = (-1)^k sin(pi t) / (pi (t-k))
            sk = s.div(pi_enc.mul(d, w), w)
            if k & 1:
                sk = -sk
        acc_re = (acc_re + ce_re.mul(sk, w)).round(w)
        if not (ce_im.lo.is_zero() and ce_im.hi.is_zero()):
            acc_im = (acc_im + ce_im.mul(sk, w)).round(w)

    if f.factor is not None:
        fac = dsl.eval_enclosure(f.factor, {}, w)
        acc_re, acc_im = (
            acc_re.mul(fac, w),
            acc_im.mul(fac, w),
        )
    return acc_re, acc_im


class DerivativeSignal:
    """Evaluable derivative of an elementary signal:
    f'(t) = sum_k c_k sinc'(t - k)."""

    def __init__(self, f: ElementarySignal):
        self.f = f

    def eval(self, t, m_bits: int, budget: Budget = DEFAULT_BUDGET):
        f = self.f
        lo, hi = f.support()
        count = hi - lo + 1
        if count > budget.materialize_limit * 8:
            raise ResourceLimit("window exceeds derivative evaluation budget")
        target = Fraction(1, 1 << m_bits)
        prec = m_bits + max(count.bit_length(), 8) + 10
        for _ in range(4):
            re, im = self._eval_at(t, prec)
            if (re.width().as_fraction() <= target
                    and im.width().as_fraction() <= target):
                return re.round(m_bits + 2), im.round(m_bits + 2)
            prec += max(24, prec // 2)
        return re, im

    def _eval_at(self, t, w: int):
        f = self.f
        t_enc = _coerce_time(t, w)
        s = sin_pi(t_enc, w)
        c = cos_pi(t_enc, w)
        pi_enc = pi_enclosure(w)
        cache = _EntryCache(w)
        near_lo = int((t_enc.lo.as_fraction() - Fraction(1, 2)).__floor__())
        near_hi = int((t_enc.hi.as_fraction() + Fraction(1, 2)).__ceil__())
        acc_re = Enclosure.ZERO
        acc_im = Enclosure.ZERO
        for k, entry in f.store.items():
            ce_re, ce_im = cache.pair(entry)
            d = t_enc - Enclosure.from_int(k)
            if near_lo <= k <= near_hi:
                sk = sinc_prime_enclosure(d, w)
            else:
                # sinc'(t-k) = (-1)^k (cos(pi t) - sin(pi t)/(pi (t-k)))/(t-k)
                inner = c - s.div(pi_enc.mul(d, w), w)
                sk = inner.div(d, w)
                if k & 1:
                    sk = -sk
            acc_re = (acc_re + ce_re.mul(sk, w)).round(w)
            if not (ce_im.lo.is_zero() and ce_im.hi.is_zero()):
                acc_im = (acc_im + ce_im.mul(sk, w)).round(w)
        if f.factor is not None:
            fac = dsl.eval_enclosure(f.factor, {}, w)
            acc_re, acc_im = acc_re.mul(fac, w), acc_im.mul(fac, w)
        return acc_re, acc_im


def derivative(f: ElementarySignal) -> DerivativeSignal:
    return DerivativeSignal(f)
