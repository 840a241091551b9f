from fractions import Fraction

import mpmath
import pytest

from bandlim import dsl
from bandlim.dsl import parse, parse_expr_text
from bandlim.enclosure import Enclosure
from bandlim.signal import (
    AlternatingCoeffs,
    ElementarySignal,
    delta_sequence,
    derivative,
    discrete_convolution,
    eval_signal,
    interpolate,
    is_zero,
    linear_combine,
    sample,
    sequence_from_fractions,
    signal_from_fractions,
    sinc_signal,
    zero_signal,
)

from conftest import assert_encloses, assert_width_le, mpf_fraction

FAMILY_DOC = """
space Bpi; p inf; kind continuous;
generator {
  N(n) = 2 ^ (8 * n);
  C(n) = -(1 / pi) * sum(j, 1, N(n), 1 / (j - 1/2));
  lo(n) = 1;
  hi(n) = N(n);
  c(n, k) = (-1) ^ k / C(n);
}
modulus { xi(M) = M; }
"""


def oracle_eval(lo, coeffs, t):
    tf = mpmath.mpf(t.numerator) / t.denominator
    total = mpmath.mpf(0)
    for i, c in enumerate(coeffs):
        k = lo + i
        total += mpmath.mpf(c.numerator) / c.denominator * mpmath.sincpi(tf - k)
    return total


def test_eval_sinc_at_zero_and_integer():
    f = sinc_signal()
    re, im = eval_signal(f, 0, 30)
    assert re.contains(Fraction(1))
    assert_width_le(re, 30, "sinc(0)")
    assert im.contains(Fraction(0))

    re, _ = eval_signal(f, 5, 30)
    assert re.contains(Fraction(0))
    assert_width_le(re, 30, "sinc(5)")


def test_eval_matches_float_oracle(rng):
    # 1000 random rational-coefficient evaluations vs the mpmath oracle
    for _ in range(1000):
        L = rng.randint(0, 4)
        coeffs = [
            Fraction(rng.randint(-50, 50), rng.randint(1, 20))
            for _ in range(2 * L + 1)
        ]
        f = signal_from_fractions(-L, coeffs)
        t = Fraction(rng.randint(-400, 400), rng.randint(1, 16))
        re, im = eval_signal(f, t, 30)
        assert_encloses(re, oracle_eval(-L, coeffs, t), f"f({t})")
        assert im.contains(Fraction(0))


def test_eval_witness_at_half():
    d = parse(FAMILY_DOC)
    f1 = d.instantiate(1)
    re, im = eval_signal(f1, Fraction(1, 2), 24)
    assert re.contains(Fraction(1))
    assert_width_le(re, 24, "f1(1/2)")
    assert im.contains(Fraction(0))


def test_eval_fast_path_matches_generic():
    # run-structured store and materialized store agree
    d = parse(FAMILY_DOC)
    full = d.instantiate(1)
    from bandlim.config import Budget

    lazy = parse(FAMILY_DOC).instantiate(1, Budget(materialize_limit=64))
    assert isinstance(lazy.store, AlternatingCoeffs)
    for t in (Fraction(1, 2), Fraction(7, 3), Fraction(-11, 4), Fraction(300)):
        a, _ = eval_signal(full, t, 26)
        b, _ = eval_signal(lazy, t, 26)
        assert a.intersect(b).width().as_fraction() >= 0


def test_sample_interpolate_roundtrip(rng):
    for _ in range(40):
        L = rng.randint(0, 32)
        coeffs = [
            Fraction(rng.randint(-9, 9), rng.randint(1, 9))
            for _ in range(2 * L + 1)
        ]
        f = signal_from_fractions(-L, coeffs)
        x = sample(f)
        f2 = interpolate(x)
        assert f2.store is f.store  # exact coefficient copy
        x2 = sample(f2)
        for k in range(-L, L + 1):
            assert x2.coeff_fraction(k) == f.coeff_fraction(k)


def test_interpolate_examples():
    z = interpolate(sequence_from_fractions(0, [Fraction(0)]))
    assert is_zero(z)
    s = interpolate(delta_sequence())
    re, _ = eval_signal(s, 0, 20)
    assert re.contains(Fraction(1))


def test_interpolated_sequence_matches_samples(rng):
    for _ in range(20):
        L = rng.randint(0, 8)
        coeffs = [Fraction(rng.randint(-9, 9)) for _ in range(2 * L + 1)]
        x = sequence_from_fractions(-L, coeffs)
        f = interpolate(x)
        for k in range(-L, L + 1):
            re, im = eval_signal(f, k, 40)
            assert re.contains(coeffs[k + L])
            assert_width_le(re, 40, "sample")


def test_sampling_copies_witness_coefficients():
    d = parse(FAMILY_DOC)
    f1 = d.instantiate(1)
    x1 = sample(f1)
    c = dsl.interval_eval(x1.coeff(4), 30)
    c2 = dsl.interval_eval(f1.coeff(4), 30)
    assert c.intersect(c2).width().as_fraction() >= 0


def test_linear_combine_identity_and_cancellation():
    f = signal_from_fractions(-1, [Fraction(2), Fraction(0), Fraction(-2)])
    g = sinc_signal()
    idf = linear_combine(1, f, 0, g)
    for k in (-1, 0, 1):
        assert idf.coeff_fraction(k) == f.coeff_fraction(k)
    zero = linear_combine(1, f, -1, f)
    assert is_zero(zero)
    zero2 = linear_combine(1, g, -1, sinc_signal())
    assert is_zero(zero2)


def test_linear_combine_complex_scalars():
    f = sinc_signal()
    g = sinc_signal()
    a = dsl.real_from_fraction(Fraction(1, 2))
    from bandlim.exact import ComplexDescription

    ab = ComplexDescription(a, dsl.real_from_fraction(Fraction(1, 3)))
    h = linear_combine(ab, f, Fraction(0), g)
    re, im = h.coeff(0) if isinstance(h.coeff(0), tuple) else (h.coeff(0), dsl.ZERO)
    assert dsl.eval_exact(re, {}) == Fraction(1, 2)
    assert dsl.eval_exact(im, {}) == Fraction(1, 3)


def test_convolution_identity_and_hand_case():
    x = sequence_from_fractions(0, [Fraction(1), Fraction(-1)])
    d = delta_sequence()
    y = discrete_convolution(d, x)
    assert y.coeff_fraction(0) == 1 and y.coeff_fraction(1) == -1
    h = sequence_from_fractions(0, [Fraction(1), Fraction(1)])
    z = discrete_convolution(h, x)
    assert [z.coeff_fraction(k) for k in (0, 1, 2)] == [1, 0, -1]


def test_convolution_matches_bruteforce(rng):
    for _ in range(60):
        Lh, Lx = rng.randint(0, 3), rng.randint(0, 3)
        h = sequence_from_fractions(
            -Lh, [Fraction(rng.randint(-6, 6)) for _ in range(2 * Lh + 1)]
        )
        x = sequence_from_fractions(
            -Lx, [Fraction(rng.randint(-6, 6)) for _ in range(2 * Lx + 1)]
        )
        y = discrete_convolution(h, x)
        for m in range(-(Lh + Lx), Lh + Lx + 1):
            expected = sum(
                (h.coeff_fraction(m - l) or 0) * (x.coeff_fraction(l) or 0)
                for l in range(-Lx, Lx + 1)
            )
            assert y.coeff_fraction(m) == expected


def test_derivative_of_sinc():
    df = derivative(sinc_signal())
    re, _ = df.eval(0, 30)
    assert re.contains(Fraction(0))
    assert_width_le(re, 30, "sinc'(0)")
    re, _ = df.eval(Fraction(1, 2), 30)
    assert_encloses(re, -4 / mpmath.pi, "sinc'(1/2)")


def test_derivative_matches_finite_difference(rng):
    h = Fraction(1, 1 << 12)
    for _ in range(25):
        L = rng.randint(0, 3)
        coeffs = [Fraction(rng.randint(-8, 8), rng.randint(1, 4))
                  for _ in range(2 * L + 1)]
        f = signal_from_fractions(-L, coeffs)
        df = derivative(f)
        t = Fraction(rng.randint(-40, 40), rng.randint(1, 8))
        d_enc, _ = df.eval(t, 24)
        fp, _ = eval_signal(f, t + h, 40)
        fm, _ = eval_signal(f, t - h, 40)
        lo = (fp.lo - fm.hi).as_fraction() / (2 * h)
        hi = (fp.hi - fm.lo).as_fraction() / (2 * h)
        # |f'' | <= pi^2 sum|c| bounds the finite-difference bias
        bias = Fraction(10) * sum(abs(c) for c in coeffs) * h
        assert d_enc.hi.as_fraction() >= lo - bias
        assert d_enc.lo.as_fraction() <= hi + bias


def test_zero_samples_means_zero_signal():
    f = zero_signal(5)
    assert is_zero(f)
    g = signal_from_fractions(-1, [Fraction(0), Fraction(1), Fraction(0)])
    assert not is_zero(g)
