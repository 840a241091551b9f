from fractions import Fraction

import pytest

from bandlim import dsl
from bandlim.dsl import (
    INF,
    BinOp,
    Call,
    ContinuousDescription,
    Definition,
    Lit,
    Pi,
    Sum,
    Var,
    eval_exact,
    interval_eval,
    parse,
    parse_expr_text,
    serialize,
    serialize_expr,
)
from bandlim.errors import (
    DivisionByZero,
    DocumentSyntaxError,
    GeneratorFailure,
    ValidationError,
)

from conftest import assert_encloses

ZERO_DOC = """
space Bpi;
p inf;
kind continuous;
generator {
  L(n) = 0;
  c(n, k) = 0;
}
modulus {
  xi(M) = 0;
}
"""

FAMILY_DOC = """
space Bpi; p inf; kind continuous;
generator {
  N(n) = 2 ^ (8 * n);
  C(n) = -(1 / pi) * sum(j, 1, N(n), 1 / (j - 1/2));
  lo(n) = 1;
  hi(n) = N(n);
  c(n, k) = (-1) ^ k / C(n);
}
modulus {
  xi(M) = M;
}
"""


def test_parse_zero_doc():
    d = parse(ZERO_DOC)
    assert isinstance(d, ContinuousDescription)
    assert d.p == INF
    assert d.modulus_of(7) == 0
    sig = d.instantiate(0)
    assert sig.support() == (0, 0)


def test_parse_family_doc():
    d = parse(FAMILY_DOC)
    sig = d.instantiate(1)
    assert sig.support() == (1, 256)
    # coefficient is (-1)^k / C(256)
    c1 = dsl.interval_eval(sig.coeff(1), 30)
    c2 = dsl.interval_eval(sig.coeff(2), 30)
    assert (-c1).intersect(c2)  # opposite signs, same magnitude
    assert c2.strictly_negative()  # C(256) < 0, so 1/C < 0


def test_roundtrip_fixpoint_zero_doc():
    d = parse(ZERO_DOC)
    text = serialize(d)
    assert parse(text).structurally_equal(d)
    assert serialize(parse(text)) == text


def test_modulus_shift():
    doc = ZERO_DOC.replace("xi(M) = 0;", "xi(M) = M + 3;")
    d = parse(doc)
    assert d.modulus_of(5) == 8


def test_unbound_variable_rejected():
    doc = ZERO_DOC.replace("c(n, k) = 0;", "c(n, k) = j;")
    with pytest.raises(ValidationError):
        parse(doc)


def test_unbalanced_braces():
    with pytest.raises(DocumentSyntaxError) as ei:
        parse("space Bpi; p inf; kind continuous; generator { L(n) = 0;")
    assert ei.value.line is not None


def test_bad_space_kind_combo():
    doc = ZERO_DOC.replace("space Bpi;", "space ell;")
    with pytest.raises(ValidationError):
        parse(doc)


def test_call_before_definition_rejected():
    doc = """
space Bpi; p inf; kind continuous;
generator {
  L(n) = helper(n);
  helper(n) = 1;
  c(n, k) = 0;
}
modulus { xi(M) = 0; }
"""
    with pytest.raises(ValidationError):
        parse(doc)


def test_sum_shadowing_rejected():
    doc = ZERO_DOC.replace("c(n, k) = 0;", "c(n, k) = sum(k, 1, 3, k);")
    with pytest.raises(ValidationError):
        parse(doc)


def test_duplicate_header():
    with pytest.raises(DocumentSyntaxError):
        parse("space Bpi; space Bpi; p inf; kind continuous;"
              " generator { L(n)=0; c(n,k)=0; } modulus { xi(M)=0; }")


def test_expr_eval_exact():
    e = parse_expr_text("(1 + 2) * 4 - 5")
    assert eval_exact(e, {}) == 7
    e = parse_expr_text("2 ^ 10")
    assert eval_exact(e, {}) == 1024
    e = parse_expr_text("(-1) ^ 5")
    assert eval_exact(e, {}) == -1
    e = parse_expr_text("delta(3, 3) + delta(3, 4)")
    assert eval_exact(e, {}) == 1
    e = parse_expr_text("sum(j, 1, 10, j)")
    assert eval_exact(e, {}) == 55


def test_interval_eval_examples():
    import mpmath

    enc = interval_eval(parse_expr_text("1/2"), 20)
    assert enc.is_point() and enc.contains(Fraction(1, 2))

    enc = interval_eval(parse_expr_text("pi * (1/4)"), 20)
    assert_encloses(enc, mpmath.pi / 4, "pi/4")
    assert enc.width().as_fraction() <= Fraction(1, 1 << 20)

    with pytest.raises(DivisionByZero):
        interval_eval(parse_expr_text("1 / (1 - 1)"), 20)


def test_interval_eval_harmonic_fastpath_matches_direct():
    # same sum, below and above the direct-evaluation threshold
    e_small = parse_expr_text("sum(j, 1, 2000, 1 / (j - 1/2))")
    e_shift = parse_expr_text("sum(j, 1, 2000, 1 / (2 * j - 1))")
    a = interval_eval(e_small, 48)
    b = interval_eval(e_shift, 48)
    # sum 1/(j-1/2) = 2 * sum 1/(2j-1)
    two_b = b.shifted(1)
    assert a.intersect(two_b).width().as_fraction() >= 0


def test_serialize_expr_minimal_parens():
    cases = [
        "a + b + c",
        "a * (b + c)",
        "a - (b - c)",
        "(-1) ^ k",
        "-(a + b)",
        "a / b / c",
        "2 ^ n ^ m",
        "(2 ^ n) ^ m",
        "sum(j, 1, n, 1 / (j - 1/2))",
    ]
    for text in cases:
        e = parse_expr_text(text)
        printed = serialize_expr(e)
        assert parse_expr_text(printed) == e, text


def test_canonicalization_idempotent_random(rng):
    for _ in range(100):
        d = _random_description(rng)
        text = serialize(d)
        d2 = parse(text)
        assert d2.structurally_equal(d)
        assert serialize(d2) == text


def _random_expr(rng, binders, depth=0):
    choices = ["lit", "var", "binop", "neg"]
    if depth < 2:
        choices += ["sum", "delta", "pow"]
    kind = rng.choice(choices)
    if kind == "lit" or not binders:
        return Lit(Fraction(rng.randint(-9, 9)))
    if kind == "var":
        return Var(rng.choice(sorted(binders)))
    if kind == "neg":
        inner = _random_expr(rng, binders, depth + 1)
        # parser normal form folds unary minus into literals
        return Lit(-inner.value) if isinstance(inner, Lit) else dsl.Neg(inner)
    if kind == "binop":
        op = rng.choice("+-*")
        return BinOp(op, _random_expr(rng, binders, depth + 1),
                     _random_expr(rng, binders, depth + 1))
    if kind == "pow":
        return BinOp("^", _random_expr(rng, binders, depth + 1),
                     Lit(Fraction(rng.randint(0, 3))))
    if kind == "delta":
        return dsl.Delta(_random_expr(rng, binders, depth + 1),
                         _random_expr(rng, binders, depth + 1))
    var = f"j{depth}"
    return Sum(var, Lit(Fraction(rng.randint(-3, 0))),
               Lit(Fraction(rng.randint(1, 4))),
               _random_expr(rng, binders | {var}, depth + 1))


def _random_description(rng):
    gen = (
        Definition("L", ("n",), Lit(Fraction(rng.randint(0, 6)))),
        Definition("c", ("n", "k"), _random_expr(rng, {"n", "k"})),
    )
    mod = (
        Definition("xi", ("M",), BinOp("+", Var("M"), Lit(Fraction(rng.randint(0, 5))))),
    )
    p = rng.choice([INF, Fraction(1), Fraction(2), Fraction(3, 2)])
    cls = ContinuousDescription if rng.random() < 0.5 else dsl.DiscreteDescription
    return cls(p, gen, mod)


def test_parser_never_panics_on_noise(rng):
    import string

    alphabet = string.ascii_letters + string.digits + "+-*/^(){};=, \n"
    for _ in range(400):
        text = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 80)))
        try:
            parse(text)
        except (DocumentSyntaxError, ValidationError):
            pass  # rejection is the expected outcome


def test_parser_never_panics_on_mutations(rng):
    base = serialize(parse(FAMILY_DOC))
    for _ in range(300):
        chars = list(base)
        for _ in range(rng.randint(1, 4)):
            i = rng.randrange(len(chars))
            chars[i] = rng.choice("+-*/^(){};=, abcxyz019")
        try:
            parse("".join(chars))
        except (DocumentSyntaxError, ValidationError, GeneratorFailure):
            pass


def test_gated_table_lookup():
    doc = """
space Bpi; p inf; kind continuous;
table tm partial { 5, 5, 9 };
generator {
  L(n) = gated(tm, n);
  c(n, k) = 1;
}
modulus { xi(M) = M; }
"""
    d = parse(doc)
    assert d.window(2) == (-9, 9)
    with pytest.raises(GeneratorFailure):
        d.window(3)


def test_gated_unknown_table_rejected():
    doc = ZERO_DOC.replace("c(n, k) = 0;", "c(n, k) = gated(nope, n);")
    with pytest.raises(ValidationError):
        parse(doc)


def test_approx_builtin():
    e = parse_expr_text("approx(pi, 10)")
    v = eval_exact(e, {})
    import mpmath

    from conftest import mpf_fraction

    assert abs(v - mpf_fraction(mpmath.pi)) <= Fraction(1, 1 << 10)


def test_real_descriptions():
    from bandlim.exact import approximate

    x = dsl.real_pi()
    enc = approximate(x, 20)
    import mpmath

    assert_encloses(enc, mpmath.pi, "pi description")
    assert enc.width().as_fraction() <= Fraction(1, 1 << 18)

    y = dsl.real_from_fraction(Fraction(3, 7))
    assert approximate(y, 30).contains(Fraction(3, 7))


def test_instantiate_alternating_run_for_huge_window():
    from bandlim.config import Budget

    d = parse(FAMILY_DOC)
    tight = Budget(materialize_limit=64)
    sig = d.instantiate(1, tight)
    assert sig.support() == (1, 256)
    from bandlim.signal import AlternatingCoeffs

    assert isinstance(sig.store, AlternatingCoeffs)
    # spot-check a couple of coefficients against the materialized route
    full = parse(FAMILY_DOC).instantiate(1)
    for k in (1, 2, 77, 256):
        a = dsl.interval_eval(sig.coeff(k), 30)
        b = dsl.interval_eval(full.coeff(k), 30)
        assert a.intersect(b).width().as_fraction() >= 0
