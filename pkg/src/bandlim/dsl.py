"""The description language: serializable generator/modulus programs.

A description document is a flat header (space, p, kind), optional
gated lookup tables, and two named-definition blocks.  The generator
block maps an index n to an elementary object through a window program
and a coefficient program; the modulus block maps a precision M to an
index.  Expressions are total by construction: bounded sums only, no
recursion, definitions may reference earlier definitions in their block.

Grammar (canonical form is what :func:`serialize` emits)::

    document   = header+ table* block block
    header     = ("space" | "p" | "kind") value ";"
    table      = "table" NAME ["partial"] "{" INT ("," INT)* "}" ";"
    block      = ("generator" | "modulus") "{" definition+ "}"
    definition = NAME "(" NAME ("," NAME)* ")" "=" expr ";"
    expr       = add
    add        = mul (("+" | "-") mul)*
    mul        = unary (("*" | "/") unary)*
    unary      = "-" unary | pow
    pow        = atom ["^" unary]
    atom       = INT | "pi" | NAME | NAME "(" expr ("," expr)* ")"
               | "(" expr ")"
               | "sum" "(" NAME "," expr "," expr "," expr ")"
               | "delta" "(" expr "," expr ")"
               | "gated" "(" NAME "," expr ")"
               | "approx" "(" expr "," expr ")"

``sum(v, lo, hi, body)`` is the bounded sum over integer v from lo to
hi; ``delta(a, b)`` is the Kronecker indicator of exact equality;
``gated(t, k)`` looks index k up in table t; ``approx(e, n)`` is the
canonical dyadic rational within 2**-n of the closed expression e.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction

from .config import DEFAULT_BUDGET, Budget
from .dyadic import Dyadic
from .enclosure import Enclosure
from .errors import (
    DivisionByZero,
    DocumentSyntaxError,
    GeneratorFailure,
    ResourceLimit,
    ValidationError,
)
from .series import harmonic_offset, pi_enclosure

INF = math.inf

__all__ = [
    "Lit", "Pi", "Var", "Neg", "BinOp", "Sum", "Delta", "Call", "Gated",
    "Approx", "Definition", "GatedTable", "Description",
    "ContinuousDescription", "DiscreteDescription", "parse", "serialize",
    "serialize_expr", "parse_expr_text", "eval_exact", "eval_enclosure",
    "interval_eval", "fold", "ExprProgram", "real_pi",
    "real_from_fraction", "real_from_expr", "INF",
]


# ---------------------------------------------------------------------------
# AST
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Lit:
    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class Pi:
    pass


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    a: object


@dataclass(frozen=True)
class BinOp:
    op: str  # + - * / ^
    a: object
    b: object


@dataclass(frozen=True)
class Sum:
    var: str
    lo: object
    hi: object
    body: object


@dataclass(frozen=True)
class Delta:
    a: object
    b: object


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple


@dataclass(frozen=True)
class Gated:
    table: str
    arg: object


@dataclass(frozen=True)
class Approx:
    body: object
    prec: object


ZERO = Lit(Fraction(0))
ONE = Lit(Fraction(1))
MINUS_ONE = Lit(Fraction(-1))


def lit(v) -> Lit:
    return Lit(Fraction(v))


@dataclass(frozen=True)
class Definition:
    name: str
    params: tuple
    body: object


@dataclass(frozen=True)
class GatedTable:
    values: tuple
    partial: bool = False


# ---------------------------------------------------------------------------
# tokenizer
# ---------------------------------------------------------------------------

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r\n]+)|(?P<comment>#[^\n]*)|(?P<int>\d+)"
    r"|(?P<name>[A-Za-z_][A-Za-z_0-9]*)|(?P<sym>[+\-*/^(){},;=])"
)

_KEYWORDS = {
    "space", "p", "kind", "table", "partial", "generator", "modulus",
    "sum", "delta", "gated", "approx", "pi", "inf",
}


class _Tok:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col


def _tokenize(text: str):
    toks = []
    line, col = 1, 1
    pos = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise DocumentSyntaxError(
                f"unexpected character {text[pos]!r}", line, col
            )
        grp = m.lastgroup
        chunk = m.group()
        if grp not in ("ws", "comment"):
            kind = {"int": "int", "name": "name", "sym": chunk}[grp]
            toks.append(_Tok(kind, chunk, line, col))
        newlines = chunk.count("\n")
        if newlines:
            line += newlines
            col = len(chunk) - chunk.rfind("\n")
        else:
            col += len(chunk)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Parser:
    def __init__(self, toks):
        self.toks = toks
        self.i = 0

    def peek(self):
        return self.toks[self.i]

    def next(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def expect(self, kind, what=None):
        t = self.next()
        if t.kind != kind:
            raise DocumentSyntaxError(
                f"expected {what or kind!r}, found {t.text or 'end of input'!r}",
                t.line, t.col,
            )
        return t

    def error(self, msg):
        t = self.peek()
        raise DocumentSyntaxError(msg, t.line, t.col)

    # -- expressions ---------------------------------------------------

    def expr(self):
        return self.add()

    def add(self):
        e = self.mul()
        while self.peek().kind in ("+", "-"):
            op = self.next().kind
            e = BinOp(op, e, self.mul())
        return e

    def mul(self):
        e = self.unary()
        while self.peek().kind in ("*", "/"):
            op = self.next().kind
            e = BinOp(op, e, self.unary())
        return e

    def unary(self):
        if self.peek().kind == "-":
            self.next()
            inner = self.unary()
            if isinstance(inner, Lit):
                return Lit(-inner.value)
            return Neg(inner)
        return self.pow()

    def pow(self):
        e = self.atom()
        if self.peek().kind == "^":
            self.next()
            return BinOp("^", e, self.unary())
        return e

    def atom(self):
        t = self.next()
        if t.kind == "int":
            return Lit(Fraction(int(t.text)))
        if t.kind == "(":
            e = self.expr()
            self.expect(")", "')'")
            return e
        if t.kind == "name":
            name = t.text
            if name == "pi":
                return Pi()
            if name == "sum":
                self.expect("(", "'('")
                var = self.expect("name", "sum variable").text
                self.expect(",", "','")
                lo = self.expr()
                self.expect(",", "','")
                hi = self.expr()
                self.expect(",", "','")
                body = self.expr()
                self.expect(")", "')'")
                return Sum(var, lo, hi, body)
            if name == "delta":
                self.expect("(", "'('")
                a = self.expr()
                self.expect(",", "','")
                b = self.expr()
                self.expect(")", "')'")
                return Delta(a, b)
            if name == "gated":
                self.expect("(", "'('")
                table = self.expect("name", "table name").text
                self.expect(",", "','")
                arg = self.expr()
                self.expect(")", "')'")
                return Gated(table, arg)
            if name == "approx":
                self.expect("(", "'('")
                body = self.expr()
                self.expect(",", "','")
                prec = self.expr()
                self.expect(")", "')'")
                return Approx(body, prec)
            if self.peek().kind == "(":
                self.next()
                args = [self.expr()]
                while self.peek().kind == ",":
                    self.next()
                    args.append(self.expr())
                self.expect(")", "')'")
                return Call(name, tuple(args))
            return Var(name)
        raise DocumentSyntaxError(
            f"expected expression, found {t.text or 'end of input'!r}",
            t.line, t.col,
        )

    # -- document ------------------------------------------------------

    def definition(self):
        name = self.expect("name", "definition name").text
        self.expect("(", "'('")
        params = [self.expect("name", "parameter").text]
        while self.peek().kind == ",":
            self.next()
            params.append(self.expect("name", "parameter").text)
        self.expect(")", "')'")
        self.expect("=", "'='")
        body = self.expr()
        self.expect(";", "';'")
        return Definition(name, tuple(params), body)

    def block(self):
        kind_tok = self.expect("name", "block name")
        if kind_tok.text not in ("generator", "modulus"):
            raise DocumentSyntaxError(
                f"expected 'generator' or 'modulus', found {kind_tok.text!r}",
                kind_tok.line, kind_tok.col,
            )
        self.expect("{", "'{'")
        defs = [self.definition()]
        while self.peek().kind == "name":
            defs.append(self.definition())
        self.expect("}", "'}'")
        return kind_tok.text, tuple(defs)

    def document(self):
        headers = {}
        while self.peek().kind == "name" and self.peek().text in ("space", "p", "kind"):
            key = self.next().text
            if key in headers:
                self.error(f"duplicate header {key!r}")
            if key == "p":
                t = self.next()
                if t.kind == "name" and t.text == "inf":
                    headers["p"] = INF
                elif t.kind == "int":
                    num = int(t.text)
                    if self.peek().kind == "/":
                        self.next()
                        den = int(self.expect("int", "denominator").text)
                        headers["p"] = Fraction(num, den)
                    else:
                        headers["p"] = Fraction(num)
                else:
                    raise DocumentSyntaxError(
                        "expected exponent value", t.line, t.col
                    )
            else:
                headers[key] = self.expect("name", f"{key} value").text
            self.expect(";", "';'")
        tables = {}
        while self.peek().kind == "name" and self.peek().text == "table":
            self.next()
            name = self.expect("name", "table name").text
            partial = False
            if self.peek().kind == "name" and self.peek().text == "partial":
                self.next()
                partial = True
            self.expect("{", "'{'")
            values = []
            if self.peek().kind == "int":
                values.append(int(self.next().text))
                while self.peek().kind == ",":
                    self.next()
                    values.append(int(self.expect("int", "table entry").text))
            self.expect("}", "'}'")
            self.expect(";", "';'")
            if name in tables:
                self.error(f"duplicate table {name!r}")
            tables[name] = GatedTable(tuple(values), partial)
        blocks = {}
        while self.peek().kind == "name" and self.peek().text in ("generator", "modulus"):
            kind, defs = self.block()
            if kind in blocks:
                self.error(f"duplicate {kind} block")
            blocks[kind] = defs
        self.expect("eof", "end of document")
        return headers, tables, blocks


# ---------------------------------------------------------------------------
# validation
# ---------------------------------------------------------------------------

_ALLOWED_SPACES = {"Bpi": "continuous", "ell": "discrete"}


def _validate_expr(e, bound, defs, tables, where):
    if isinstance(e, (Lit, Pi)):
        return
    if isinstance(e, Var):
        if e.name not in bound:
            raise ValidationError(f"unbound variable {e.name!r} in {where}")
        return
    if isinstance(e, Neg):
        _validate_expr(e.a, bound, defs, tables, where)
        return
    if isinstance(e, BinOp):
        _validate_expr(e.a, bound, defs, tables, where)
        _validate_expr(e.b, bound, defs, tables, where)
        return
    if isinstance(e, Sum):
        if e.var in bound:
            raise ValidationError(
                f"sum variable {e.var!r} shadows an enclosing binder in {where}"
            )
        _validate_expr(e.lo, bound, defs, tables, where)
        _validate_expr(e.hi, bound, defs, tables, where)
        _validate_expr(e.body, bound | {e.var}, defs, tables, where)
        return
    if isinstance(e, Delta):
        _validate_expr(e.a, bound, defs, tables, where)
        _validate_expr(e.b, bound, defs, tables, where)
        return
    if isinstance(e, Call):
        target = defs.get(e.name)
        if target is None:
            raise ValidationError(
                f"call to undefined or later definition {e.name!r} in {where}"
            )
        if len(target.params) != len(e.args):
            raise ValidationError(
                f"call to {e.name!r} with {len(e.args)} arguments, "
                f"expected {len(target.params)}, in {where}"
            )
        for a in e.args:
            _validate_expr(a, bound, defs, tables, where)
        return
    if isinstance(e, Gated):
        if e.table not in tables:
            raise ValidationError(
                f"gated reference to unknown table {e.table!r} in {where}"
            )
        _validate_expr(e.arg, bound, defs, tables, where)
        return
    if isinstance(e, Approx):
        _validate_expr(e.body, bound, defs, tables, where)
        _validate_expr(e.prec, bound, defs, tables, where)
        return
    raise ValidationError(f"unknown expression node {type(e).__name__}")


def _validate_block(defs, tables, blockname):
    seen = {}
    for d in defs:
        if d.name in seen:
            raise ValidationError(
                f"duplicate definition {d.name!r} in {blockname} block"
            )
        if d.name in _KEYWORDS:
            raise ValidationError(
                f"definition name {d.name!r} is a reserved word"
            )
        if len(set(d.params)) != len(d.params):
            raise ValidationError(
                f"repeated parameter in definition {d.name!r}"
            )
        _validate_expr(
            d.body, set(d.params), seen, tables,
            f"{blockname} definition {d.name!r}",
        )
        seen[d.name] = d
    return seen


def _arity(defs, name):
    for d in defs:
        if d.name == name:
            return len(d.params)
    return None


# ---------------------------------------------------------------------------
# document objects
# ---------------------------------------------------------------------------

class Description:
    """Common behaviour of continuous- and discrete-time descriptions."""

    kind = None

    def __init__(self, p, generator, modulus, tables=None):
        self.p = p
        self.generator = tuple(generator)
        self.modulus = tuple(modulus)
        self.tables = dict(tables or {})
        self._inst_cache = {}
        self.validate()

    # -- structure ------------------------------------------------------

    def validate(self):
        if self.p != INF:
            if not isinstance(self.p, Fraction):
                raise ValidationError("exponent must be rational or inf")
            if self.p < 1:
                raise ValidationError("exponent must satisfy p >= 1")
        gen_defs = _validate_block(self.generator, self.tables, "generator")
        _validate_block(self.modulus, self.tables, "modulus")
        if "c" not in gen_defs or len(gen_defs["c"].params) != 2:
            raise ValidationError(
                "generator block must define c with two parameters"
            )
        has_l = "L" in gen_defs and len(gen_defs["L"].params) == 1
        has_range = (
            "lo" in gen_defs and len(gen_defs["lo"].params) == 1
            and "hi" in gen_defs and len(gen_defs["hi"].params) == 1
        )
        if not (has_l or has_range):
            raise ValidationError(
                "generator block must define L(n) or both lo(n) and hi(n)"
            )
        mod_defs = {d.name: d for d in self.modulus}
        if "xi" not in mod_defs or len(mod_defs["xi"].params) != 1:
            raise ValidationError(
                "modulus block must define xi with one parameter"
            )

    def structurally_equal(self, other) -> bool:
        return (
            type(self) is type(other)
            and self.p == other.p
            and self.tables == other.tables
            and self.generator == other.generator
            and self.modulus == other.modulus
        )

    def __eq__(self, other):
        return isinstance(other, Description) and self.structurally_equal(other)

    def __hash__(self):
        return hash((type(self).__name__, self.p, self.generator, self.modulus))

    # -- semantics --------------------------------------------------------

    def modulus_of(self, m_bits: int, budget: Budget = DEFAULT_BUDGET) -> int:
        ctx = _Ctx({d.name: d for d in self.modulus}, self.tables, budget)
        xi = ctx.defs["xi"]
        v = eval_exact(xi.body, {xi.params[0]: Fraction(m_bits)}, ctx)
        if v is None or v.denominator != 1 or v < 0:
            raise GeneratorFailure("modulus program must yield a natural number")
        return int(v)

    def window(self, n: int, budget: Budget = DEFAULT_BUDGET):
        """Support range (lo, hi) of the n-th element."""
        ctx = _Ctx({d.name: d for d in self.generator}, self.tables, budget)

        def eval_def(name):
            d = ctx.defs[name]
            v = eval_exact(d.body, {d.params[0]: Fraction(n)}, ctx)
            if v is None or v.denominator != 1:
                raise GeneratorFailure(f"window program {name} must yield an integer")
            return int(v)

        if "lo" in ctx.defs and "hi" in ctx.defs:
            lo, hi = eval_def("lo"), eval_def("hi")
            if lo > hi:
                raise GeneratorFailure("window program yields empty support")
        else:
            l_val = eval_def("L")
            if l_val < 0:
                raise GeneratorFailure("window half-width must be nonnegative")
            lo, hi = -l_val, l_val
        return lo, hi

    def instantiate(self, n: int, budget: Budget = DEFAULT_BUDGET):
        """The n-th elementary object. Deterministic; cached per index."""
        if n in self._inst_cache:
            return self._inst_cache[n]
        from . import signal as _signal

        lo, hi = self.window(n, budget)
        count = hi - lo + 1
        if count > budget.max_window:
            raise ResourceLimit(
                f"window of {count} slots exceeds budget {budget.max_window}"
            )
        ctx = _Ctx({d.name: d for d in self.generator}, self.tables, budget)
        cdef = ctx.defs["c"]
        nname, kname = cdef.params
        if count <= budget.materialize_limit:
            exprs = []
            for k in range(lo, hi + 1):
                env = {nname: Fraction(n), kname: Fraction(k)}
                exprs.append(fold(cdef.body, env, ctx))
            store = _signal.MaterializedCoeffs(lo, tuple(exprs))
        else:
            split = _split_alternating(cdef.body, kname)
            if split is None:
                raise ResourceLimit(
                    f"window of {count} slots exceeds materialization budget "
                    f"{budget.materialize_limit} and the coefficient program "
                    "has no run structure"
                )
            parity_flip, rest = split
            base = fold(rest, {nname: Fraction(n)}, ctx)
            store = _signal.AlternatingCoeffs(lo, hi, base, parity_flip)
        if self.kind == "continuous":
            obj = _signal.ElementarySignal(store)
        else:
            obj = _signal.ElementarySequence(store)
        self._inst_cache[n] = obj
        return obj

    def serialize(self) -> str:
        return serialize(self)


class ContinuousDescription(Description):
    kind = "continuous"
    space = "Bpi"


class DiscreteDescription(Description):
    kind = "discrete"
    space = "ell"


def parse(text: str) -> Description:
    """Parse and validate a description document."""
    headers, tables, blocks = _Parser(_tokenize(text)).document()
    for key in ("space", "p", "kind"):
        if key not in headers:
            raise ValidationError(f"missing header {key!r}")
    space, kind = headers["space"], headers["kind"]
    if space not in _ALLOWED_SPACES:
        raise ValidationError(f"unknown space {space!r}")
    if kind not in ("continuous", "discrete"):
        raise ValidationError(f"unknown kind {kind!r}")
    if _ALLOWED_SPACES[space] != kind:
        raise ValidationError(f"space {space!r} is inconsistent with kind {kind!r}")
    if "generator" not in blocks:
        raise ValidationError("missing generator block")
    if "modulus" not in blocks:
        raise ValidationError("missing modulus block")
    cls = ContinuousDescription if kind == "continuous" else DiscreteDescription
    return cls(headers["p"], blocks["generator"], blocks["modulus"], tables)


# ---------------------------------------------------------------------------
# serialization
# ---------------------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_UNARY, _PREC_POW, _PREC_ATOM = 1, 2, 3, 4, 5


def serialize_expr(e) -> str:
    return _print_expr(e, 0)


def _print_expr(e, parent) -> str:
    if isinstance(e, Lit):
        v = e.value
        if v.denominator == 1:
            s = str(v.numerator)
            mine = _PREC_UNARY if v < 0 else _PREC_ATOM
        else:
            s = f"{v.numerator} / {v.denominator}"
            mine = _PREC_MUL
        return f"({s})" if mine < parent else s
    if isinstance(e, Pi):
        return "pi"
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        s = "-" + _print_expr(e.a, _PREC_UNARY)
        return f"({s})" if _PREC_UNARY < parent else s
    if isinstance(e, BinOp):
        if e.op in ("+", "-"):
            mine = _PREC_ADD
            s = f"{_print_expr(e.a, mine)} {e.op} {_print_expr(e.b, mine + 1)}"
        elif e.op in ("*", "/"):
            mine = _PREC_MUL
            s = f"{_print_expr(e.a, mine)} {e.op} {_print_expr(e.b, mine + 1)}"
        else:  # ^ right-assoc
            mine = _PREC_POW
            s = f"{_print_expr(e.a, mine + 1)} ^ {_print_expr(e.b, mine)}"
        return f"({s})" if mine < parent else s
    if isinstance(e, Sum):
        inner = ", ".join(
            (e.var, _print_expr(e.lo, 0), _print_expr(e.hi, 0), _print_expr(e.body, 0))
        )
        return f"sum({inner})"
    if isinstance(e, Delta):
        return f"delta({_print_expr(e.a, 0)}, {_print_expr(e.b, 0)})"
    if isinstance(e, Call):
        args = ", ".join(_print_expr(a, 0) for a in e.args)
        return f"{e.name}({args})"
    if isinstance(e, Gated):
        return f"gated({e.table}, {_print_expr(e.arg, 0)})"
    if isinstance(e, Approx):
        return f"approx({_print_expr(e.body, 0)}, {_print_expr(e.prec, 0)})"
    raise ValueError(f"cannot serialize {type(e).__name__}")


def _print_p(p) -> str:
    if p == INF:
        return "inf"
    if p.denominator == 1:
        return str(p.numerator)
    return f"{p.numerator} / {p.denominator}"


def serialize(d: Description) -> str:
    """Canonical document text; parse(serialize(d)) equals d."""
    lines = [f"space {d.space};", f"p {_print_p(d.p)};", f"kind {d.kind};"]
    for name in sorted(d.tables):
        t = d.tables[name]
        flag = " partial" if t.partial else ""
        vals = ", ".join(str(v) for v in t.values)
        lines.append(f"table {name}{flag} {{ {vals} }};")
    for blockname, defs in (("generator", d.generator), ("modulus", d.modulus)):
        lines.append(blockname + " {")
        for dd in defs:
            params = ", ".join(dd.params)
            lines.append(f"  {dd.name}({params}) = {serialize_expr(dd.body)};")
        lines.append("}")
    return "\n".join(lines) + "\n"


def parse_expr_text(text: str):
    """Parse a bare expression (used by tests and witness builders)."""
    parser = _Parser(_tokenize(text))
    e = parser.expr()
    parser.expect("eof", "end of expression")
    return e


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

class _Ctx:
    __slots__ = ("defs", "tables", "budget", "call_memo")

    def __init__(self, defs, tables, budget):
        self.defs = defs
        self.tables = tables
        self.budget = budget
        self.call_memo = {}


_EMPTY_CTX = _Ctx({}, {}, DEFAULT_BUDGET)


def eval_exact(e, env, ctx=_EMPTY_CTX):
    """Exact rational value, or None when the value is irrational or too
    costly to hold exactly (pi, approx-free big sums are still exact)."""
    if isinstance(e, Lit):
        return e.value
    if isinstance(e, Pi):
        return None
    if isinstance(e, Var):
        try:
            return env[e.name]
        except KeyError:
            raise GeneratorFailure(f"unbound variable {e.name!r} at evaluation")
    if isinstance(e, Neg):
        v = eval_exact(e.a, env, ctx)
        return None if v is None else -v
    if isinstance(e, BinOp):
        a = eval_exact(e.a, env, ctx)
        if e.op == "^":
            b = eval_exact(e.b, env, ctx)
            if b is None or b.denominator != 1:
                raise GeneratorFailure("exponent must be an exact integer")
            k = int(b)
            if a is None:
                return None
            if a == 0 and k < 0:
                raise DivisionByZero("zero raised to a negative power")
            return a**k
        b = eval_exact(e.b, env, ctx)
        if a is None or b is None:
            # 0 * x and x * 0 stay exact regardless of the other side
            if e.op == "*" and (a == 0 or b == 0):
                return Fraction(0)
            return None
        if e.op == "+":
            return a + b
        if e.op == "-":
            return a - b
        if e.op == "*":
            return a * b
        if b == 0:
            raise DivisionByZero("division by zero in expression")
        return a / b
    if isinstance(e, Sum):
        lo, hi = _sum_bounds(e, env, ctx)
        count = hi - lo + 1
        if count <= 0:
            return Fraction(0)
        if count > ctx.budget.exact_sum_limit:
            return None
        total = Fraction(0)
        env2 = dict(env)
        for j in range(lo, hi + 1):
            env2[e.var] = Fraction(j)
            v = eval_exact(e.body, env2, ctx)
            if v is None:
                return None
            total += v
        return total
    if isinstance(e, Delta):
        a = eval_exact(e.a, env, ctx)
        b = eval_exact(e.b, env, ctx)
        if a is None or b is None:
            raise GeneratorFailure("delta arguments must be exact")
        return Fraction(1 if a == b else 0)
    if isinstance(e, Call):
        d = ctx.defs.get(e.name)
        if d is None:
            raise GeneratorFailure(f"call to unknown definition {e.name!r}")
        args = tuple(eval_exact(a, env, ctx) for a in e.args)
        if any(a is None for a in args):
            raise GeneratorFailure(
                f"arguments of {e.name!r} must be exact rationals"
            )
        key = ("exact", e.name, args)
        if key in ctx.call_memo:
            return ctx.call_memo[key]
        v = eval_exact(d.body, dict(zip(d.params, args)), ctx)
        ctx.call_memo[key] = v
        return v
    if isinstance(e, Gated):
        return Fraction(_gated_lookup(e, env, ctx))
    if isinstance(e, Approx):
        n = eval_exact(e.prec, env, ctx)
        if n is None or n.denominator != 1 or n < 0:
            raise GeneratorFailure("approx precision must be a natural number")
        n = int(n)
        enc = eval_enclosure(e.body, env, n + 6, ctx)
        return enc.midpoint(n + 3).as_fraction()
    raise GeneratorFailure(f"cannot evaluate {type(e).__name__}")


def _sum_bounds(e: Sum, env, ctx):
    lo = eval_exact(e.lo, env, ctx)
    hi = eval_exact(e.hi, env, ctx)
    if lo is None or hi is None or lo.denominator != 1 or hi.denominator != 1:
        raise GeneratorFailure("sum bounds must be exact integers")
    return int(lo), int(hi)


def _gated_lookup(e: Gated, env, ctx) -> int:
    t = ctx.tables.get(e.table)
    if t is None:
        raise GeneratorFailure(f"unknown gated table {e.table!r}")
    idx = eval_exact(e.arg, env, ctx)
    if idx is None or idx.denominator != 1 or idx < 0:
        raise GeneratorFailure("gated index must be a natural number")
    idx = int(idx)
    if idx >= len(t.values):
        raise GeneratorFailure(
            f"gated index {idx} beyond emitted table "
            f"({'partial; ' if t.partial else ''}{len(t.values)} entries)"
        )
    return t.values[idx]


def _linear_in(e, var, env, ctx):
    """Syntactic affine decomposition e = alpha*var + beta with exact
    alpha, beta; returns None when not affine."""
    if isinstance(e, Var) and e.name == var:
        return Fraction(1), Fraction(0)
    if not _contains_var(e, var):
        v = eval_exact(e, env, ctx)
        if v is None:
            return None
        return Fraction(0), v
    if isinstance(e, Neg):
        r = _linear_in(e.a, var, env, ctx)
        return None if r is None else (-r[0], -r[1])
    if isinstance(e, BinOp):
        if e.op in ("+", "-"):
            ra = _linear_in(e.a, var, env, ctx)
            rb = _linear_in(e.b, var, env, ctx)
            if ra is None or rb is None:
                return None
            if e.op == "+":
                return ra[0] + rb[0], ra[1] + rb[1]
            return ra[0] - rb[0], ra[1] - rb[1]
        if e.op == "*":
            if not _contains_var(e.a, var):
                s = eval_exact(e.a, env, ctx)
                r = _linear_in(e.b, var, env, ctx)
            elif not _contains_var(e.b, var):
                s = eval_exact(e.b, env, ctx)
                r = _linear_in(e.a, var, env, ctx)
            else:
                return None
            if s is None or r is None:
                return None
            return r[0] * s, r[1] * s
        if e.op == "/" and not _contains_var(e.b, var):
            s = eval_exact(e.b, env, ctx)
            if s in (None, 0):
                return None
            r = _linear_in(e.a, var, env, ctx)
            return None if r is None else (r[0] / s, r[1] / s)
    return None


def _contains_var(e, var) -> bool:
    if isinstance(e, Var):
        return e.name == var
    if isinstance(e, (Lit, Pi)):
        return False
    if isinstance(e, Neg):
        return _contains_var(e.a, var)
    if isinstance(e, BinOp):
        return _contains_var(e.a, var) or _contains_var(e.b, var)
    if isinstance(e, Sum):
        if e.var == var:
            return _contains_var(e.lo, var) or _contains_var(e.hi, var)
        return any(
            _contains_var(x, var) for x in (e.lo, e.hi, e.body)
        )
    if isinstance(e, Delta):
        return _contains_var(e.a, var) or _contains_var(e.b, var)
    if isinstance(e, Call):
        return any(_contains_var(a, var) for a in e.args)
    if isinstance(e, Gated):
        return _contains_var(e.arg, var)
    if isinstance(e, Approx):
        return _contains_var(e.body, var) or _contains_var(e.prec, var)
    return False


def _sum_harmonic_fastpath(e: Sum, lo, hi, env, ctx, prec):
    """sum of c/(alpha*var+beta): telescopes to a digamma difference."""
    body = e.body
    if not isinstance(body, BinOp) or body.op != "/":
        return None
    if _contains_var(body.a, e.var):
        return None
    c = eval_exact(body.a, env, ctx)
    if c is None:
        return None
    linear = _linear_in(body.b, e.var, env, ctx)
    if linear is None:
        return None
    alpha, beta = linear
    if alpha == 0:
        return None
    if alpha < 0:
        alpha, beta, c = -alpha, -beta, -c
    count = hi - lo + 1
    # sum_{j=lo}^{hi} 1/(alpha j + beta) = (1/alpha) sum_{i=1}^{count} 1/(i + off)
    off = beta / alpha + lo - 1
    if 1 + off <= 0:
        return None  # pole at or before the first term
    g = prec + 8
    h = harmonic_offset(count, off, g)
    scale = c / alpha
    return h.mul(Enclosure.from_fraction(scale, g), prec)


def eval_enclosure(e, env, prec, ctx=_EMPTY_CTX) -> Enclosure:
    """Interval evaluation of an expression at working precision."""
    if isinstance(e, Lit):
        return Enclosure.from_fraction(e.value, prec)
    if isinstance(e, Pi):
        return pi_enclosure(prec)
    if isinstance(e, Var):
        try:
            return Enclosure.from_fraction(env[e.name], prec)
        except KeyError:
            raise GeneratorFailure(f"unbound variable {e.name!r} at evaluation")
    if isinstance(e, Neg):
        return -eval_enclosure(e.a, env, prec, ctx)
    if isinstance(e, BinOp):
        g = prec + 4
        if e.op == "^":
            b = eval_exact(e.b, env, ctx)
            if b is None or b.denominator != 1:
                raise GeneratorFailure("exponent must be an exact integer")
            return eval_enclosure(e.a, env, g, ctx).pow_int(int(b), prec)
        a = eval_enclosure(e.a, env, g, ctx)
        b = eval_enclosure(e.b, env, g, ctx)
        if e.op == "+":
            return (a + b).round(prec)
        if e.op == "-":
            return (a - b).round(prec)
        if e.op == "*":
            return a.mul(b, prec)
        return a.div(b, prec)
    if isinstance(e, Sum):
        lo, hi = _sum_bounds(e, env, ctx)
        count = hi - lo + 1
        if count <= 0:
            return Enclosure.ZERO
        fast = _sum_harmonic_fastpath(e, lo, hi, env, ctx, prec)
        if fast is not None:
            return fast
        if count > ctx.budget.max_sum_terms:
            raise ResourceLimit(
                f"sum over {count} terms exceeds budget "
                f"{ctx.budget.max_sum_terms}"
            )
        w = prec + count.bit_length() + 4
        acc_lo = 0  # scaled integers at 2**-w
        acc_hi = 0
        env2 = dict(env)
        for j in range(lo, hi + 1):
            env2[e.var] = Fraction(j)
            v = eval_exact(e.body, env2, ctx)
            if v is not None:
                num, den = v.numerator, v.denominator
                acc_lo += (num << w) // den
                acc_hi += -((-(num << w)) // den)
            else:
                enc = eval_enclosure(e.body, env2, w, ctx)
                flo, fhi = enc.lo.as_fraction(), enc.hi.as_fraction()
                acc_lo += (flo.numerator << w) // flo.denominator
                acc_hi += -((-(fhi.numerator << w)) // fhi.denominator)
        return Enclosure(Dyadic(acc_lo, -w), Dyadic(acc_hi + count, -w)).round(prec)
    if isinstance(e, (Delta, Gated)):
        v = eval_exact(e, env, ctx)
        return Enclosure.from_fraction(v, prec)
    if isinstance(e, Call):
        d = ctx.defs.get(e.name)
        if d is None:
            raise GeneratorFailure(f"call to unknown definition {e.name!r}")
        args = tuple(eval_exact(a, env, ctx) for a in e.args)
        if any(a is None for a in args):
            raise GeneratorFailure(
                f"arguments of {e.name!r} must be exact rationals"
            )
        key = ("enc", e.name, args, prec)
        if key in ctx.call_memo:
            return ctx.call_memo[key]
        v = eval_enclosure(d.body, dict(zip(d.params, args)), prec, ctx)
        ctx.call_memo[key] = v
        return v
    if isinstance(e, Approx):
        v = eval_exact(e, env, ctx)
        return Enclosure.from_fraction(v, prec)
    raise GeneratorFailure(f"cannot evaluate {type(e).__name__}")


def interval_eval(e, m_bits: int, env=None, ctx=None,
                  budget: Budget = DEFAULT_BUDGET) -> Enclosure:
    """Enclosure of a closed coefficient expression, width <= 2**-m_bits
    (adaptive retries raise the working precision)."""
    env = env or {}
    ctx = ctx or _Ctx({}, {}, budget)
    target = Fraction(1, 1 << m_bits)
    prec = m_bits + 8
    for _ in range(4):
        enc = eval_enclosure(e, env, prec, ctx)
        if enc.width().as_fraction() <= target:
            return enc
        prec += max(16, prec // 2)
    return eval_enclosure(e, env, prec, ctx)


# ---------------------------------------------------------------------------
# folding (partial evaluation to closed coefficient expressions)
# ---------------------------------------------------------------------------

def fold(e, env, ctx=_EMPTY_CTX):
    """Substitute bound variables and collapse exact subtrees; the
    result is closed (no free variables, no definition references)."""
    v = _try_exact_for_fold(e, env, ctx)
    if v is not None:
        return Lit(v)
    if isinstance(e, Pi):
        return e
    if isinstance(e, Var):
        val = env.get(e.name)
        if val is None:
            raise GeneratorFailure(f"unbound variable {e.name!r} in fold")
        return Lit(val)
    if isinstance(e, Neg):
        a = fold(e.a, env, ctx)
        return Lit(-a.value) if isinstance(a, Lit) else Neg(a)
    if isinstance(e, BinOp):
        a = fold(e.a, env, ctx)
        if e.op == "*" and isinstance(a, Lit) and a.value == 0:
            return ZERO
        b = fold(e.b, env, ctx)
        return _simplify_binop(e.op, a, b)
    if isinstance(e, Sum):
        lo, hi = _sum_bounds(e, env, ctx)
        # keep large or inexact sums symbolic but with closed bounds/body;
        # the body still references the sum variable, which stays bound
        body_env = {k: v2 for k, v2 in env.items()}
        folded_body = _fold_under_binder(e.body, body_env, {e.var}, ctx)
        return Sum(e.var, lit(lo), lit(hi), folded_body)
    if isinstance(e, Delta):
        v = eval_exact(e, env, ctx)
        return Lit(v)
    if isinstance(e, Call):
        args = tuple(eval_exact(a, env, ctx) for a in e.args)
        if any(a is None for a in args):
            raise GeneratorFailure(
                f"arguments of {e.name!r} must be exact rationals"
            )
        key = ("fold", e.name, args)
        if key in ctx.call_memo:
            return ctx.call_memo[key]
        d = ctx.defs.get(e.name)
        if d is None:
            raise GeneratorFailure(f"call to unknown definition {e.name!r}")
        out = fold(d.body, dict(zip(d.params, args)), ctx)
        ctx.call_memo[key] = out
        return out
    if isinstance(e, Gated):
        return Lit(Fraction(_gated_lookup(e, env, ctx)))
    if isinstance(e, Approx):
        v = eval_exact(e, env, ctx)
        return Lit(v)
    raise GeneratorFailure(f"cannot fold {type(e).__name__}")


def _try_exact_for_fold(e, env, ctx):
    if isinstance(e, (Pi, Sum)):
        return None
    return eval_exact(e, env, ctx)


def _fold_under_binder(e, env, binders, ctx):
    """Fold with some variables left symbolic (sum bodies)."""
    if isinstance(e, Var) and e.name in binders:
        return e
    if isinstance(e, (Lit, Pi)):
        return e
    if isinstance(e, Var):
        val = env.get(e.name)
        if val is None:
            raise GeneratorFailure(f"unbound variable {e.name!r} in fold")
        return Lit(val)
    if isinstance(e, Neg):
        return Neg(_fold_under_binder(e.a, env, binders, ctx))
    if isinstance(e, BinOp):
        return BinOp(
            e.op,
            _fold_under_binder(e.a, env, binders, ctx),
            _fold_under_binder(e.b, env, binders, ctx),
        )
    if isinstance(e, Sum):
        return Sum(
            e.var,
            _fold_under_binder(e.lo, env, binders, ctx),
            _fold_under_binder(e.hi, env, binders, ctx),
            _fold_under_binder(e.body, env, binders | {e.var}, ctx),
        )
    if isinstance(e, Delta):
        return Delta(
            _fold_under_binder(e.a, env, binders, ctx),
            _fold_under_binder(e.b, env, binders, ctx),
        )
    if isinstance(e, Call):
        # inline with argument expressions substituted
        d = ctx.defs.get(e.name)
        if d is None:
            raise GeneratorFailure(f"call to unknown definition {e.name!r}")
        folded_args = [
            _fold_under_binder(a, env, binders, ctx) for a in e.args
        ]
        if all(isinstance(a, Lit) for a in folded_args):
            return fold(
                d.body, dict(zip(d.params, (a.value for a in folded_args))), ctx
            )
        subst = dict(zip(d.params, folded_args))
        return _substitute(d.body, subst, ctx)
    if isinstance(e, Gated):
        return Gated(e.table, _fold_under_binder(e.arg, env, binders, ctx))
    if isinstance(e, Approx):
        return Approx(
            _fold_under_binder(e.body, env, binders, ctx),
            _fold_under_binder(e.prec, env, binders, ctx),
        )
    raise GeneratorFailure(f"cannot fold {type(e).__name__}")


def _substitute(e, subst, ctx):
    if isinstance(e, Var):
        return subst.get(e.name, e)
    if isinstance(e, (Lit, Pi)):
        return e
    if isinstance(e, Neg):
        return Neg(_substitute(e.a, subst, ctx))
    if isinstance(e, BinOp):
        return BinOp(e.op, _substitute(e.a, subst, ctx), _substitute(e.b, subst, ctx))
    if isinstance(e, Sum):
        inner = {k: v for k, v in subst.items() if k != e.var}
        return Sum(
            e.var,
            _substitute(e.lo, subst, ctx),
            _substitute(e.hi, subst, ctx),
            _substitute(e.body, inner, ctx),
        )
    if isinstance(e, Delta):
        return Delta(_substitute(e.a, subst, ctx), _substitute(e.b, subst, ctx))
    if isinstance(e, Call):
        # inline so the result stays closed once its context is gone
        d = ctx.defs.get(e.name)
        new_args = tuple(_substitute(a, subst, ctx) for a in e.args)
        if d is None:
            raise GeneratorFailure(f"call to unknown definition {e.name!r}")
        return _substitute(d.body, dict(zip(d.params, new_args)), ctx)
    if isinstance(e, Gated):
        return Gated(e.table, _substitute(e.arg, subst, ctx))
    if isinstance(e, Approx):
        return Approx(_substitute(e.body, subst, ctx), _substitute(e.prec, subst, ctx))
    raise GeneratorFailure(f"cannot substitute into {type(e).__name__}")


def _simplify_binop(op, a, b):
    a_lit = a.value if isinstance(a, Lit) else None
    b_lit = b.value if isinstance(b, Lit) else None
    if a_lit is not None and b_lit is not None:
        if op == "+":
            return Lit(a_lit + b_lit)
        if op == "-":
            return Lit(a_lit - b_lit)
        if op == "*":
            return Lit(a_lit * b_lit)
        if op == "/":
            if b_lit == 0:
                raise DivisionByZero("division by zero in expression")
            return Lit(a_lit / b_lit)
        if op == "^":
            if b_lit.denominator != 1:
                raise GeneratorFailure("exponent must be an exact integer")
            return Lit(a_lit ** int(b_lit))
    if op == "*":
        if a_lit == 0 or b_lit == 0:
            return ZERO
        if a_lit == 1:
            return b
        if b_lit == 1:
            return a
    if op == "+":
        if a_lit == 0:
            return b
        if b_lit == 0:
            return a
    if op == "-" and b_lit == 0:
        return a
    if op == "/" and a_lit == 0:
        return ZERO if isinstance(b, Pi) else BinOp(op, a, b)
    if op == "/" and b_lit == 1:
        return a
    if op == "^" and b_lit == 1:
        return a
    return BinOp(op, a, b)


def _split_alternating(body, kname):
    """Match body == (-1)^(k [+ c]) * rest with rest free of k.

    Returns (parity_flip, rest) where the coefficient at index k equals
    (-1)^(k + parity_flip) * rest; None when the pattern is absent.
    """

    def walk(w):
        # returns (alt: bool, flip: int, rest) or None
        if not _contains_var(w, kname):
            return False, 0, w
        if isinstance(w, BinOp) and w.op == "^":
            base = w.a
            is_minus_one = (
                (isinstance(base, Lit) and base.value == -1)
                or (isinstance(base, Neg) and isinstance(base.a, Lit)
                    and base.a.value == 1)
            )
            if is_minus_one:
                linear = _linear_in(w.b, kname, {}, _EMPTY_CTX)
                if linear is not None:
                    alpha, beta = linear
                    if alpha.denominator == 1 and beta.denominator == 1:
                        if int(alpha) % 2 == 1:
                            # odd multiple of k alternates like k itself
                            return True, int(beta) & 1, ONE
                        return False, 0, Lit(Fraction((-1) ** (int(beta) & 1)))
            return None
        if isinstance(w, Neg):
            r = walk(w.a)
            if r is None:
                return None
            return r[0], r[1], Neg(r[2])
        if isinstance(w, BinOp) and w.op in ("*", "/"):
            ra = walk(w.a)
            rb = walk(w.b)
            if ra is None or rb is None:
                return None
            alt = ra[0] != rb[0]
            flip = (ra[1] + rb[1]) & 1
            return alt, flip, _simplify_binop(w.op, ra[2], rb[2])
        return None

    r = walk(body)
    if r is None:
        return None
    alt, flip, rest = r
    if not alt:
        # constant in k: still a run, with no sign alternation
        return None if _contains_var(rest, kname) else ("const", rest)
    return (flip, rest)


# ---------------------------------------------------------------------------
# programs and built-in real descriptions
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ExprProgram:
    """A one-parameter program given by a DSL expression."""

    param: str
    body: object

    def eval_fraction(self, arg: int) -> Fraction:
        v = eval_exact(self.body, {self.param: Fraction(arg)}, _EMPTY_CTX)
        if v is None:
            raise GeneratorFailure("program value is not an exact rational")
        return v

    def eval_int(self, arg: int) -> int:
        v = self.eval_fraction(arg)
        if v.denominator != 1 or v < 0:
            raise GeneratorFailure("program must yield a natural number")
        return int(v)

    def text(self) -> str:
        return f"{self.param} -> {serialize_expr(self.body)}"


def real_pi():
    """Built-in description of pi: dyadic approximants with modulus M -> M."""
    from .exact import RealDescription

    return RealDescription(
        ExprProgram("n", Approx(Pi(), Var("n"))),
        ExprProgram("M", Var("M")),
    )


def real_from_fraction(fr: Fraction):
    from .exact import RealDescription

    return RealDescription(
        ExprProgram("n", Lit(Fraction(fr))),
        ExprProgram("M", ZERO),
    )


def real_from_expr(closed_expr):
    """Description of the value of a closed coefficient expression."""
    from .exact import RealDescription

    return RealDescription(
        ExprProgram("n", Approx(closed_expr, Var("n"))),
        ExprProgram("M", Var("M")),
    )
