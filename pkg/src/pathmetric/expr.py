"""Exact symbolic expression trees over rational numbers.

Everything downstream (coefficient maps, flatness invariants, the linear
metrisability system) is built from a handful of node kinds: rational
constants, named variables, n-ary sums and products, quotients, powers with
exact rational exponents, and exp/log for the few coordinate maps that need
them.

There is deliberately no general simplifier.  Constructors only flatten
nested sums/products and fold constants, so that derivatives do not
accumulate trivial 0- and 1-factors; beyond that, expressions are inert
trees.  Zero-testing and canonicalisation live in `poly` / `zerotest`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Mapping, Union

Rational = Fraction
RationalLike = Union[int, Fraction]


class ExprError(Exception):
    """Base class for expression-level failures."""


class ParseError(ExprError):
    def __init__(self, message: str, position: int):
        super().__init__(f"{message} (at position {position})")
        self.position = position


class EvalDomainError(ExprError):
    """Division by zero, negative base under a fractional power, log of a
    non-positive value: the binding is outside the expression's real domain."""


class ExactEvalError(ExprError):
    """The value exists but is not a rational number (e.g. 2^(1/2))."""


class Expr:
    __slots__ = ()

    # -- operator sugar ----------------------------------------------------

    def __add__(self, other):
        return add(self, as_expr(other))

    def __radd__(self, other):
        return add(as_expr(other), self)

    def __sub__(self, other):
        return add(self, neg(as_expr(other)))

    def __rsub__(self, other):
        return add(as_expr(other), neg(self))

    def __mul__(self, other):
        return mul(self, as_expr(other))

    def __rmul__(self, other):
        return mul(as_expr(other), self)

    def __truediv__(self, other):
        return div(self, as_expr(other))

    def __rtruediv__(self, other):
        return div(as_expr(other), self)

    def __pow__(self, exponent):
        return power(self, exponent)

    def __neg__(self):
        return neg(self)

    def __str__(self):
        return to_text(self)


@dataclass(frozen=True, slots=True)
class Const(Expr):
    value: Fraction


@dataclass(frozen=True, slots=True)
class Var(Expr):
    name: str


@dataclass(frozen=True, slots=True)
class Sum(Expr):
    terms: tuple


@dataclass(frozen=True, slots=True)
class Product(Expr):
    factors: tuple


@dataclass(frozen=True, slots=True)
class Quotient(Expr):
    num: Expr
    den: Expr


@dataclass(frozen=True, slots=True)
class Power(Expr):
    base: Expr
    exponent: Fraction


@dataclass(frozen=True, slots=True)
class Exp(Expr):
    arg: Expr


@dataclass(frozen=True, slots=True)
class Log(Expr):
    arg: Expr


ZERO = Const(Fraction(0))
ONE = Const(Fraction(1))


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, (int, Fraction)):
        return Const(Fraction(v))
    raise TypeError(f"cannot interpret {v!r} as an expression")


def const(v: RationalLike) -> Const:
    return Const(Fraction(v))


def var(name: str) -> Var:
    return Var(name)


# -- canonicalising constructors ------------------------------------------
#
# The folding here is the full extent of simplification: flatten, drop
# identities, merge constants.  It keeps parse trees stable under
# print-then-reparse, which the round-trip contract relies on.


def add(*terms) -> Expr:
    flat: list[Expr] = []
    for t in terms:
        t = as_expr(t)
        if isinstance(t, Sum):
            flat.extend(t.terms)
        else:
            flat.append(t)
    const_positions = [i for i, t in enumerate(flat) if isinstance(t, Const)]
    if len(const_positions) > 1:
        total = sum((flat[i].value for i in const_positions), Fraction(0))
        first = const_positions[0]
        flat = [t for i, t in enumerate(flat) if i == first or not isinstance(t, Const)]
        flat[first] = Const(total)
    flat = [t for t in flat if not (isinstance(t, Const) and t.value == 0)]
    if not flat:
        return ZERO
    if len(flat) == 1:
        return flat[0]
    return Sum(tuple(flat))


def mul(*factors) -> Expr:
    flat: list[Expr] = []
    coeff = Fraction(1)
    for f in factors:
        f = as_expr(f)
        if isinstance(f, Product):
            inner = f.factors
        else:
            inner = (f,)
        for g in inner:
            if isinstance(g, Const):
                coeff *= g.value
            else:
                flat.append(g)
    if coeff == 0:
        return ZERO
    if not flat:
        return Const(coeff)
    if coeff != 1:
        flat.insert(0, Const(coeff))
    if len(flat) == 1:
        return flat[0]
    return Product(tuple(flat))


def neg(e) -> Expr:
    e = as_expr(e)
    if isinstance(e, Quotient):
        # keep signs in numerators so printed "- a/b" terms reparse identically
        return div(neg(e.num), e.den)
    return mul(Const(Fraction(-1)), e)


def sub(a, b) -> Expr:
    return add(a, neg(b))


def div(num, den) -> Expr:
    num, den = as_expr(num), as_expr(den)
    if isinstance(den, Const):
        if den.value == 0:
            raise ZeroDivisionError("literal zero denominator")
        if isinstance(num, Const):
            return Const(num.value / den.value)
        if den.value == 1:
            return num
    if isinstance(num, Const) and num.value == 0:
        return ZERO
    return Quotient(num, den)


def power(base, exponent: RationalLike) -> Expr:
    base = as_expr(base)
    if isinstance(exponent, Expr):
        raise TypeError("exponents must be exact rationals, not expressions")
    exponent = Fraction(exponent)
    if exponent == 0:
        return ONE
    if exponent == 1:
        return base
    if exponent.denominator == 1:
        k = exponent.numerator
        if isinstance(base, Const):
            if base.value == 0 and k < 0:
                raise ZeroDivisionError("zero base with negative exponent")
            return Const(base.value ** k)
        if isinstance(base, Power):
            # (b^r)^k with integer k is b^(rk) on any branch
            return power(base.base, base.exponent * k)
    return Power(base, exponent)


def sqrt(e) -> Expr:
    return power(e, Fraction(1, 2))


def exp(e) -> Expr:
    e = as_expr(e)
    if isinstance(e, Const) and e.value == 0:
        return ONE
    return Exp(e)


def log(e) -> Expr:
    e = as_expr(e)
    if isinstance(e, Const) and e.value == 1:
        return ZERO
    return Log(e)


# -- structure queries ------------------------------------------------------


def free_symbols(e: Expr) -> frozenset:
    if isinstance(e, Const):
        return frozenset()
    if isinstance(e, Var):
        return frozenset((e.name,))
    if isinstance(e, Sum):
        out: frozenset = frozenset()
        for t in e.terms:
            out |= free_symbols(t)
        return out
    if isinstance(e, Product):
        out = frozenset()
        for f in e.factors:
            out |= free_symbols(f)
        return out
    if isinstance(e, Quotient):
        return free_symbols(e.num) | free_symbols(e.den)
    if isinstance(e, Power):
        return free_symbols(e.base)
    if isinstance(e, (Exp, Log)):
        return free_symbols(e.arg)
    raise TypeError(f"unknown node {e!r}")


def has_nonrational_ops(e: Expr) -> bool:
    """True if the tree contains exp/log or a fractional power."""
    if isinstance(e, (Const, Var)):
        return False
    if isinstance(e, (Exp, Log)):
        return True
    if isinstance(e, Power):
        return e.exponent.denominator != 1 or has_nonrational_ops(e.base)
    if isinstance(e, Sum):
        return any(has_nonrational_ops(t) for t in e.terms)
    if isinstance(e, Product):
        return any(has_nonrational_ops(f) for f in e.factors)
    if isinstance(e, Quotient):
        return has_nonrational_ops(e.num) or has_nonrational_ops(e.den)
    raise TypeError(f"unknown node {e!r}")


# -- calculus ---------------------------------------------------------------


def diff(e: Expr, name: str) -> Expr:
    """Exact partial derivative; every symbol other than `name` is constant."""
    if isinstance(e, Const):
        return ZERO
    if isinstance(e, Var):
        return ONE if e.name == name else ZERO
    if isinstance(e, Sum):
        return add(*(diff(t, name) for t in e.terms))
    if isinstance(e, Product):
        pieces = []
        for i in range(len(e.factors)):
            factors = list(e.factors)
            factors[i] = diff(factors[i], name)
            pieces.append(mul(*factors))
        return add(*pieces)
    if isinstance(e, Quotient):
        n, d = e.num, e.den
        return div(sub(mul(diff(n, name), d), mul(n, diff(d, name))), power(d, 2))
    if isinstance(e, Power):
        return mul(Const(e.exponent), power(e.base, e.exponent - 1), diff(e.base, name))
    if isinstance(e, Exp):
        return mul(e, diff(e.arg, name))
    if isinstance(e, Log):
        return div(diff(e.arg, name), e.arg)
    raise TypeError(f"unknown node {e!r}")


def subst(e: Expr, mapping: Mapping[str, Union[Expr, RationalLike]]) -> Expr:
    """Replace variables by expressions; rebuilds through the constructors."""
    repl = {k: as_expr(v) for k, v in mapping.items()}

    def walk(node: Expr) -> Expr:
        if isinstance(node, Const):
            return node
        if isinstance(node, Var):
            return repl.get(node.name, node)
        if isinstance(node, Sum):
            return add(*(walk(t) for t in node.terms))
        if isinstance(node, Product):
            return mul(*(walk(f) for f in node.factors))
        if isinstance(node, Quotient):
            return div(walk(node.num), walk(node.den))
        if isinstance(node, Power):
            return power(walk(node.base), node.exponent)
        if isinstance(node, Exp):
            return exp(walk(node.arg))
        if isinstance(node, Log):
            return log(walk(node.arg))
        raise TypeError(f"unknown node {node!r}")

    return walk(e)


# -- evaluation -------------------------------------------------------------


def _int_nth_root(n: int, k: int) -> int | None:
    """Exact k-th root of a non-negative integer, or None."""
    if n < 0:
        return None
    if n in (0, 1):
        return n
    r = round(n ** (1.0 / k))
    for cand in (r - 1, r, r + 1):
        if cand >= 0 and cand**k == n:
            return cand
    return None


def _exact_pow(b: Fraction, e: Fraction) -> Fraction:
    if e.denominator == 1:
        if b == 0 and e < 0:
            raise EvalDomainError("division by zero (0 to a negative power)")
        return b**e.numerator
    if b < 0:
        raise EvalDomainError("negative base under a fractional power")
    if b == 0:
        return Fraction(0)
    rn = _int_nth_root(b.numerator, e.denominator)
    rd = _int_nth_root(b.denominator, e.denominator)
    if rn is None or rd is None:
        raise ExactEvalError(f"{b}^{e} is irrational")
    root = Fraction(rn, rd)
    return _exact_pow(root, Fraction(e.numerator))


def eval_exact(e: Expr, bindings: Mapping[str, RationalLike]) -> Fraction:
    """Evaluate to an exact rational.  Raises ExactEvalError when the value
    is irrational and EvalDomainError outside the real domain."""
    if isinstance(e, Const):
        return e.value
    if isinstance(e, Var):
        if e.name not in bindings:
            raise ExprError(f"unbound symbol {e.name!r}")
        return Fraction(bindings[e.name])
    if isinstance(e, Sum):
        return sum((eval_exact(t, bindings) for t in e.terms), Fraction(0))
    if isinstance(e, Product):
        out = Fraction(1)
        for f in e.factors:
            out *= eval_exact(f, bindings)
        return out
    if isinstance(e, Quotient):
        d = eval_exact(e.den, bindings)
        if d == 0:
            raise EvalDomainError("division by zero")
        return eval_exact(e.num, bindings) / d
    if isinstance(e, Power):
        return _exact_pow(eval_exact(e.base, bindings), e.exponent)
    if isinstance(e, Exp):
        a = eval_exact(e.arg, bindings)
        if a == 0:
            return Fraction(1)
        raise ExactEvalError("exp of a nonzero value is irrational")
    if isinstance(e, Log):
        a = eval_exact(e.arg, bindings)
        if a == 1:
            return Fraction(0)
        if a <= 0:
            raise EvalDomainError("log of a non-positive value")
        raise ExactEvalError("log of a value other than 1 is irrational")
    raise TypeError(f"unknown node {e!r}")


def eval_float(e: Expr, bindings: Mapping[str, object], precision_bits: int = 53):
    """Evaluate to an mpmath float of the requested binary precision."""
    import mpmath

    with mpmath.workprec(precision_bits):

        def walk(node: Expr):
            if isinstance(node, Const):
                return mpmath.mpf(node.value.numerator) / node.value.denominator
            if isinstance(node, Var):
                if node.name not in bindings:
                    raise ExprError(f"unbound symbol {node.name!r}")
                v = bindings[node.name]
                if isinstance(v, Fraction):
                    return mpmath.mpf(v.numerator) / v.denominator
                return mpmath.mpf(v)
            if isinstance(node, Sum):
                return mpmath.fsum(walk(t) for t in node.terms)
            if isinstance(node, Product):
                out = mpmath.mpf(1)
                for f in node.factors:
                    out *= walk(f)
                return out
            if isinstance(node, Quotient):
                d = walk(node.den)
                if d == 0:
                    raise EvalDomainError("division by zero")
                return walk(node.num) / d
            if isinstance(node, Power):
                b = walk(node.base)
                if node.exponent.denominator == 1:
                    if b == 0 and node.exponent < 0:
                        raise EvalDomainError("division by zero")
                    return b ** int(node.exponent)
                if b < 0:
                    raise EvalDomainError("negative base under a fractional power")
                if b == 0:
                    return mpmath.mpf(0)
                ex = mpmath.mpf(node.exponent.numerator) / node.exponent.denominator
                return b**ex
            if isinstance(node, Exp):
                return mpmath.exp(walk(node.arg))
            if isinstance(node, Log):
                a = walk(node.arg)
                if a <= 0:
                    raise EvalDomainError("log of a non-positive value")
                return mpmath.log(a)
            raise TypeError(f"unknown node {node!r}")

        return walk(e)


def evaluate(e: Expr, bindings: Mapping[str, RationalLike], mode="exact", precision_bits: int = 53):
    """Spec-level eval: mode "exact" returns a Fraction, "float" an mpf."""
    if mode == "exact":
        return eval_exact(e, bindings)
    if mode == "float":
        return eval_float(e, bindings, precision_bits)
    raise ValueError(f"unknown mode {mode!r}")


def _fracpow(base: float, num: int, den: int) -> float:
    if base < 0:
        raise EvalDomainError("negative base under a fractional power")
    return base ** (num / den)


def compile_float(e: Expr, args: Iterable[str]) -> Callable:
    """Compile to a plain-float callable of the given positional arguments.

    Used on hot numeric paths (ODE right-hand sides, drift monitors) where
    mpmath evaluation is too slow."""
    args = tuple(args)
    missing = free_symbols(e) - set(args)
    if missing:
        raise ExprError(f"unbound symbols {sorted(missing)} in compiled expression")

    def src(node: Expr) -> str:
        if isinstance(node, Const):
            if node.value.denominator == 1:
                return f"({node.value.numerator})"
            return f"({node.value.numerator}/{node.value.denominator})"
        if isinstance(node, Var):
            return node.name
        if isinstance(node, Sum):
            return "(" + "+".join(src(t) for t in node.terms) + ")"
        if isinstance(node, Product):
            return "(" + "*".join(src(f) for f in node.factors) + ")"
        if isinstance(node, Quotient):
            return f"({src(node.num)}/{src(node.den)})"
        if isinstance(node, Power):
            if node.exponent.denominator == 1:
                return f"({src(node.base)}**({node.exponent.numerator}))"
            return f"_fracpow({src(node.base)},{node.exponent.numerator},{node.exponent.denominator})"
        if isinstance(node, Exp):
            return f"_exp({src(node.arg)})"
        if isinstance(node, Log):
            return f"_log({src(node.arg)})"
        raise TypeError(f"unknown node {node!r}")

    namespace = {"_exp": math.exp, "_log": math.log, "_fracpow": _fracpow}
    code = f"lambda {', '.join(args)}: {src(e)}"
    return eval(code, namespace)  # noqa: S307 - source is generated above


# -- printing ---------------------------------------------------------------

_PREC_ADD, _PREC_MUL, _PREC_POW, _PREC_ATOM = 1, 2, 3, 10


def _prec(e: Expr) -> int:
    if isinstance(e, Const):
        if e.value < 0:
            return _PREC_ADD
        return _PREC_ATOM if e.value.denominator == 1 else _PREC_MUL
    if isinstance(e, (Var, Exp, Log)):
        return _PREC_ATOM
    if isinstance(e, Sum):
        return _PREC_ADD
    if isinstance(e, (Product, Quotient)):
        return _PREC_MUL
    if isinstance(e, Power):
        return _PREC_POW
    raise TypeError(f"unknown node {e!r}")


def _split_sign(e: Expr):
    """Split a leading minus off a term, for `a - b` style printing."""
    if isinstance(e, Const) and e.value < 0:
        return True, Const(-e.value)
    if isinstance(e, Product) and isinstance(e.factors[0], Const) and e.factors[0].value < 0:
        return True, mul(Const(-e.factors[0].value), *e.factors[1:])
    if isinstance(e, Quotient):
        negated, body = _split_sign(e.num)
        if negated:
            return True, Quotient(body, e.den)
    return False, e


def _wrap(e: Expr, minimum: int) -> str:
    text = to_text(e)
    return f"({text})" if _prec(e) < minimum else text


def _fmt_exponent(q: Fraction) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    return f"({q.numerator}/{q.denominator})"


def to_text(e: Expr) -> str:
    """Render in the input grammar; parsing the result restores the tree."""
    if isinstance(e, Const):
        return str(e.value)
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Sum):
        # a subtracted or sign-prefixed body must bind at least as tightly
        # as multiplication, else "- (y + 1)" degrades to "- y + 1"
        negated, body = _split_sign(e.terms[0])
        parts = [("-" + _wrap(body, _PREC_ADD + 1)) if negated else _wrap(body, _PREC_ADD)]
        for t in e.terms[1:]:
            negated, body = _split_sign(t)
            parts.append((" - " + _wrap(body, _PREC_ADD + 1)) if negated else (" + " + _wrap(body, _PREC_ADD)))
        return "".join(parts)
    if isinstance(e, Product):
        negated, body = _split_sign(e)
        if negated:
            return "-" + _wrap(body, _PREC_ADD + 1)
        pieces = []
        for f in e.factors:
            # quotient factors need parens: "a*b/c" would reassociate
            need = _PREC_MUL + 1 if isinstance(f, Quotient) else _PREC_MUL
            pieces.append(_wrap(f, need))
        return "*".join(pieces)
    if isinstance(e, Quotient):
        num = _wrap(e.num, _PREC_MUL)
        den = _wrap(e.den, _PREC_MUL + 1)
        return f"{num}/{den}"
    if isinstance(e, Power):
        base = _wrap(e.base, _PREC_POW + 1)
        return f"{base}^{_fmt_exponent(e.exponent)}"
    if isinstance(e, Exp):
        return f"exp({to_text(e.arg)})"
    if isinstance(e, Log):
        return f"log({to_text(e.arg)})"
    raise TypeError(f"unknown node {e!r}")


# -- parsing ----------------------------------------------------------------

_FUNCTIONS = ("exp", "log", "sqrt")


class SymbolTable:
    """Declared names: the geometry variables plus any parameters."""

    def __init__(self, variables: Iterable[str] = ("x", "y", "p"), parameters: Iterable[str] = ()):
        self.variables = tuple(variables)
        self.parameters = tuple(parameters)
        clash = set(self.variables + self.parameters) & set(_FUNCTIONS)
        if clash:
            raise ValueError(f"reserved function names declared as symbols: {sorted(clash)}")

    @property
    def names(self) -> frozenset:
        return frozenset(self.variables) | frozenset(self.parameters)

    def with_parameters(self, extra: Iterable[str]) -> "SymbolTable":
        merged = tuple(dict.fromkeys(self.parameters + tuple(extra)))
        return SymbolTable(self.variables, merged)


class _Tokenizer:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def _skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self):
        self._skip_ws()
        if self.pos >= len(self.text):
            return None, self.pos
        ch = self.text[self.pos]
        if ch.isdigit():
            end = self.pos
            while end < len(self.text) and self.text[end].isdigit():
                end += 1
            return ("int", self.text[self.pos : end]), self.pos
        if ch.isalpha() or ch == "_":
            end = self.pos
            while end < len(self.text) and (self.text[end].isalnum() or self.text[end] == "_"):
                end += 1
            return ("ident", self.text[self.pos : end]), self.pos
        if ch in "+-*/^()":
            return ("op", ch), self.pos
        raise ParseError(f"unexpected character {ch!r}", self.pos)

    def next(self):
        tok, pos = self.peek()
        if tok is not None:
            self.pos = pos + len(tok[1])
        return tok, pos


def parse_expr(text: str, symbols: SymbolTable | Iterable[str]) -> Expr:
    """Parse the bit-exact input grammar.

    Integers, identifiers, `+ - * / ^`, unary minus, parentheses, and the
    functions exp/log/sqrt.  Exponents after `^` must be integer or `(p/q)`
    literals.  Undeclared identifiers are rejected with their position.
    """
    if not isinstance(symbols, SymbolTable):
        symbols = SymbolTable(variables=tuple(symbols), parameters=())
    tz = _Tokenizer(text)

    def expect_op(ch: str):
        tok, pos = tz.next()
        if tok is None or tok[0] != "op" or tok[1] != ch:
            raise ParseError(f"expected {ch!r}", pos)

    def parse_exponent() -> Fraction:
        tok, pos = tz.next()
        if tok is None:
            raise ParseError("missing exponent", pos)
        sign = 1
        if tok == ("op", "-"):
            sign = -1
            tok, pos = tz.next()
        if tok == ("op", "("):
            tok, pos = tz.next()
            inner_sign = sign
            if tok == ("op", "-"):
                inner_sign = -sign
                tok, pos = tz.next()
            if tok is None or tok[0] != "int":
                raise ParseError("exponent must be an integer or (p/q) literal", pos)
            num = int(tok[1])
            nxt, npos = tz.peek()
            if nxt == ("op", "/"):
                tz.next()
                dtok, dpos = tz.next()
                if dtok is None or dtok[0] != "int":
                    raise ParseError("expected integer denominator in exponent", dpos)
                den = int(dtok[1])
                if den == 0:
                    raise ParseError("zero denominator in exponent", dpos)
                expect_op(")")
                return Fraction(inner_sign * num, den)
            expect_op(")")
            return Fraction(inner_sign * num)
        if tok[0] == "int":
            return Fraction(sign * int(tok[1]))
        raise ParseError("exponent must be an integer or (p/q) literal", pos)

    def parse_atom() -> Expr:
        tok, pos = tz.next()
        if tok is None:
            raise ParseError("unexpected end of input", pos)
        kind, value = tok
        if kind == "int":
            return Const(Fraction(int(value)))
        if kind == "ident":
            if value in _FUNCTIONS:
                expect_op("(")
                inner = parse_sum()
                expect_op(")")
                if value == "exp":
                    return exp(inner)
                if value == "log":
                    return log(inner)
                return sqrt(inner)
            if value not in symbols.names:
                raise ParseError(f"undeclared identifier {value!r}", pos)
            return Var(value)
        if tok == ("op", "("):
            inner = parse_sum()
            expect_op(")")
            return inner
        raise ParseError(f"unexpected token {value!r}", pos)

    def parse_primary() -> Expr:
        base = parse_atom()
        nxt, _ = tz.peek()
        if nxt == ("op", "^"):
            tz.next()
            return power(base, parse_exponent())
        return base

    def parse_factor() -> Expr:
        nxt, _ = tz.peek()
        if nxt == ("op", "-"):
            tz.next()
            return neg(parse_factor())
        return parse_primary()

    def parse_term() -> Expr:
        out = parse_factor()
        while True:
            nxt, _ = tz.peek()
            if nxt == ("op", "*"):
                tz.next()
                out = mul(out, parse_factor())
            elif nxt == ("op", "/"):
                tz.next()
                rhs = parse_factor()
                if isinstance(rhs, Const) and rhs.value == 0:
                    raise ParseError("division by the literal zero", tz.pos)
                out = div(out, rhs)
            else:
                return out

    def parse_sum() -> Expr:
        out = parse_term()
        while True:
            nxt, _ = tz.peek()
            if nxt == ("op", "+"):
                tz.next()
                out = add(out, parse_term())
            elif nxt == ("op", "-"):
                tz.next()
                out = add(out, neg(parse_term()))
            else:
                return out

    result = parse_sum()
    tok, pos = tz.peek()
    if tok is not None:
        raise ParseError(f"trailing input {tok[1]!r}", pos)
    return result


# convenience singletons for the fixed geometry variables
X, Y, P = Var("x"), Var("y"), Var("p")
