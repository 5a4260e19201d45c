"""Sparse multivariate polynomials and exact truncated Taylor series.

`Poly` is the canonical form behind the exact zero-test: an expression that
is rational (integer powers, no exp/log) expands to a cleared
numerator/denominator pair of polynomials over exact rationals.  No gcd
reduction is performed anywhere; zero-testing only ever needs the numerator,
so denominators are carried unreduced.

`Series2` is a bivariate Taylor polynomial of bounded total degree with
exact coefficients, used to truncate the metrisability equations to finite
jets.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Mapping, Optional, Tuple

from .expr import (
    Const,
    EvalDomainError,
    Expr,
    Exp,
    Log,
    Power,
    Product,
    Quotient,
    Sum,
    Var,
    free_symbols,
)


class Poly:
    """Sparse map from exponent vectors to nonzero rational coefficients.

    Exponent vectors are tuples of non-negative integers, one slot per
    declared symbol; the symbol tuple is fixed per polynomial.
    """

    __slots__ = ("symbols", "terms")

    def __init__(self, symbols: Tuple[str, ...], terms: Optional[dict] = None):
        self.symbols = symbols
        self.terms = {}
        if terms:
            for exps, c in terms.items():
                if c != 0:
                    self.terms[exps] = Fraction(c)

    @classmethod
    def constant(cls, symbols, c) -> "Poly":
        p = cls(symbols)
        c = Fraction(c)
        if c != 0:
            p.terms[(0,) * len(symbols)] = c
        return p

    @classmethod
    def variable(cls, symbols, name: str) -> "Poly":
        exps = [0] * len(symbols)
        exps[symbols.index(name)] = 1
        p = cls(symbols)
        p.terms[tuple(exps)] = Fraction(1)
        return p

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        return (
            isinstance(other, Poly)
            and self.symbols == other.symbols
            and self.terms == other.terms
        )

    def __add__(self, other: "Poly") -> "Poly":
        out = dict(self.terms)
        for exps, c in other.terms.items():
            s = out.get(exps, Fraction(0)) + c
            if s == 0:
                out.pop(exps, None)
            else:
                out[exps] = s
        p = Poly(self.symbols)
        p.terms = out
        return p

    def __neg__(self) -> "Poly":
        p = Poly(self.symbols)
        p.terms = {e: -c for e, c in self.terms.items()}
        return p

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        out: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in other.terms.items():
                key = tuple(a + b for a, b in zip(e1, e2))
                s = out.get(key, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        p = Poly(self.symbols)
        p.terms = out
        return p

    def pow_int(self, k: int) -> "Poly":
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = Poly.constant(self.symbols, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def eval(self, bindings: Mapping[str, Fraction]) -> Fraction:
        total = Fraction(0)
        values = [Fraction(bindings[s]) for s in self.symbols]
        for exps, c in self.terms.items():
            term = c
            for v, k in zip(values, exps):
                if k:
                    term *= v**k
            total += term
        return total

    def total_degree(self) -> int:
        return max((sum(e) for e in self.terms), default=0)

    def __repr__(self):
        return f"Poly({self.symbols}, {len(self.terms)} terms)"


def expand_rational(e: Expr, symbols: Optional[Tuple[str, ...]] = None):
    """Expand to a cleared (numerator, denominator) Poly pair.

    Returns None when the expression is not rational (fractional powers or
    exp/log anywhere in the tree); that is a normal outcome, not an error.
    No gcd reduction: the pair represents the value but is not in lowest
    terms.
    """
    if symbols is None:
        symbols = tuple(sorted(free_symbols(e)))

    one = Poly.constant(symbols, 1)

    def walk(node: Expr):
        if isinstance(node, Const):
            return Poly.constant(symbols, node.value), one
        if isinstance(node, Var):
            return Poly.variable(symbols, node.name), one
        if isinstance(node, Sum):
            num, den = Poly.constant(symbols, 0), one
            for t in node.terms:
                tn, td = walk(t)
                if tn is None:
                    return None, None
                num = num * td + tn * den
                den = den * td
            return num, den
        if isinstance(node, Product):
            num, den = one, one
            for f in node.factors:
                fn, fd = walk(f)
                if fn is None:
                    return None, None
                num = num * fn
                den = den * fd
            return num, den
        if isinstance(node, Quotient):
            nn, nd = walk(node.num)
            if nn is None:
                return None, None
            dn, dd = walk(node.den)
            if dn is None:
                return None, None
            if dn.is_zero():
                raise ZeroDivisionError("denominator expands to the zero polynomial")
            return nn * dd, nd * dn
        if isinstance(node, Power):
            if node.exponent.denominator != 1:
                return None, None
            k = node.exponent.numerator
            bn, bd = walk(node.base)
            if bn is None:
                return None, None
            if k >= 0:
                return bn.pow_int(k), bd.pow_int(k)
            if bn.is_zero():
                raise ZeroDivisionError("zero base with negative exponent")
            return bd.pow_int(-k), bn.pow_int(-k)
        if isinstance(node, (Exp, Log)):
            return None, None
        raise TypeError(f"unknown node {node!r}")

    num, den = walk(e)
    if num is None:
        return None
    return num, den


# -- bivariate truncated Taylor series ---------------------------------------


class PoleError(EvalDomainError):
    """The expansion point is a pole (denominator vanishes there)."""


class Series2:
    """Taylor polynomial in offsets (x - x0, y - y0) of total degree <= order."""

    __slots__ = ("order", "coeffs")

    def __init__(self, order: int, coeffs: Optional[dict] = None):
        self.order = order
        self.coeffs = {}
        if coeffs:
            for (i, j), c in coeffs.items():
                if i + j <= order and c != 0:
                    self.coeffs[(i, j)] = Fraction(c)

    @classmethod
    def constant(cls, order: int, c) -> "Series2":
        return cls(order, {(0, 0): Fraction(c)})

    def __eq__(self, other):
        return (
            isinstance(other, Series2)
            and self.order == other.order
            and self.coeffs == other.coeffs
        )

    def __add__(self, other: "Series2") -> "Series2":
        out = dict(self.coeffs)
        for key, c in other.coeffs.items():
            s = out.get(key, Fraction(0)) + c
            if s == 0:
                out.pop(key, None)
            else:
                out[key] = s
        return Series2(self.order, out)

    def __neg__(self) -> "Series2":
        return Series2(self.order, {k: -c for k, c in self.coeffs.items()})

    def __sub__(self, other: "Series2") -> "Series2":
        return self + (-other)

    def __mul__(self, other: "Series2") -> "Series2":
        out: dict = {}
        n = self.order
        for (i1, j1), c1 in self.coeffs.items():
            for (i2, j2), c2 in other.coeffs.items():
                i, j = i1 + i2, j1 + j2
                if i + j > n:
                    continue
                key = (i, j)
                s = out.get(key, Fraction(0)) + c1 * c2
                if s == 0:
                    out.pop(key, None)
                else:
                    out[key] = s
        return Series2(n, out)

    def scale(self, c) -> "Series2":
        c = Fraction(c)
        if c == 0:
            return Series2(self.order)
        return Series2(self.order, {k: c * v for k, v in self.coeffs.items()})

    def inverse(self) -> "Series2":
        """Multiplicative inverse by series recursion; needs a nonzero
        constant term."""
        c0 = self.coeffs.get((0, 0), Fraction(0))
        if c0 == 0:
            raise PoleError("series has zero constant term")
        # 1/(c0 (1 + r)) = (1/c0) * sum_k (-r)^k  with r = self/c0 - 1
        rest = Series2(self.order, {k: v / c0 for k, v in self.coeffs.items()})
        rest.coeffs.pop((0, 0), None)
        out = Series2.constant(self.order, 1)
        acc = Series2.constant(self.order, 1)
        for _ in range(self.order):
            acc = (acc * rest).scale(-1)
            if not acc.coeffs:
                break
            out = out + acc
        return out.scale(Fraction(1) / c0)

    def pow_int(self, k: int) -> "Series2":
        if k < 0:
            return self.inverse().pow_int(-k)
        out = Series2.constant(self.order, 1)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def diff_x(self) -> "Series2":
        return Series2(
            self.order,
            {(i - 1, j): c * i for (i, j), c in self.coeffs.items() if i > 0},
        )

    def diff_y(self) -> "Series2":
        return Series2(
            self.order,
            {(i, j - 1): c * j for (i, j), c in self.coeffs.items() if j > 0},
        )

    def coefficient(self, i: int, j: int) -> Fraction:
        return self.coeffs.get((i, j), Fraction(0))

    def __repr__(self):
        return f"Series2(order={self.order}, {len(self.coeffs)} terms)"


def series_expand(e: Expr, point: Tuple[Fraction, Fraction], order: int) -> Series2:
    """Exact Taylor expansion of a rational expression in (x, y) at `point`.

    Parameters must already be substituted away; any symbol other than x, y
    is rejected.  Raises PoleError when the point is a pole and
    NotRationalError-style ValueError on exp/log or fractional powers.
    """
    x0, y0 = Fraction(point[0]), Fraction(point[1])
    extraneous = free_symbols(e) - {"x", "y"}
    if extraneous:
        raise ValueError(f"series_expand needs bound parameters; free: {sorted(extraneous)}")

    def walk(node: Expr) -> Series2:
        if isinstance(node, Const):
            return Series2.constant(order, node.value)
        if isinstance(node, Var):
            base = x0 if node.name == "x" else y0
            offset = (1, 0) if node.name == "x" else (0, 1)
            coeffs = {(0, 0): base, offset: Fraction(1)}
            return Series2(order, coeffs)
        if isinstance(node, Sum):
            out = Series2(order)
            for t in node.terms:
                out = out + walk(t)
            return out
        if isinstance(node, Product):
            out = Series2.constant(order, 1)
            for f in node.factors:
                out = out * walk(f)
            return out
        if isinstance(node, Quotient):
            return walk(node.num) * walk(node.den).inverse()
        if isinstance(node, Power):
            if node.exponent.denominator != 1:
                raise ValueError("series expansion requires integer powers")
            return walk(node.base).pow_int(node.exponent.numerator)
        if isinstance(node, (Exp, Log)):
            raise ValueError("series expansion is defined for rational expressions only")
        raise TypeError(f"unknown node {node!r}")

    return walk(e)
