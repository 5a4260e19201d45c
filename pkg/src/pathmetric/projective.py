"""Projective structures on a surface.

A second-order ODE y'' = A3 y'^3 + A2 y'^2 + A1 y' + A0 encodes a path
geometry; torsion-free connections sharing those paths form a projective
class.  This module holds the coefficient <-> connection dictionary, the
projective change of representative, the two Liouville flatness invariants,
and the Levi-Civita construction that ties metrics into the picture.
"""

from __future__ import annotations

from dataclasses import dataclass

from .expr import Expr, ZERO, add, as_expr, diff, div, mul, neg, power, sub
from .zerotest import DEFAULT_CONFIG, ZeroTestConfig, ZeroVerdict, is_zero


class DegenerateMetricError(ValueError):
    """The candidate metric has identically vanishing determinant."""


@dataclass(frozen=True)
class ODECoeffs:
    """The quadruple (A0, A1, A2, A3), functions of x and y."""

    a0: Expr
    a1: Expr
    a2: Expr
    a3: Expr

    def as_tuple(self):
        return (self.a0, self.a1, self.a2, self.a3)

    def rhs(self, p: Expr) -> Expr:
        return add(mul(self.a3, power(p, 3)), mul(self.a2, power(p, 2)), mul(self.a1, p), self.a0)


@dataclass(frozen=True)
class Connection:
    """Christoffel symbols of a torsion-free connection; only the six
    symmetric components are stored."""

    c1_11: Expr
    c1_12: Expr
    c1_22: Expr
    c2_11: Expr
    c2_12: Expr
    c2_22: Expr

    def gamma(self, a: int, b: int, c: int) -> Expr:
        b, c = min(b, c), max(b, c)
        return getattr(self, f"c{a}_{b}{c}")


@dataclass(frozen=True)
class OneForm:
    u1: Expr
    u2: Expr


@dataclass(frozen=True)
class Metric2D:
    """g = E dx^2 + 2 F dx dy + G dy^2."""

    E: Expr
    F: Expr
    G: Expr

    def determinant(self) -> Expr:
        return sub(mul(self.E, self.G), power(self.F, 2))


ZERO_CONNECTION = Connection(ZERO, ZERO, ZERO, ZERO, ZERO, ZERO)


def connection_to_coeffs(c: Connection) -> ODECoeffs:
    """Eliminate the parameter from the geodesic equations of c."""
    return ODECoeffs(
        a0=neg(c.c2_11),
        a1=sub(c.c1_11, mul(2, c.c2_12)),
        a2=sub(mul(2, c.c1_12), c.c2_22),
        a3=c.c1_22,
    )


def representative_connection(k: ODECoeffs) -> Connection:
    """The distinguished trace-adjusted representative of the class of k."""
    third = lambda e: div(e, 3)  # noqa: E731
    return Connection(
        c1_11=third(k.a1),
        c1_12=third(k.a2),
        c1_22=k.a3,
        c2_11=neg(k.a0),
        c2_12=neg(third(k.a1)),
        c2_22=neg(third(k.a2)),
    )


def projective_shift(c: Connection, u: OneForm) -> Connection:
    """Move to another connection with the same unparametrised geodesics."""
    return Connection(
        c1_11=add(c.c1_11, mul(2, u.u1)),
        c1_12=add(c.c1_12, u.u2),
        c1_22=c.c1_22,
        c2_11=c.c2_11,
        c2_12=add(c.c2_12, u.u1),
        c2_22=add(c.c2_22, mul(2, u.u2)),
    )


def liouville_invariants(k: ODECoeffs) -> tuple[Expr, Expr]:
    """The two second-order invariants whose joint vanishing characterises
    projectively flat coefficient quadruples."""
    a0, a1, a2, a3 = k.as_tuple()
    dx = lambda e: diff(e, "x")  # noqa: E731
    dy = lambda e: diff(e, "y")  # noqa: E731
    l1 = add(
        mul(as_expr(2) / 3, dy(dx(a1))),
        neg(mul(as_expr(1) / 3, dx(dx(a2)))),
        neg(dy(dy(a0))),
        mul(a0, dy(a2)),
        mul(a2, dy(a0)),
        neg(mul(a3, dx(a0))),
        neg(mul(2, a0, dx(a3))),
        neg(mul(as_expr(2) / 3, a1, dy(a1))),
        mul(as_expr(1) / 3, a1, dx(a2)),
    )
    l2 = add(
        mul(as_expr(2) / 3, dy(dx(a2))),
        neg(mul(as_expr(1) / 3, dy(dy(a1)))),
        neg(dx(dx(a3))),
        neg(mul(a3, dx(a1))),
        neg(mul(a1, dx(a3))),
        mul(a0, dy(a3)),
        mul(2, a3, dy(a0)),
        mul(as_expr(2) / 3, a2, dx(a2)),
        neg(mul(as_expr(1) / 3, a2, dy(a1))),
    )
    return l1, l2


def is_projectively_flat(
    k: ODECoeffs, config: ZeroTestConfig = DEFAULT_CONFIG
) -> tuple[ZeroVerdict, ZeroVerdict]:
    l1, l2 = liouville_invariants(k)
    return is_zero(l1, config), is_zero(l2, config)


def levi_civita(
    g: Metric2D, check_nondegenerate: bool = True, config: ZeroTestConfig = DEFAULT_CONFIG
) -> Connection:
    """Christoffel symbols of the Levi-Civita connection of g."""
    det = g.determinant()
    if check_nondegenerate and is_zero(det, config).is_zero:
        raise DegenerateMetricError("metric determinant vanishes identically")
    iuu = div(g.G, det)
    iuv = neg(div(g.F, det))
    ivv = div(g.E, det)
    ex, ey = diff(g.E, "x"), diff(g.E, "y")
    fx, fy = diff(g.F, "x"), diff(g.F, "y")
    gx, gy = diff(g.G, "x"), diff(g.G, "y")
    half = as_expr(1) / 2
    return Connection(
        c1_11=mul(half, add(mul(iuu, ex), mul(iuv, sub(mul(2, fx), ey)))),
        c1_12=mul(half, add(mul(iuu, ey), mul(iuv, gx))),
        c1_22=mul(half, add(mul(iuu, sub(mul(2, fy), gx)), mul(iuv, gy))),
        c2_11=mul(half, add(mul(iuv, ex), mul(ivv, sub(mul(2, fx), ey)))),
        c2_12=mul(half, add(mul(iuv, ey), mul(ivv, gx))),
        c2_22=mul(half, add(mul(iuv, sub(mul(2, fy), gx)), mul(ivv, gy))),
    )


def covariant_sym_oneform(conn: Connection, w1: Expr, w2: Expr) -> tuple[Expr, Expr, Expr]:
    """Symmetrised covariant derivative of a one-form: the (11), (12), (22)
    components of D_(a) w_(b)."""
    d11 = sub(diff(w1, "x"), add(mul(conn.c1_11, w1), mul(conn.c2_11, w2)))
    d12 = sub(diff(w2, "x"), add(mul(conn.c1_12, w1), mul(conn.c2_12, w2)))
    d21 = sub(diff(w1, "y"), add(mul(conn.c1_12, w1), mul(conn.c2_12, w2)))
    d22 = sub(diff(w2, "y"), add(mul(conn.c1_22, w1), mul(conn.c2_22, w2)))
    return d11, div(add(d12, d21), 2), d22


def covariant_sym_2tensor(
    conn: Connection, s11: Expr, s12: Expr, s22: Expr
) -> tuple[Expr, Expr, Expr, Expr]:
    """Symmetrised covariant derivative of a symmetric 2-tensor: the four
    independent components D_(a) s_(bc) for (abc) in 111, 112, 122, 222.

    Mixed components are returned as plain permutation sums (no 1/3), so
    they match the metrisability residuals on the nose.
    """

    def d(a: int, b: int, c: int) -> Expr:
        # D_a s_bc = d_a s_bc - Gamma^d_ab s_dc - Gamma^d_ac s_bd
        comps = {(1, 1): s11, (1, 2): s12, (2, 1): s12, (2, 2): s22}
        name = {1: "x", 2: "y"}[a]
        out = diff(comps[(b, c)], name)
        for dd in (1, 2):
            out = sub(out, mul(conn.gamma(dd, a, b), comps[(dd, c)]))
            out = sub(out, mul(conn.gamma(dd, a, c), comps[(b, dd)]))
        return out

    t111 = d(1, 1, 1)
    t112 = add(mul(2, d(1, 1, 2)), d(2, 1, 1))
    t122 = add(d(1, 2, 2), mul(2, d(2, 1, 2)))
    t222 = d(2, 2, 2)
    return t111, t112, t122, t222
