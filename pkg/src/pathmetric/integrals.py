"""First integrals of the unparametrised geodesic flow.

Three constructions: the quotient of the metric quadratic form by the
square of a linear (Killing) integral; the ratio of the quadratic forms of
two independent solutions of the metrisability system; and the fourth
Painleve-VI-specific linear-in-y' integral driven by solutions of a
hypergeometric-type second-order ODE and its adjoint pair, evaluated by
quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.integrate import quad, solve_ivp

from .expr import Expr, Var, add, compile_float, diff, div, mul, neg, power, sqrt, sub
from .metrisability import PsiTriple
from .projective import Connection, Metric2D, ODECoeffs, covariant_sym_oneform, levi_civita
from .zerotest import DEFAULT_CONFIG, ZeroTestConfig, all_zero, is_zero

P = Var("p")

KIND_RATIONAL_IN_P = "rational-in-p"
KIND_LINEAR_IN_P = "linear-in-p"
KIND_NUMERIC = "numeric"


@dataclass(frozen=True)
class VectorField:
    """K1 d/dx + K2 d/dy (vector components; lowering happens against a
    metric where needed)."""

    k1: Expr
    k2: Expr


@dataclass(frozen=True)
class FirstIntegral:
    kind: str
    value: Optional[Expr] = None  # symbolic kinds: expression in (x, y, p)
    func: Optional[Callable[[float, float, float], float]] = None  # numeric kind
    label: str = ""

    def evaluator(self) -> Callable[[float, float, float], float]:
        if self.func is not None:
            return self.func
        return compile_float(self.value, ("x", "y", "p"))


def lower_index(g: Metric2D, vf: VectorField) -> Tuple[Expr, Expr]:
    k1 = add(mul(g.E, vf.k1), mul(g.F, vf.k2))
    k2 = add(mul(g.F, vf.k1), mul(g.G, vf.k2))
    return k1, k2


def killing_residual(
    g: Metric2D, vf: VectorField, conn: Optional[Connection] = None
) -> Tuple[Expr, Expr, Expr]:
    """Symmetrised covariant derivative of the lowered field; identically
    zero iff vf generates isometries of g."""
    if conn is None:
        conn = levi_civita(g, check_nondegenerate=False)
    w1, w2 = lower_index(g, vf)
    return covariant_sym_oneform(conn, w1, w2)


def integral_from_killing(
    g: Metric2D,
    vf: VectorField,
    check: bool = True,
    config: ZeroTestConfig = DEFAULT_CONFIG,
) -> FirstIntegral:
    """(E + 2 F p + G p^2) / (K1 + K2 p)^2 with the lowered components of a
    Killing field: constant along unparametrised geodesics of g."""
    if check:
        # sampling tier: the residuals stack unreduced denominators far past
        # what exact expansion handles in reasonable time
        residuals = killing_residual(g, vf)
        if not all(is_zero(r, config, force_probabilistic=True).is_zero for r in residuals):
            raise ValueError("vector field is not Killing for the metric")
    w1, w2 = lower_index(g, vf)
    num = add(g.E, mul(2, g.F, P), mul(g.G, power(P, 2)))
    den = power(add(w1, mul(w2, P)), 2)
    return FirstIntegral(kind=KIND_RATIONAL_IN_P, value=div(num, den), label="killing-quotient")


def ratio_integral(
    s1: PsiTriple, s2: PsiTriple, config: ZeroTestConfig = DEFAULT_CONFIG
) -> FirstIntegral:
    """Ratio of the p-quadratic forms of two solutions of the metrisability
    system (both for the same structure)."""
    den = s2.quadratic_in_p(P)
    if all_zero((s2.psi1, s2.psi2, s2.psi3), config):
        raise ValueError("second solution has identically zero quadratic form")
    return FirstIntegral(
        kind=KIND_RATIONAL_IN_P, value=div(s1.quadratic_in_p(P), den), label="solution-ratio"
    )


def killing_from_degenerate(
    s_nondeg: PsiTriple,
    s_deg: PsiTriple,
    config: ZeroTestConfig = DEFAULT_CONFIG,
) -> VectorField:
    """A degenerate solution factors as omega (x) omega; contracting the
    inverse of the nondegenerate solution's metric with omega / Delta yields
    a Killing vector of that metric.  The result is defined up to overall
    scale and sign."""
    if not is_zero(s_deg.delta, config).is_zero:
        raise ValueError("degenerate factor required: Delta of s_deg must vanish")
    if is_zero(s_nondeg.delta, config).is_zero:
        raise ValueError("nondegenerate solution required")
    psi1_zero = is_zero(s_deg.psi1, config).is_zero
    if not psi1_zero:
        w1 = sqrt(s_deg.psi1)
        w2 = div(s_deg.psi2, w1)
    else:
        if is_zero(s_deg.psi3, config).is_zero:
            raise ValueError("zero solution is not rank one")
        w2 = sqrt(s_deg.psi3)
        w1 = div(s_deg.psi2, w2)
    # raise the index with g^{ab} = Delta sigma^adj: K^a picks up no Delta
    k1 = sub(mul(s_nondeg.psi3, w1), mul(s_nondeg.psi2, w2))
    k2 = sub(mul(s_nondeg.psi1, w2), mul(s_nondeg.psi2, w1))
    return VectorField(k1=k1, k2=k2)


def conservation_residual(k: ODECoeffs, integral: FirstIntegral) -> Expr:
    """Total derivative of the integral along the flow of the ODE:
    I_x + p I_y + (A3 p^3 + A2 p^2 + A1 p + A0) I_p."""
    if integral.value is None:
        raise ValueError("conservation residual needs a symbolic integral")
    i = integral.value
    return add(diff(i, "x"), mul(P, diff(i, "y")), mul(k.rhs(P), diff(i, "p")))


# -- the Painleve VI machinery -------------------------------------------------


class SingularIntervalError(ValueError):
    pass


@dataclass(frozen=True)
class PicardFuchsBasis:
    """Numeric fundamental data on an interval avoiding the singular points
    {0, 1}: two independent solutions of

        4 x (x-1) w'' + 4 (2x-1) w' + w = 0

    and one solution (A, B) of the adjoint pair A' = B / (4x(x-1)),
    B' = -B (1-2x)/(x(x-1)) - A."""

    interval: Tuple[float, float]
    anchor: float
    _eval: Callable[[float], np.ndarray]

    def omega1(self, x: float) -> float:
        return float(self._eval(x)[0])

    def d_omega1(self, x: float) -> float:
        return float(self._eval(x)[1])

    def omega2(self, x: float) -> float:
        return float(self._eval(x)[2])

    def d_omega2(self, x: float) -> float:
        return float(self._eval(x)[3])

    def adjoint_a(self, x: float) -> float:
        return float(self._eval(x)[4])

    def adjoint_b(self, x: float) -> float:
        return float(self._eval(x)[5])

    def wronskian(self, x: float) -> float:
        v = self._eval(x)
        return float(v[0] * v[3] - v[1] * v[2])

    def covers(self, x: float) -> bool:
        lo, hi = self.interval
        return lo <= x <= hi


def picard_fuchs_solve(
    interval: Tuple[float, float],
    anchor: Optional[float] = None,
    omega_ics: Tuple[Tuple[float, float], Tuple[float, float]] = ((1.0, 0.0), (0.0, 1.0)),
    adjoint_ics: Tuple[float, float] = (0.0, 1.0),
    rtol: float = 1e-12,
    atol: float = 1e-12,
) -> PicardFuchsBasis:
    """Integrate the second-order equation and its adjoint pair over the
    interval, anchored at an interior point carrying the initial data."""
    lo, hi = float(interval[0]), float(interval[1])
    if lo >= hi:
        raise SingularIntervalError("empty interval")
    for s in (0.0, 1.0):
        if lo <= s <= hi:
            raise SingularIntervalError(f"interval touches the singular point x = {s}")
    if anchor is None:
        anchor = 0.5 * (lo + hi)
    if not (lo <= anchor <= hi):
        raise SingularIntervalError("anchor outside interval")

    def rhs(xx, state):
        w1, dw1, w2, dw2, a, b = state
        den = 4.0 * xx * (xx - 1.0)
        ddw1 = -(4.0 * (2.0 * xx - 1.0) * dw1 + w1) / den
        ddw2 = -(4.0 * (2.0 * xx - 1.0) * dw2 + w2) / den
        da = b / den
        db = -b * (1.0 - 2.0 * xx) / (xx * (xx - 1.0)) - a
        return [dw1, ddw1, dw2, ddw2, da, db]

    state0 = [
        omega_ics[0][0],
        omega_ics[0][1],
        omega_ics[1][0],
        omega_ics[1][1],
        adjoint_ics[0],
        adjoint_ics[1],
    ]
    pieces = []
    for a_, b_ in ((anchor, hi), (anchor, lo)):
        if a_ == b_:
            pieces.append(None)
            continue
        sol = solve_ivp(
            rhs, (a_, b_), state0, method="DOP853", rtol=rtol, atol=atol, dense_output=True
        )
        if not sol.success:
            raise RuntimeError(f"Picard-Fuchs integration failed: {sol.message}")
        pieces.append(sol.sol)
    fwd, bwd = pieces

    def evaluate(xx: float) -> np.ndarray:
        if not (lo <= xx <= hi):
            raise ValueError(f"x = {xx} outside basis interval {interval}")
        if xx >= anchor:
            return fwd(xx) if fwd is not None else np.array(state0)
        return bwd(xx) if bwd is not None else np.array(state0)

    return PicardFuchsBasis(interval=(lo, hi), anchor=float(anchor), _eval=evaluate)


def pvi_integral_eval(
    pf: PicardFuchsBasis, x: float, y: float, p: float, quad_tol: float = 1e-11
) -> float:
    """Evaluate the linear-in-y' integral

        I = y' B(x) / sqrt(y (y-1) (y-x))
            + int_0^y [A(x) + B(x)/(2 (w-x))] dw / sqrt(w (w-1) (w-x))

    on the real chart 0 < y < 1 < x, where the cubic under the roots is
    positive.  The endpoint w = 0 is regularised with w = s^2."""
    if not (0.0 < y < 1.0 < x):
        raise ValueError("chart requires 0 < y < 1 < x")
    if not pf.covers(x):
        raise ValueError("Picard-Fuchs basis does not cover x")
    a, b = pf.adjoint_a(x), pf.adjoint_b(x)
    cubic = y * (y - 1.0) * (y - x)
    lead = p * b / math.sqrt(cubic)

    def integrand(s: float) -> float:
        w = s * s
        return 2.0 * (a + b / (2.0 * (w - x))) / math.sqrt((w - 1.0) * (w - x))

    val, _err = quad(integrand, 0.0, math.sqrt(y), epsabs=quad_tol, epsrel=quad_tol, limit=200)
    return lead + val


def pvi_first_integral(pf: PicardFuchsBasis) -> FirstIntegral:
    return FirstIntegral(
        kind=KIND_NUMERIC,
        func=lambda xx, yy, pp: pvi_integral_eval(pf, xx, yy, pp),
        label="pvi-linear-integral",
    )


def pvi_flat_chart(pf: PicardFuchsBasis, denominator: str = "omega1"):
    """Chart maps (X(x), Y(x, y)) in which the metrisable PVI flow
    straightens: Y is the normalised incomplete elliptic-type integral and
    X the ratio of the two basis solutions.

    Any basis works; the normalising solution must not vanish on the x-range
    in use (omega2 vanishes at the anchor under the default initial data,
    hence omega1 as the default denominator)."""
    if denominator == "omega1":
        den, num = pf.omega1, pf.omega2
    elif denominator == "omega2":
        den, num = pf.omega2, pf.omega1
    else:
        raise ValueError("denominator must be 'omega1' or 'omega2'")

    def chart_x(xx: float, yy: float = 0.0) -> float:
        return num(xx) / den(xx)

    def chart_y(xx: float, yy: float) -> float:
        if not (0.0 < yy < 1.0 < xx):
            raise ValueError("chart requires 0 < y < 1 < x")

        def integrand(s: float) -> float:
            w = s * s
            return 2.0 / math.sqrt((w - 1.0) * (w - xx))

        val, _err = quad(integrand, 0.0, math.sqrt(yy), epsabs=1e-13, epsrel=1e-13, limit=200)
        return val / den(xx)

    return chart_x, chart_y
