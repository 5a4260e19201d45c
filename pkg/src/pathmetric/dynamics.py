"""Numerical verification layer: trajectories, geodesics, drift monitors.

Adaptive integration (Dormand-Prince 8th order with dense output) of the
second-order ODEs and of geodesic flows, with blow-up detection tuned to
equations whose movable singularities are poles: solutions genuinely leave
every compact set in finite x, and that must be reported as a pole rather
than poisoning downstream statistics as a solver failure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .expr import Expr, compile_float, eval_float, free_symbols
from .integrals import FirstIntegral
from .projective import Connection, Metric2D, ODECoeffs, levi_civita

TERM_COMPLETED = "completed"
TERM_POLE = "pole"
TERM_STEP_FAILURE = "step-failure"

# blow-up policy: past these magnitudes with the solver struggling, the
# trajectory is declared to have hit a movable pole
POLE_Y_THRESHOLD = 1e8
POLE_P_THRESHOLD = 1e12


@dataclass
class Trajectory:
    xs: np.ndarray
    ys: np.ndarray
    ps: np.ndarray
    termination: str
    x_stop: Optional[float]
    tol_abs: float
    tol_rel: float
    _dense: Callable[[float], Tuple[float, float]] = field(repr=False, default=None)

    @property
    def span(self) -> Tuple[float, float]:
        return float(self.xs[0]), float(self.xs[-1])

    def eval(self, x: float) -> Tuple[float, float]:
        return self._dense(float(x))

    def grid(self, n: int = 200, margin: float = 1e-9) -> np.ndarray:
        a, b = self.span
        pad = margin * max(1.0, abs(b - a))
        return np.linspace(a + pad, b - pad, n)

    def pole_free_grid(
        self, n: int = 200, y_cap: float = 1e3, p_cap: float = 1e6
    ) -> np.ndarray:
        """Sample grid restricted to the prefix where the solution is far
        from blow-up; integrals polynomial in y lose all precision to
        cancellation once y is large, well before the pole thresholds."""
        xs = self.grid(4 * n)
        good = xs[: 4 * n]
        for i, xq in enumerate(xs):
            yq, pq = self.eval(xq)
            if abs(yq) > y_cap or abs(pq) > p_cap:
                good = xs[:i]
                break
        if len(good) < 8:
            raise ValueError("trajectory has no usable pole-free prefix")
        return np.linspace(good[0], good[-1], n)


def _rhs_from_coeffs(k: ODECoeffs) -> Callable:
    unbound = set()
    for a in k.as_tuple():
        unbound |= free_symbols(a) - {"x", "y"}
    if unbound:
        raise ValueError(f"numeric integration needs bound parameters; free: {sorted(unbound)}")
    fns = [compile_float(a, ("x", "y")) for a in k.as_tuple()]

    def rhs(x: float, y: float, p: float) -> float:
        a0, a1, a2, a3 = (f(x, y) for f in fns)
        return ((a3 * p + a2) * p + a1) * p + a0

    return rhs


def integrate_ode(
    k_or_rhs,
    init: Tuple[float, float, float],
    span: Tuple[float, float],
    tol_abs: float = 1e-12,
    tol_rel: float = 1e-10,
    n_samples: int = 400,
) -> Trajectory:
    """Integrate y'' = RHS(x, y, y') from (x0, y0, p0) over span in x.

    Accepts either coefficient quadruples (parameters bound) or a callable
    rhs(x, y, p).  Termination is `completed`, `pole` (blow-up thresholds
    crossed, position reported), or `step-failure`.
    """
    rhs = _rhs_from_coeffs(k_or_rhs) if isinstance(k_or_rhs, ODECoeffs) else k_or_rhs
    x0, y0, p0 = (float(v) for v in init)
    a, b = (float(v) for v in span)
    if not math.isclose(x0, a, rel_tol=0, abs_tol=1e-12):
        raise ValueError("span must start at the initial x")

    def fun(x, state):
        y, p = state
        try:
            dp = rhs(x, y, p)
        except (ZeroDivisionError, ValueError, OverflowError):
            return [math.inf, math.inf]
        return [p, dp]

    def blow_y(x, state):
        return abs(state[0]) - POLE_Y_THRESHOLD

    def blow_p(x, state):
        return abs(state[1]) - POLE_P_THRESHOLD

    blow_y.terminal = True
    blow_p.terminal = True

    sol = solve_ivp(
        fun,
        (a, b),
        [y0, p0],
        method="DOP853",
        rtol=tol_rel,
        atol=tol_abs,
        dense_output=True,
        events=[blow_y, blow_p],
    )
    if sol.status == 1:
        termination = TERM_POLE
        x_stop = float(sol.t[-1])
    elif sol.status == 0:
        termination = TERM_COMPLETED
        x_stop = None
    else:
        yl, pl = sol.y[0][-1], sol.y[1][-1]
        near_blowup = abs(yl) > POLE_Y_THRESHOLD * 1e-4 or abs(pl) > POLE_P_THRESHOLD * 1e-4
        termination = TERM_POLE if near_blowup else TERM_STEP_FAILURE
        x_stop = float(sol.t[-1])

    x_last = float(sol.t[-1])
    xs = np.linspace(a, x_last, n_samples)
    dense = sol.sol
    states = dense(xs)

    def point(xq: float) -> Tuple[float, float]:
        v = dense(xq)
        return float(v[0]), float(v[1])

    return Trajectory(
        xs=xs,
        ys=np.asarray(states[0], dtype=float),
        ps=np.asarray(states[1], dtype=float),
        termination=termination,
        x_stop=x_stop,
        tol_abs=tol_abs,
        tol_rel=tol_rel,
        _dense=point,
    )


class ChartFailure(RuntimeError):
    """x stopped being monotone along the geodesic (dx/dt hit zero)."""


def integrate_geodesic(
    g: Metric2D,
    init: Tuple[float, float, float, float],
    x_end: float,
    tol_abs: float = 1e-12,
    tol_rel: float = 1e-10,
    n_samples: int = 400,
    conn: Optional[Connection] = None,
) -> Trajectory:
    """Integrate the parametrised geodesic flow of g from (x, y, xdot, ydot)
    until x reaches x_end, then reproject to (x, y(x), y'(x))."""
    if conn is None:
        conn = levi_civita(g, check_nondegenerate=False)
    gam = {
        name: compile_float(getattr(conn, name), ("x", "y"))
        for name in ("c1_11", "c1_12", "c1_22", "c2_11", "c2_12", "c2_22")
    }
    x0, y0, vx0, vy0 = (float(v) for v in init)
    if vx0 == 0:
        raise ChartFailure("initial dx/dt must be nonzero to parametrise by x")
    direction = 1.0 if x_end > x0 else -1.0
    if vx0 * direction < 0:
        raise ChartFailure("initial dx/dt points away from the target x")

    def fun(t, state):
        x, y, vx, vy = state
        try:
            c111 = gam["c1_11"](x, y)
            c112 = gam["c1_12"](x, y)
            c122 = gam["c1_22"](x, y)
            c211 = gam["c2_11"](x, y)
            c212 = gam["c2_12"](x, y)
            c222 = gam["c2_22"](x, y)
        except (ZeroDivisionError, ValueError, OverflowError):
            return [math.inf] * 4
        ax = -(c111 * vx * vx + 2.0 * c112 * vx * vy + c122 * vy * vy)
        ay = -(c211 * vx * vx + 2.0 * c212 * vx * vy + c222 * vy * vy)
        return [vx, vy, ax, ay]

    def reach(t, state):
        return state[0] - x_end

    reach.terminal = True

    def stall(t, state):
        return state[2]

    stall.terminal = True

    t_max = 50.0 * (abs(x_end - x0) / abs(vx0) + 1.0)
    sol = solve_ivp(
        fun,
        (0.0, t_max),
        [x0, y0, vx0, vy0],
        method="DOP853",
        rtol=tol_rel,
        atol=tol_abs,
        dense_output=True,
        events=[reach, stall],
    )
    if sol.status < 0:
        raise RuntimeError(f"geodesic integration failed: {sol.message}")
    if len(sol.t_events[1]) and not len(sol.t_events[0]):
        raise ChartFailure("dx/dt vanished before reaching the target x")
    if not len(sol.t_events[0]):
        raise RuntimeError("geodesic did not reach the target x within the parameter budget")
    t_end = float(sol.t_events[0][0])
    dense = sol.sol
    x_reached = float(dense(t_end)[0])
    x_lo, x_hi = min(x0, x_reached), max(x0, x_reached)

    def t_of_x(xq: float) -> float:
        xq = min(max(xq, x_lo), x_hi)
        f = lambda t: dense(t)[0] - xq  # noqa: E731
        fa, fb = f(0.0), f(t_end)
        if fa == 0.0 or fa * fb > 0:
            return 0.0 if abs(fa) <= abs(fb) else t_end
        return brentq(f, 0.0, t_end, xtol=1e-14, rtol=8.881784197001252e-16)

    def point(xq: float) -> Tuple[float, float]:
        st = dense(t_of_x(xq))
        return float(st[1]), float(st[3] / st[2])

    xs = np.linspace(x0, x_reached, n_samples)
    ys = np.empty_like(xs)
    ps = np.empty_like(xs)
    for i, xq in enumerate(xs):
        ys[i], ps[i] = point(xq)
    return Trajectory(
        xs=xs,
        ys=ys,
        ps=ps,
        termination=TERM_COMPLETED,
        x_stop=None,
        tol_abs=tol_abs,
        tol_rel=tol_rel,
        _dense=point,
    )


# -- monitors -----------------------------------------------------------------


@dataclass(frozen=True)
class DriftReport:
    drift: float  # max |I - I0| / max(1, |I0|)
    reference: float
    n_points: int


def monitor_integral(traj: Trajectory, integral: FirstIntegral, n: int = 200) -> DriftReport:
    """Relative drift of a claimed first integral along the pole-free part
    of the trajectory."""
    fn = integral.evaluator()
    xs = traj.pole_free_grid(n)
    values = []
    for xq in xs:
        yq, pq = traj.eval(xq)
        values.append(fn(float(xq), yq, pq))
    values = np.asarray(values, dtype=float)
    if not np.all(np.isfinite(values)):
        raise ValueError("integral is singular along the trajectory")
    ref = float(values[0])
    drift = float(np.max(np.abs(values - ref)) / max(1.0, abs(ref)))
    return DriftReport(drift=drift, reference=ref, n_points=n)


def _chart_callable(chart) -> Callable[[float, float], float]:
    if isinstance(chart, Expr):
        fn = compile_float(chart, ("x", "y"))
        return lambda xq, yq: fn(xq, yq)
    return chart


def flat_chart_check(traj: Trajectory, chart_x, chart_y, n: int = 200) -> float:
    """Max residual of the best affine fit Y = a X + b along the trajectory;
    small iff the chart straightens the flow."""
    fx = _chart_callable(chart_x)
    fy = _chart_callable(chart_y)
    pts_x, pts_y = [], []
    for xq in traj.pole_free_grid(n):
        yq, _pq = traj.eval(xq)
        pts_x.append(fx(float(xq), yq))
        pts_y.append(fy(float(xq), yq))
    pts_x = np.asarray(pts_x)
    pts_y = np.asarray(pts_y)
    design = np.stack([pts_x, np.ones_like(pts_x)], axis=1)
    coef, *_ = np.linalg.lstsq(design, pts_y, rcond=None)
    residual = pts_y - design @ coef
    return float(np.max(np.abs(residual)))


def compare_with_geodesic(
    coeffs: ODECoeffs,
    metric: Metric2D,
    init: Tuple[float, float, float],
    span: Tuple[float, float],
    tol_abs: float = 1e-12,
    tol_rel: float = 1e-11,
    n: int = 100,
) -> float:
    """Max |y_ode - y_geodesic| over the shared pole-free span, starting
    from the same (x0, y0, p0)."""
    ode = integrate_ode(coeffs, init, span, tol_abs=tol_abs, tol_rel=tol_rel)
    xs = ode.pole_free_grid(n)
    geo = integrate_geodesic(
        metric, (init[0], init[1], 1.0, init[2]), float(xs[-1]), tol_abs=tol_abs, tol_rel=tol_rel
    )
    dev = 0.0
    for xq in xs:
        y1, _ = ode.eval(xq)
        y2, _ = geo.eval(xq)
        dev = max(dev, abs(y1 - y2))
    return dev


# -- the coalescence limit -------------------------------------------------------


@dataclass(frozen=True)
class CoalescenceReport:
    eps: Tuple[Fraction, ...]
    errors: Tuple[float, ...]
    ratios: Tuple[float, ...]  # errors[i] / errors[i+1]
    samples: Tuple[Tuple[Fraction, Fraction], ...]
    converged: bool  # errors strictly decreasing along the list


DEFAULT_COALESCENCE_SAMPLES = (
    (Fraction(1, 2), Fraction(1, 3)),
    (Fraction(7, 10), Fraction(1, 2)),
    (Fraction(1), Fraction(3, 4)),
    (Fraction(5, 4), Fraction(2, 5)),
    (Fraction(3, 2), Fraction(1)),
)


def coalescence_check(
    alpha: Fraction,
    gamma: Fraction,
    eps_list: Sequence[Fraction],
    samples: Iterable[Tuple[Fraction, Fraction]] = DEFAULT_COALESCENCE_SAMPLES,
    a3: Fraction = Fraction(1),
    b3: Optional[Fraction] = None,
    precision_bits: int = 200,
) -> CoalescenceReport:
    """Degenerate the two-parameter family of metrics of the fifth equation
    into the third's under x -> x^2, y -> 1 + eps*x*y, comparing the pulled
    back components against the limit metric at sample points, per eps.

    gamma != 0 uses the forced constants A(eps), B(eps) and lands on the
    limit constants (1, 1 - 4 alpha^2 / gamma); the gamma = 0 branch keeps
    (a3, b3) free.
    """
    import mpmath

    from . import catalog
    from .expr import Var, as_expr

    alpha, gamma = Fraction(alpha), Fraction(gamma)
    eps_list = [Fraction(e) for e in eps_list]
    if any(e <= 0 for e in eps_list):
        raise ValueError("eps values must be positive")
    if any(e2 >= e1 for e1, e2 in zip(eps_list, eps_list[1:])):
        raise ValueError("eps list must be strictly decreasing")
    samples = tuple((Fraction(sx), Fraction(sy)) for sx, sy in samples)

    if gamma != 0:
        target_const = (Fraction(1), 1 - 4 * alpha**2 / gamma)
    else:
        if b3 is None:
            b3 = Fraction(3)  # keeps the limit metric regular at the default samples
        target_const = (Fraction(a3), Fraction(b3))
    target = catalog.get_metric(
        "PIII", constants=target_const, params=dict(alpha=alpha, beta=0, gamma=gamma, delta=0)
    ).metric

    # PV metric with symbolic constants; bound to A(eps), B(eps) at evaluation
    ac, bc = Var("A_const"), Var("B_const")
    al_s, be_s = Var("alpha_pv"), Var("beta_pv")
    yv, xv = Var("y"), Var("x")
    t_expr = bc * yv + 2 * ac * (be_s - al_s * yv**2)
    e_pv = yv / (ac**2 * xv**2 * t_expr)
    g_pv = yv / (ac * (yv - 1) ** 2 * t_expr**2)

    errors = []
    with mpmath.workprec(precision_bits):
        for eps in eps_list:
            # coalescing parameter values on the PV side
            al_pv = gamma / (8 * eps**2) + alpha / (4 * eps)
            be_pv = -gamma / (8 * eps**2)
            if gamma != 0:
                a_eps = (4 * _to_mpf(gamma) / (2 * _to_mpf(alpha) * _to_mpf(eps) + _to_mpf(gamma))) ** (
                    mpmath.mpf(2) / 3
                )
                b_eps = (
                    (-_to_mpf(alpha) * _to_mpf(eps) + _to_mpf(gamma))
                    * (4 * _to_mpf(alpha) * _to_mpf(eps) + 2 * _to_mpf(gamma)) ** (mpmath.mpf(1) / 3)
                    / (_to_mpf(eps) ** 2 * _to_mpf(gamma) ** (mpmath.mpf(1) / 3))
                )
            else:
                a_eps = 4 ** (mpmath.mpf(2) / 3) * _to_mpf(a3)
                b_eps = (2 * _to_mpf(alpha) * _to_mpf(a3) + (_to_mpf(b3) - _to_mpf(a3)) * _to_mpf(eps)) / (
                    2 ** (mpmath.mpf(2) / 3) * _to_mpf(eps)
                )
            worst = mpmath.mpf(0)
            for sx, sy in samples:
                big_x = sx * sx
                big_y = 1 + eps * sx * sy
                bindings = {
                    "x": big_x,
                    "y": big_y,
                    "A_const": a_eps,
                    "B_const": b_eps,
                    "alpha_pv": al_pv,
                    "beta_pv": be_pv,
                }
                e_val = eval_float(e_pv, bindings, precision_bits)
                g_val = eval_float(g_pv, bindings, precision_bits)
                de_dx, de_dy = 2 * _to_mpf(sx), mpmath.mpf(0)
                dy_dx, dy_dy = _to_mpf(eps) * _to_mpf(sy), _to_mpf(eps) * _to_mpf(sx)
                e_star = e_val * de_dx**2 + g_val * dy_dx**2
                f_star = g_val * dy_dx * dy_dy
                g_star = g_val * dy_dy**2
                pt = {"x": sx, "y": sy, "alpha": alpha, "gamma": gamma}
                e_t = eval_float(target.E, pt, precision_bits)
                f_t = eval_float(target.F, pt, precision_bits)
                g_t = eval_float(target.G, pt, precision_bits)
                worst = max(
                    worst, abs(e_star - e_t), abs(f_star - f_t), abs(g_star - g_t)
                )
            errors.append(float(worst))
    ratios = tuple(
        errors[i] / errors[i + 1] if errors[i + 1] else math.inf for i in range(len(errors) - 1)
    )
    converged = all(e1 > e2 for e1, e2 in zip(errors, errors[1:]))
    return CoalescenceReport(
        eps=tuple(eps_list),
        errors=tuple(errors),
        ratios=ratios,
        samples=samples,
        converged=converged,
    )


def _to_mpf(q: Fraction):
    import mpmath

    q = Fraction(q)
    return mpmath.mpf(q.numerator) / q.denominator
