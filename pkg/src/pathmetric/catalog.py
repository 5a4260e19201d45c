"""Built-in equations, metrics, solution triples, integrals, and charts.

Every stored object is checkable against the residual machinery of the
other modules; `validate_entry` runs those checks and is exercised by the
test suite and the CLI `verify` command.

Parameter conventions: passing None (or omitting a parameter) keeps it
symbolic; exact rationals bind it.  Metric constructions take the two free
integration constants of the two-parameter solution families.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Dict, Mapping, Optional, Sequence, Tuple

from .expr import Expr, Var, as_expr, div, log, mul, neg, power, sqrt, sub
from .metrisability import PsiTriple
from .projective import Metric2D, ODECoeffs

x = Var("x")
y = Var("y")


class CatalogError(KeyError):
    pass


PARAMETER_NAMES: Dict[str, Tuple[str, ...]] = {
    "PI": (),
    "PII": ("alpha",),
    "PIII": ("alpha", "beta", "gamma", "delta"),
    "PIV": ("alpha", "beta"),
    "PV": ("alpha", "beta", "gamma", "delta"),
    "PVI": ("alpha", "beta", "gamma", "delta"),
    "XXXII": (),
    "Dini": (),
    "Flat": (),
}

# sensible numeric defaults for dynamics runs and exports
DEFAULT_PARAMS: Dict[str, Tuple[Fraction, ...]] = {
    "PI": (),
    "PII": (Fraction(1),),
    "PIII": (Fraction(1), Fraction(0), Fraction(1), Fraction(0)),
    "PIV": (Fraction(1), Fraction(1)),
    "PV": (Fraction(1), Fraction(1), Fraction(0), Fraction(0)),
    "PVI": (Fraction(0), Fraction(0), Fraction(0), Fraction(1, 2)),
    "XXXII": (),
    "Dini": (),
    "Flat": (),
}

# (x0, y0, p0), (x_start, x_end) defaults for the dynamics command
DEFAULT_DYNAMICS: Dict[str, Tuple[Tuple[float, float, float], Tuple[float, float]]] = {
    "PI": ((0.0, 1.0, 0.0), (0.0, 3.0)),
    "PII": ((0.0, 1.0, 0.0), (0.0, 3.0)),
    "PIII": ((1.0, 1.0, 0.0), (1.0, 3.0)),
    "PIV": ((0.0, 1.0, 0.0), (0.0, 0.8)),
    "PV": ((1.0, 0.5, 0.0), (1.0, 2.5)),
    "PVI": ((2.0, 0.5, 0.1), (2.0, 3.0)),
    "XXXII": ((0.0, 1.0, 0.0), (0.0, 2.0)),
    "Dini": ((2.0, 0.5, 0.0), (2.0, 3.0)),
    "Flat": ((0.0, 0.0, 1.0), (0.0, 1.0)),
}


def names() -> Tuple[str, ...]:
    return tuple(PARAMETER_NAMES)


def _bind(name: str, params: Optional[Mapping[str, object]]) -> Dict[str, Expr]:
    """Resolve the entry's parameters to expressions (Var when symbolic)."""
    wanted = PARAMETER_NAMES[name]
    params = dict(params or {})
    unknown = set(params) - set(wanted)
    if unknown:
        raise CatalogError(f"{name} takes parameters {wanted}, not {sorted(unknown)}")
    out: Dict[str, Expr] = {}
    for pname in wanted:
        value = params.get(pname)
        out[pname] = Var(pname) if value is None else as_expr(Fraction(value))
    return out


def get_equation(name: str, params: Optional[Mapping[str, object]] = None) -> ODECoeffs:
    """Coefficient quadruple (A0, A1, A2, A3) of the named equation."""
    if name not in PARAMETER_NAMES:
        raise CatalogError(f"unknown equation {name!r}")
    pr = _bind(name, params)
    zero = as_expr(0)
    if name == "PI":
        return ODECoeffs(a0=6 * y**2 + x, a1=zero, a2=zero, a3=zero)
    if name == "PII":
        return ODECoeffs(a0=2 * y**3 + x * y + pr["alpha"], a1=zero, a2=zero, a3=zero)
    if name == "PIII":
        al, be, ga, de = (pr[k] for k in ("alpha", "beta", "gamma", "delta"))
        a0 = al * y**2 / x + be / x + ga * y**3 + de / y
        return ODECoeffs(a0=a0, a1=neg(div(1, x)), a2=div(1, y), a3=zero)
    if name == "PIV":
        al, be = pr["alpha"], pr["beta"]
        a0 = as_expr(Fraction(3, 2)) * y**3 + 4 * x * y**2 + 2 * (x**2 - al) * y + be / y
        return ODECoeffs(a0=a0, a1=zero, a2=div(1, 2 * y), a3=zero)
    if name == "PV":
        al, be, ga, de = (pr[k] for k in ("alpha", "beta", "gamma", "delta"))
        a0 = (y - 1) ** 2 * (al * y + be / y) / x**2 + ga * y / x + de * y * (y + 1) / (y - 1)
        a2 = div(1, 2 * y) + div(1, y - 1)
        return ODECoeffs(a0=a0, a1=neg(div(1, x)), a2=a2, a3=zero)
    if name == "PVI":
        al, be, ga, de = (pr[k] for k in ("alpha", "beta", "gamma", "delta"))
        bracket = al + be * x / y**2 + ga * (x - 1) / (y - 1) ** 2 + de * x * (x - 1) / (y - x) ** 2
        a0 = y * (y - 1) * (y - x) / (x**2 * (x - 1) ** 2) * bracket
        a1 = neg(div(1, x) + div(1, x - 1) + div(1, y - x))
        a2 = as_expr(Fraction(1, 2)) * (div(1, y) + div(1, y - 1) + div(1, y - x))
        return ODECoeffs(a0=a0, a1=a1, a2=a2, a3=zero)
    if name == "XXXII":
        return ODECoeffs(a0=div(1, 2 * y), a1=zero, a2=div(1, 2 * y), a3=zero)
    if name == "Dini":
        return dini_equation()
    if name == "Flat":
        return ODECoeffs(a0=zero, a1=zero, a2=zero, a3=zero)
    raise CatalogError(name)


def dini_equation(chart_x: Expr = x, chart_y: Expr = y) -> ODECoeffs:
    """Geodesic equation of the projectively-equivalent pair of metrics
    built from increasing functions X(x), Y(y)."""
    from .expr import diff

    big_x, big_y = chart_x, chart_y
    dx_ = diff(big_x, "x")
    dy_ = diff(big_y, "y")
    den = 2 * (big_x - big_y)
    return ODECoeffs(
        a0=neg(div(dy_, den)),
        a1=neg(div(dx_, den)),
        a2=neg(div(dy_, den)),
        a3=neg(div(dx_, den)),
    )


# -- degenerate solutions ------------------------------------------------------


def get_degenerate_psi(name: str) -> Expr:
    """The one-dimensional family of solutions with psi2 = psi3 = 0, up to a
    multiplicative constant."""
    third2 = Fraction(2, 3)
    third4 = Fraction(4, 3)
    table = {
        "PI": as_expr(1),
        "PII": as_expr(1),
        "PIII": mul(power(y, third4), power(x, -third2)),
        "PIV": power(y, third2),
        "PV": mul(power(1 - y, third4), power(y, third2), power(x, -third2)),
        # the ratio must sit under a single fractional power: its factors are
        # separately negative on the real chart 0 < y < x < 1
        "PVI": mul(
            power(x - y, third2),
            power(div((y - 1) * y, (x - 1) * x), third2),
        ),
        "XXXII": power(y, third2),
    }
    if name not in table:
        raise CatalogError(f"no degenerate solution stored for {name!r}")
    return table[name]


# -- metrics and solution triples ---------------------------------------------


@dataclass(frozen=True)
class MetricData:
    metric: Metric2D
    psi: PsiTriple
    killing: Optional[Tuple[Expr, Expr]]  # vector components (K1, K2)
    coeffs: ODECoeffs  # the equation this metric's geodesics satisfy


def get_metric(
    name: str,
    constants: Tuple[object, object] = (Fraction(1), Fraction(2)),
    params: Optional[Mapping[str, object]] = None,
    check: bool = False,
) -> MetricData:
    """The stored metric and its solution triple for a metrisable entry.

    `constants` are the two free constants of the solution family.  PIII is
    stored in its beta = delta = 0 branch, PV in gamma = delta = 0.
    """
    ca, cb = as_expr(Fraction(constants[0])), as_expr(Fraction(constants[1]))
    third = Fraction(1, 3)
    data: MetricData
    if name == "PIII":
        pr = _bind(name, params)
        al, ga = pr["alpha"], pr["gamma"]
        for fixed in ("beta", "delta"):
            supplied = (params or {}).get(fixed)
            if supplied is not None and Fraction(supplied) != 0:
                raise CatalogError("the stored PIII metric needs beta = delta = 0")
        s = ca - cb + 2 * ca * al * x * y + ca * ga * x**2 * y**2
        omega = div(1, ca * s**2)
        bulk = cb - 2 * ca * al * x * y - ca * ga * x**2 * y**2
        metric = Metric2D(
            E=omega * bulk / (ca * x**2),
            F=omega / (x * y),
            G=omega / y**2,
        )
        psi = PsiTriple(
            psi1=bulk * power(y, 4 * third) * power(x, -2 * third),
            psi2=ca * power(x, third) * power(y, third),
            psi3=ca * power(x, 4 * third) * power(y, -2 * third),
        )
        kset = {"beta": Fraction(0), "delta": Fraction(0)}
        kset.update({k: v for k, v in (params or {}).items() if v is not None})
        coeffs = get_equation("PIII", kset)
        data = MetricData(metric, psi, (x, neg(y)), coeffs)
    elif name == "PV":
        pr = _bind(name, params)
        al, be = pr["alpha"], pr["beta"]
        for fixed in ("gamma", "delta"):
            supplied = (params or {}).get(fixed)
            if supplied is not None and Fraction(supplied) != 0:
                raise CatalogError("the stored PV metric needs gamma = delta = 0")
        t = cb * y + 2 * ca * (be - al * y**2)
        metric = Metric2D(
            E=y / (ca**2 * x**2 * t),
            F=as_expr(0),
            G=y / (ca * (y - 1) ** 2 * t**2),
        )
        psi = PsiTriple(
            psi1=power(1 - y, 4 * third) * t * power(x, -2 * third) * power(y, -third),
            psi2=as_expr(0),
            psi3=ca * power(x, 4 * third) * power(y, -third) * power(1 - y, -2 * third),
        )
        kset = {"gamma": Fraction(0), "delta": Fraction(0)}
        kset.update({k: v for k, v in (params or {}).items() if v is not None})
        coeffs = get_equation("PV", kset)
        data = MetricData(metric, psi, (x, as_expr(0)), coeffs)
    elif name == "XXXII":
        metric = Metric2D(E=y, F=as_expr(0), G=y)
        psi = PsiTriple(psi1=power(y, -third), psi2=as_expr(0), psi3=power(y, -third))
        data = MetricData(metric, psi, None, get_equation("XXXII"))
    elif name == "Dini":
        metric = Metric2D(E=x - y, F=as_expr(0), G=x - y)
        psi = PsiTriple(
            psi1=power(x - y, -third), psi2=as_expr(0), psi3=power(x - y, -third)
        )
        data = MetricData(metric, psi, None, get_equation("Dini"))
    elif name == "Flat":
        metric = Metric2D(E=as_expr(1), F=as_expr(0), G=as_expr(1))
        psi = PsiTriple(psi1=as_expr(1), psi2=as_expr(0), psi3=as_expr(1))
        data = MetricData(metric, psi, (as_expr(1), as_expr(0)), get_equation("Flat"))
    else:
        raise CatalogError(f"no metric stored for {name!r}")
    if check:
        _check_metric_data(data)
    return data


def dini_second_metric() -> MetricData:
    """The partner metric of the Dini pair (X = x, Y = y chart)."""
    third = Fraction(1, 3)
    metric = Metric2D(
        E=(div(1, y) - div(1, x)) / x,
        F=as_expr(0),
        G=(div(1, y) - div(1, x)) / y,
    )
    psi = PsiTriple(
        psi1=y * power(x - y, -third),
        psi2=as_expr(0),
        psi3=x * power(x - y, -third),
    )
    return MetricData(metric, psi, None, get_equation("Dini"))


def xxxii_solution_family(f0, f1, c, m) -> PsiTriple:
    """General solution of the metrisability system for XXXII with
    f(x) = c/2 x^2 + f1 x + f0."""
    third = Fraction(1, 3)
    f0, f1, c, m = (as_expr(Fraction(v)) for v in (f0, f1, c, m))
    f = mul(c, power(x, 2)) / 2 + f1 * x + f0
    fp = c * x + f1
    return PsiTriple(
        psi1=f * power(y, -third) + m * power(y, 2 * third) + 2 * c * power(y, 5 * third),
        psi2=neg(fp * power(y, 2 * third)),
        psi3=f * power(y, -third),
    )


def _check_metric_data(data: MetricData) -> None:
    from .metrisability import liouville_residuals
    from .zerotest import all_zero

    residuals = liouville_residuals(data.coeffs, data.psi)
    if not all_zero(residuals):
        raise CatalogError("stored solution triple fails the metrisability equations")


# -- first integrals ------------------------------------------------------------


def get_integrals(name: str, params: Optional[Mapping[str, object]] = None) -> Tuple[Expr, ...]:
    """Closed-form first integrals stored for the entry, as expressions in
    (x, y, p)."""
    p = Var("p")
    if name == "PIII":
        pr = _bind(name, params)
        al, ga = pr["alpha"], pr["gamma"]
        return (x**2 * p**2 / y**2 + 2 * x * p / y - 2 * al * x * y - ga * x**2 * y**2,)
    if name == "PV":
        pr = _bind(name, params)
        al, be = pr["alpha"], pr["beta"]
        return (div(1, y) * power(x * p / (y - 1), 2) + 2 * be / y - 2 * al * y,)
    if name == "XXXII":
        i1 = (1 + p**2) / y
        i2 = 2 * p - (x / y) * (1 + p**2)
        return (i1, i2)
    if name == "Dini":
        return ((y + x * p**2) / (1 + p**2),)
    if name == "Flat":
        return (1 + p**2,)  # from the Killing vector d/dx of dx^2 + dy^2
    return ()


def get_flat_chart(name: str) -> Tuple[Expr, Expr]:
    """(X, Y) maps straightening the flat cases to Y'' = 0."""
    if name == "PIII":
        # flat solutions are y = C x^k, lines in (log x, log y)
        return log(x), log(y)
    if name == "PV":
        return log(x), log((1 + sqrt(y)) / sqrt(1 - y))
    if name == "Flat":
        return x, y
    raise CatalogError(f"no closed-form flat chart stored for {name!r}")


# -- expected classification -----------------------------------------------------


@dataclass(frozen=True)
class Expectation:
    verdict: str
    mobility: Optional[int]


def expected_results(name: str, params: Optional[Mapping[str, object]] = None) -> Expectation:
    """The classification the analysis should reproduce, parameterised the
    same way as get_equation.  Symbolic (unbound) parameters are treated as
    generic nonzero values."""
    wanted = PARAMETER_NAMES[name]
    values: Dict[str, Optional[Fraction]] = {}
    for pname in wanted:
        raw = (params or {}).get(pname)
        values[pname] = None if raw is None else Fraction(raw)

    def is_zero_param(pname: str) -> bool:
        return values[pname] == 0

    if name in ("PI", "PII", "PIV"):
        return Expectation("NotMetrisable", 1)
    if name == "PIII":
        if all(is_zero_param(k) for k in wanted):
            return Expectation("FlatMetrisable", 6)
        if (is_zero_param("alpha") and is_zero_param("gamma")) or (
            is_zero_param("beta") and is_zero_param("delta")
        ):
            return Expectation("Metrisable", 2)
        return Expectation("NotMetrisable", 1)
    if name == "PV":
        if all(is_zero_param(k) for k in wanted):
            return Expectation("FlatMetrisable", 6)
        if is_zero_param("gamma") and is_zero_param("delta"):
            return Expectation("Metrisable", 2)
        return Expectation("NotMetrisable", 1)
    if name == "PVI":
        if (
            is_zero_param("alpha")
            and is_zero_param("beta")
            and is_zero_param("gamma")
            and values["delta"] == Fraction(1, 2)
        ):
            return Expectation("FlatMetrisable", 6)
        return Expectation("NotMetrisable", 1)
    if name == "XXXII":
        return Expectation("Metrisable", 4)
    if name == "Dini":
        return Expectation("Metrisable", None)  # mobility > 1; exact value not pinned
    if name == "Flat":
        return Expectation("FlatMetrisable", 6)
    raise CatalogError(name)


def bind_params(name: str, values: Sequence[object]) -> Dict[str, Fraction]:
    wanted = PARAMETER_NAMES[name]
    if len(values) != len(wanted):
        raise CatalogError(f"{name} takes {len(wanted)} parameters, got {len(values)}")
    return {k: Fraction(v) for k, v in zip(wanted, values)}
