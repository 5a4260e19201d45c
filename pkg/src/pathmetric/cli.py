"""Command-line front end.

Subcommands: analyze, verify, dynamics, coalesce, catalog list,
catalog export.  Exit codes: 0 analysis completed (whatever the verdict),
1 verification failure, 2 parse/usage error, 3 inconclusive.

Input files are UTF-8 key = value text with [parameters], [coefficients]
and [options] sections; expression values use the library grammar and may
be double-quoted.  All command-line parameters are exact rationals (p/q or
decimal/scientific literals, converted exactly).
"""

from __future__ import annotations

import argparse
import configparser
import json
import sys
import time
from dataclasses import asdict, dataclass, field
from decimal import Decimal, InvalidOperation
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from . import catalog
from .expr import ParseError, SymbolTable, parse_expr, to_text
from .metrisability import (
    DEFAULT_MAX_ORDER,
    DEFAULT_WINDOW,
    degenerate_condition,
    liouville_residuals,
    metrisability_verdict,
    verify_degenerate_psi,
)
from .projective import ODECoeffs, connection_to_coeffs, levi_civita
from .zerotest import InconclusiveZeroTest, ZeroTestConfig, is_zero

EXIT_OK = 0
EXIT_VERIFICATION_FAILED = 1
EXIT_PARSE_ERROR = 2
EXIT_INCONCLUSIVE = 3


class UsageError(Exception):
    pass


def parse_rational(text: str) -> Fraction:
    """Exact rational from 'p/q', integer, decimal, or scientific notation."""
    text = text.strip()
    try:
        if "/" in text:
            num, den = text.split("/")
            return Fraction(int(num), int(den))
        return Fraction(Decimal(text))
    except (ValueError, ZeroDivisionError, InvalidOperation) as exc:
        raise UsageError(f"not an exact rational: {text!r}") from exc


def parse_param_list(text: Optional[str]) -> Dict[str, Fraction]:
    out: Dict[str, Fraction] = {}
    if not text:
        return out
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise UsageError(f"expected name=value, got {item!r}")
        name, value = item.split("=", 1)
        out[name.strip()] = parse_rational(value)
    return out


def parse_number_list(text: str, expected: Optional[int] = None) -> List[Fraction]:
    parts = [p for p in (s.strip() for s in text.split(",")) if p]
    values = [parse_rational(p) for p in parts]
    if expected is not None and len(values) != expected:
        raise UsageError(f"expected {expected} comma-separated values in {text!r}")
    return values


# -- ODE input files ------------------------------------------------------------


@dataclass
class OdeInput:
    label: str
    coeffs: ODECoeffs
    parameters: Dict[str, Fraction]
    base: Optional[Tuple[Fraction, Fraction]] = None
    max_order: Optional[int] = None
    seed: Optional[int] = None
    tol_abs: Optional[float] = None
    tol_rel: Optional[float] = None


def _unquote(value: str) -> str:
    value = value.strip()
    if len(value) >= 2 and value[0] == value[-1] and value[0] in "\"'":
        return value[1:-1]
    return value


def load_ode_file(path: str) -> OdeInput:
    cp = configparser.ConfigParser(interpolation=None)
    cp.optionxform = str
    try:
        with open(path, encoding="utf-8") as fh:
            cp.read_file(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except configparser.Error as exc:
        raise UsageError(f"malformed input file: {exc}") from exc

    if cp.has_section("variables"):
        indep = _unquote(cp.get("variables", "independent", fallback="x"))
        dep = _unquote(cp.get("variables", "dependent", fallback="y"))
        if (indep, dep) != ("x", "y"):
            raise UsageError("variables are fixed to independent=x, dependent=y")

    parameters: Dict[str, Fraction] = {}
    if cp.has_section("parameters"):
        for name, value in cp.items("parameters"):
            parameters[name] = parse_rational(_unquote(value))

    if not cp.has_section("coefficients"):
        raise UsageError("missing [coefficients] section")
    symbols = SymbolTable(variables=("x", "y"), parameters=tuple(parameters))
    exprs = {}
    for key in ("A0", "A1", "A2", "A3"):
        if not cp.has_option("coefficients", key):
            raise UsageError(f"missing coefficient {key}")
        text = _unquote(cp.get("coefficients", key))
        try:
            tree = parse_expr(text, symbols)
        except ParseError as exc:
            raise UsageError(f"{key}: {exc}") from exc
        if parameters:
            from .expr import subst

            tree = subst(tree, {n: v for n, v in parameters.items()})
        exprs[key] = tree

    out = OdeInput(
        label=path,
        coeffs=ODECoeffs(a0=exprs["A0"], a1=exprs["A1"], a2=exprs["A2"], a3=exprs["A3"]),
        parameters=parameters,
    )
    if cp.has_section("options"):
        if cp.has_option("options", "base"):
            vals = parse_number_list(_unquote(cp.get("options", "base")), 2)
            out.base = (vals[0], vals[1])
        if cp.has_option("options", "max_order"):
            out.max_order = int(_unquote(cp.get("options", "max_order")))
        if cp.has_option("options", "seed"):
            out.seed = int(_unquote(cp.get("options", "seed")))
        if cp.has_option("options", "tol_abs"):
            out.tol_abs = float(_unquote(cp.get("options", "tol_abs")))
        if cp.has_option("options", "tol_rel"):
            out.tol_rel = float(_unquote(cp.get("options", "tol_rel")))
    return out


def export_ode_text(name: str, params: Dict[str, Fraction]) -> str:
    """Render a catalog entry in the input-file format (round-trips through
    load_ode_file)."""
    bound = catalog.bind_params(name, [params[p] for p in catalog.PARAMETER_NAMES[name]])
    coeffs = catalog.get_equation(name, bound)
    lines = [
        f"# {name} exported from the built-in catalog",
        "[variables]",
        "independent = x",
        "dependent = y",
        "",
        "[parameters]",
    ]
    for pname, value in bound.items():
        lines.append(f"{pname} = {value}")
    lines += ["", "[coefficients]"]
    for key, expr in zip(("A0", "A1", "A2", "A3"), coeffs.as_tuple()):
        lines.append(f'{key} = "{to_text(expr)}"')
    lines += ["", "[options]", "max_order = 10", "seed = 0", ""]
    return "\n".join(lines)


# -- reports ---------------------------------------------------------------------


@dataclass
class Report:
    command: str
    input: Dict[str, object]
    seed: int = 0
    verdict: Optional[str] = None
    flatness: Optional[Dict[str, object]] = None
    degenerate_condition: Optional[Dict[str, object]] = None
    mobility: Optional[Dict[str, object]] = None
    metric: Optional[Dict[str, object]] = None
    checks: List[Dict[str, object]] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2, sort_keys=True, default=str)

    @classmethod
    def from_json(cls, text: str) -> "Report":
        data = json.loads(text)
        return cls(**data)

    def content_equal(self, other: "Report") -> bool:
        a, b = asdict(self), asdict(other)
        a.pop("timings"), b.pop("timings")
        return json.loads(json.dumps(a, default=str)) == json.loads(json.dumps(b, default=str))

    def human(self) -> str:
        lines = [f"== {self.command} :: {self.input.get('name', self.input.get('file', ''))}"]
        if self.input.get("params"):
            lines.append(f"   parameters: {self.input['params']}")
        if self.verdict is not None:
            lines.append(f"   verdict: {self.verdict}")
        if self.flatness:
            lines.append(
                f"   flatness: L1 zero={self.flatness['L1']['is_zero']} ({self.flatness['L1']['tier']}), "
                f"L2 zero={self.flatness['L2']['is_zero']} ({self.flatness['L2']['tier']})"
            )
        if self.degenerate_condition:
            dc = self.degenerate_condition
            lines.append(f"   degenerate condition dA1/dy = 2 dA2/dx: {dc['is_zero']} ({dc['tier']})")
        if self.mobility:
            mo = self.mobility
            lines.append(
                f"   mobility: base={mo['base']} orders={mo['orders']} dims={mo['dims']} m={mo['m']}"
            )
            lines.append(
                f"             nondegenerate={mo['nondegenerate_exists']} "
                f"degenerate_subspace_dim={mo['degenerate_subspace_dim']}"
            )
        if self.metric:
            lines.append(f"   metric: E = {self.metric['E']}")
            lines.append(f"           F = {self.metric['F']}")
            lines.append(f"           G = {self.metric['G']}")
        for chk in self.checks:
            status = "pass" if chk["passed"] else "FAIL"
            detail = chk.get("detail", "")
            lines.append(f"   [{status}] {chk['name']}  {detail}")
        for note in self.notes:
            lines.append(f"   note: {note}")
        if self.timings:
            total = sum(self.timings.values())
            lines.append(f"   time: {total:.2f}s " + str({k: round(v, 3) for k, v in self.timings.items()}))
        return "\n".join(lines)


def _verdict_dict(v) -> Dict[str, object]:
    return {
        "is_zero": v.is_zero,
        "tier": v.tier,
        "n_samples": v.n_samples,
        "precision_bits": v.precision_bits,
    }


def _emit(report: Report, as_json: bool) -> None:
    print(report.to_json() if as_json else report.human())


# -- analyze ----------------------------------------------------------------------


def _resolve_input(args) -> Tuple[ODECoeffs, Dict[str, object], Optional[Tuple[Fraction, Fraction]], int, int]:
    """Returns (coeffs, input-echo, base, max_order, seed)."""
    base = None
    max_order = args.max_order or DEFAULT_MAX_ORDER
    seed = args.seed or 0
    if getattr(args, "catalog", None):
        name = args.catalog
        if name not in catalog.PARAMETER_NAMES:
            raise UsageError(f"unknown catalog entry {name!r}; see `catalog list`")
        params = parse_param_list(getattr(args, "params", None))
        wanted = catalog.PARAMETER_NAMES[name]
        missing = [p for p in wanted if p not in params]
        if missing:
            defaults = dict(zip(wanted, catalog.DEFAULT_PARAMS[name]))
            for p in missing:
                params[p] = defaults[p]
        coeffs = catalog.get_equation(name, params)
        echo = {"name": name, "params": {k: str(v) for k, v in params.items()}}
    elif getattr(args, "file", None):
        loaded = load_ode_file(args.file)
        coeffs = loaded.coeffs
        echo = {
            "file": args.file,
            "params": {k: str(v) for k, v in loaded.parameters.items()},
        }
        base = loaded.base
        if loaded.max_order and not args.max_order:
            max_order = loaded.max_order
        if loaded.seed is not None and not args.seed:
            seed = loaded.seed
    else:
        raise UsageError("provide an input file or --catalog NAME")
    if getattr(args, "base", None):
        vals = parse_number_list(args.base, 2)
        base = (vals[0], vals[1])
    return coeffs, echo, base, max_order, seed


def cmd_analyze(args) -> int:
    coeffs, echo, base, max_order, seed = _resolve_input(args)
    config = ZeroTestConfig(seed=seed)
    report = Report(command="analyze", input=echo, seed=seed)
    t0 = time.perf_counter()
    try:
        dc = degenerate_condition(coeffs, config)
        report.degenerate_condition = _verdict_dict(dc)
    except InconclusiveZeroTest as exc:
        report.notes.append(f"degenerate condition inconclusive: {exc}")
    report.timings["degenerate_condition"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    result = metrisability_verdict(coeffs, base=base, max_order=max_order, config=config)
    report.timings["mobility_and_verdict"] = time.perf_counter() - t0
    report.verdict = result.verdict
    if result.flat_l1 is not None:
        report.flatness = {"L1": _verdict_dict(result.flat_l1), "L2": _verdict_dict(result.flat_l2)}
    rep = result.report
    report.mobility = {
        "base": [str(rep.base[0]), str(rep.base[1])],
        "orders": list(rep.orders),
        "dims": list(rep.dims),
        "m": rep.m,
        "nondegenerate_exists": result.nondegenerate,
        "degenerate_subspace_dim": rep.degenerate_subspace_dim,
    }
    report.notes.extend(result.notes)
    _emit(report, args.json)
    if result.verdict == "Inconclusive":
        return EXIT_INCONCLUSIVE
    return EXIT_OK


# -- verify ------------------------------------------------------------------------


def _add_check(report: Report, name: str, passed: bool, detail: str = "") -> None:
    report.checks.append({"name": name, "passed": bool(passed), "detail": detail})


def cmd_verify(args) -> int:
    name = args.name
    if name not in catalog.PARAMETER_NAMES:
        raise UsageError(f"unknown catalog entry {name!r}")
    seed = args.seed or 0
    config = ZeroTestConfig(seed=seed)
    params = parse_param_list(args.params) or None
    constants = (
        tuple(parse_number_list(args.constants, 2)) if args.constants else (Fraction(1), Fraction(2))
    )
    report = Report(command="verify", input={"name": name, "params": {}}, seed=seed)
    t0 = time.perf_counter()

    coeffs = catalog.get_equation(name, params)

    # degenerate branch artifacts
    try:
        psi1 = catalog.get_degenerate_psi(name)
    except catalog.CatalogError:
        psi1 = None
    if psi1 is not None:
        dc = degenerate_condition(coeffs, config)
        _add_check(report, "degenerate-condition", dc.is_zero, f"tier={dc.tier}")
        r1, r2 = verify_degenerate_psi(coeffs, psi1, config)
        _add_check(
            report,
            "degenerate-psi1-residuals",
            r1.is_zero and r2.is_zero,
            f"tiers={r1.tier},{r2.tier}",
        )

    # stored metric artifacts
    try:
        branch_params = _metric_branch_params(name, params)
        md = catalog.get_metric(name, constants=constants, params=branch_params)
    except catalog.CatalogError:
        md = None
    if md is not None:
        report.metric = {
            "E": to_text(md.metric.E),
            "F": to_text(md.metric.F),
            "G": to_text(md.metric.G),
            "constants": [str(constants[0]), str(constants[1])],
        }
        residuals = liouville_residuals(md.coeffs, md.psi)
        verdicts = [is_zero(r, config) for r in residuals]
        _add_check(
            report,
            "psi-triple-residuals",
            all(v.is_zero for v in verdicts),
            "tiers=" + ",".join(v.tier for v in verdicts),
        )
        back = connection_to_coeffs(levi_civita(md.metric, check_nondegenerate=False))
        consistency = [is_zero(a - b, config) for a, b in zip(back.as_tuple(), md.coeffs.as_tuple())]
        _add_check(
            report,
            "metric-reproduces-equation",
            all(v.is_zero for v in consistency),
            "tiers=" + ",".join(v.tier for v in consistency),
        )
        if md.killing is not None:
            from .integrals import VectorField, killing_residual

            kres = killing_residual(md.metric, VectorField(*md.killing))
            kv = [is_zero(r, config, force_probabilistic=True) for r in kres]
            _add_check(report, "killing-vector", all(v.is_zero for v in kv), "tier=probabilistic")

    # stored first integrals
    from .integrals import FirstIntegral, KIND_RATIONAL_IN_P, conservation_residual

    integrals = catalog.get_integrals(name, params)
    int_coeffs = md.coeffs if md is not None else coeffs
    for idx, value in enumerate(integrals, start=1):
        res = conservation_residual(int_coeffs, FirstIntegral(KIND_RATIONAL_IN_P, value=value))
        v = is_zero(res, config)
        _add_check(report, f"first-integral-{idx}-conserved", v.is_zero, f"tier={v.tier}")

    report.timings["verify"] = time.perf_counter() - t0
    _emit(report, args.json)
    return EXIT_OK if all(c["passed"] for c in report.checks) else EXIT_VERIFICATION_FAILED


def _metric_branch_params(name: str, params):
    """Parameters passed to get_metric: the stored branches pin some of them
    to zero."""
    if params is None:
        if name == "PIII":
            return dict(alpha=None, beta=0, gamma=None, delta=0)
        if name == "PV":
            return dict(alpha=None, beta=None, gamma=0, delta=0)
        return None
    return params


# -- dynamics ------------------------------------------------------------------------


def cmd_dynamics(args) -> int:
    from .dynamics import flat_chart_check, integrate_ode, monitor_integral, compare_with_geodesic
    from .integrals import (
        FirstIntegral,
        KIND_RATIONAL_IN_P,
        picard_fuchs_solve,
        pvi_first_integral,
        pvi_flat_chart,
    )

    name = args.name
    if name not in catalog.PARAMETER_NAMES:
        raise UsageError(f"unknown catalog entry {name!r}")
    wanted = catalog.PARAMETER_NAMES[name]
    params = parse_param_list(args.params)
    for pname, default in zip(wanted, catalog.DEFAULT_PARAMS[name]):
        params.setdefault(pname, default)
    init_default, span_default = catalog.DEFAULT_DYNAMICS[name]
    init = tuple(float(v) for v in parse_number_list(args.init, 3)) if args.init else init_default
    span = tuple(float(v) for v in parse_number_list(args.span, 2)) if args.span else span_default
    tol_abs = args.tol_abs or 1e-12
    tol_rel = args.tol_rel or 1e-10

    report = Report(
        command="dynamics",
        input={
            "name": name,
            "params": {k: str(v) for k, v in params.items()},
            "init": list(init),
            "span": list(span),
        },
        seed=args.seed or 0,
    )
    t0 = time.perf_counter()
    coeffs = catalog.get_equation(name, params)
    traj = integrate_ode(coeffs, init, span, tol_abs=tol_abs, tol_rel=tol_rel)
    report.notes.append(f"termination: {traj.termination}" + (f" at x = {traj.x_stop:.6g}" if traj.x_stop else ""))
    failed = False

    drift_tol = 1e-8
    for idx, value in enumerate(catalog.get_integrals(name, params), start=1):
        try:
            drift = monitor_integral(traj, FirstIntegral(KIND_RATIONAL_IN_P, value=value)).drift
        except ValueError as exc:
            _add_check(report, f"integral-{idx}-drift", False, str(exc))
            failed = True
            continue
        ok = drift < drift_tol or traj.termination != "completed"
        _add_check(report, f"integral-{idx}-drift", ok, f"drift={drift:.3e} tol={drift_tol}")
        failed = failed or not ok

    if name == "PVI" and all(
        params[k] == 0 for k in ("alpha", "beta", "gamma")
    ) and params["delta"] == Fraction(1, 2):
        pf = picard_fuchs_solve((1.05, max(span) + 1.0), anchor=min(span))
        drift = monitor_integral(traj, pvi_first_integral(pf), n=60).drift
        ok = drift < 1e-6
        _add_check(report, "pvi-linear-integral-drift", ok, f"drift={drift:.3e} tol=1e-06")
        failed = failed or not ok
        chx, chy = pvi_flat_chart(pf)
        residual = flat_chart_check(traj, chx, chy, n=60)
        ok = residual < 1e-6
        _add_check(report, "flat-chart-residual", ok, f"residual={residual:.3e} tol=1e-06")
        failed = failed or not ok
    else:
        try:
            chart = catalog.get_flat_chart(name)
        except catalog.CatalogError:
            chart = None
        if chart is not None and all(v == 0 for v in params.values()):
            residual = flat_chart_check(traj, *chart)
            ok = residual < 1e-6
            _add_check(report, "flat-chart-residual", ok, f"residual={residual:.3e} tol=1e-06")
            failed = failed or not ok

    try:
        md = catalog.get_metric(name, params=_metric_branch_params(name, params))
    except catalog.CatalogError:
        md = None
    if md is not None and traj.termination == "completed":
        dev = compare_with_geodesic(coeffs, md.metric, init, span, tol_rel=1e-11)
        ok = dev < 1e-6
        _add_check(report, "geodesic-agreement", ok, f"max|dy|={dev:.3e} tol=1e-06")
        failed = failed or not ok

    report.timings["dynamics"] = time.perf_counter() - t0
    _emit(report, args.json)
    return EXIT_VERIFICATION_FAILED if failed else EXIT_OK


# -- coalesce ------------------------------------------------------------------------


def cmd_coalesce(args) -> int:
    from .dynamics import coalescence_check

    alpha = parse_rational(args.alpha)
    gamma = parse_rational(args.gamma)
    eps = parse_number_list(args.eps)
    if len(eps) < 2:
        raise UsageError("need at least two eps values")
    if any(e2 >= e1 for e1, e2 in zip(eps, eps[1:])):
        raise UsageError("eps list must be strictly decreasing")
    kwargs = {}
    if args.a3:
        kwargs["a3"] = parse_rational(args.a3)
    if args.b3:
        kwargs["b3"] = parse_rational(args.b3)
    report = Report(
        command="coalesce",
        input={"name": "PV->PIII", "alpha": str(alpha), "gamma": str(gamma), "eps": [str(e) for e in eps]},
        seed=args.seed or 0,
    )
    t0 = time.perf_counter()
    result = coalescence_check(alpha, gamma, eps, **kwargs)
    report.timings["coalesce"] = time.perf_counter() - t0
    for e, err in zip(result.eps, result.errors):
        _add_check(report, f"eps={e}", True, f"max-component-error={err:.6e}")
    _add_check(
        report,
        "errors-decrease-monotonically",
        result.converged,
        "ratios=" + ",".join(f"{r:.2f}" for r in result.ratios),
    )
    _emit(report, args.json)
    return EXIT_OK if result.converged else EXIT_VERIFICATION_FAILED


# -- catalog -------------------------------------------------------------------------


def cmd_catalog_list(args) -> int:
    rows = []
    for name in catalog.names():
        expected = catalog.expected_results(name, dict(zip(catalog.PARAMETER_NAMES[name], catalog.DEFAULT_PARAMS[name])))
        rows.append(
            {
                "name": name,
                "parameters": list(catalog.PARAMETER_NAMES[name]),
                "default_params": [str(v) for v in catalog.DEFAULT_PARAMS[name]],
                "expected_verdict_at_defaults": expected.verdict,
                "expected_mobility_at_defaults": expected.mobility,
            }
        )
    if args.json:
        print(json.dumps(rows, indent=2))
    else:
        for row in rows:
            print(
                f"{row['name']:<7} params={','.join(row['parameters']) or '-':<30} "
                f"defaults={','.join(row['default_params']) or '-':<12} "
                f"expected={row['expected_verdict_at_defaults']} (m={row['expected_mobility_at_defaults']})"
            )
    return EXIT_OK


def cmd_catalog_export(args) -> int:
    name = args.name
    if name not in catalog.PARAMETER_NAMES:
        raise UsageError(f"unknown catalog entry {name!r}")
    params = parse_param_list(args.params)
    for pname, default in zip(catalog.PARAMETER_NAMES[name], catalog.DEFAULT_PARAMS[name]):
        params.setdefault(pname, default)
    text = export_ode_text(name, params)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="")
    return EXIT_OK


# -- entry point -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathmetric",
        description="Metrisability analysis of second-order ODE path geometries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="probabilistic zero-test seed")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    pa = sub.add_parser("analyze", parents=[common], help="classify an equation")
    pa.add_argument("file", nargs="?", help="ODE input file")
    pa.add_argument("--catalog", help="built-in equation name")
    pa.add_argument("--params", help="comma list name=p/q")
    pa.add_argument("--base", help="base point x0,y0")
    pa.add_argument("--max-order", type=int, dest="max_order")
    pa.add_argument("--tol-abs", type=float, dest="tol_abs")
    pa.add_argument("--tol-rel", type=float, dest="tol_rel")
    pa.set_defaults(fn=cmd_analyze)

    pv = sub.add_parser("verify", parents=[common], help="re-check stored catalog artifacts")
    pv.add_argument("name")
    pv.add_argument("--params", help="comma list name=p/q")
    pv.add_argument("--constants", help="solution-family constants A,B")
    pv.set_defaults(fn=cmd_verify)

    pd = sub.add_parser("dynamics", parents=[common], help="numeric trajectory checks")
    pd.add_argument("name")
    pd.add_argument("--params", help="comma list name=p/q")
    pd.add_argument("--init", help="x0,y0,p0")
    pd.add_argument("--span", help="x_start,x_end")
    pd.add_argument("--tol-abs", type=float, dest="tol_abs")
    pd.add_argument("--tol-rel", type=float, dest="tol_rel")
    pd.set_defaults(fn=cmd_dynamics)

    pc = sub.add_parser("coalesce", parents=[common], help="degeneration-limit convergence table")
    pc.add_argument("--alpha", required=True)
    pc.add_argument("--gamma", required=True)
    pc.add_argument("--eps", required=True, help="strictly decreasing comma list")
    pc.add_argument("--a3", help="free limit constant (gamma = 0 branch)")
    pc.add_argument("--b3", help="free limit constant (gamma = 0 branch)")
    pc.set_defaults(fn=cmd_coalesce)

    pcat = sub.add_parser("catalog", help="inspect built-in equations")
    csub = pcat.add_subparsers(dest="subcommand", required=True)
    pl = csub.add_parser("list", parents=[common])
    pl.set_defaults(fn=cmd_catalog_list)
    pe = csub.add_parser("export", parents=[common])
    pe.add_argument("name")
    pe.add_argument("--params", help="comma list name=p/q")
    pe.add_argument("--out", help="output path (default stdout)")
    pe.set_defaults(fn=cmd_catalog_export)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors, which matches the parse-error code
        return int(exc.code or 0)
    try:
        return args.fn(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except InconclusiveZeroTest as exc:
        print(f"inconclusive: {exc}", file=sys.stderr)
        return EXIT_INCONCLUSIVE
    except catalog.CatalogError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE_ERROR


if __name__ == "__main__":
    sys.exit(main())
