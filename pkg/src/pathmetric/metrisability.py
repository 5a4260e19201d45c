"""The linear metrisability system and the degree-of-mobility computation.

A path geometry (A0..A3) is metrisable near a point iff the overdetermined
linear system

    d(psi1)/dx               = (2/3) A1 psi1 - 2 A0 psi2
    d(psi3)/dy               = 2 A3 psi2 - (2/3) A2 psi3
    d(psi1)/dy + 2 d(psi2)/dx = (4/3) A2 psi1 - (2/3) A1 psi2 - 2 A0 psi3
    d(psi3)/dx + 2 d(psi2)/dy = 2 A3 psi1 - (4/3) A1 psi3 + (2/3) A2 psi2

admits a solution with Delta = psi1 psi3 - psi2^2 != 0 there; the metric is
then Delta^{-2}(psi1 dx^2 + 2 psi2 dx dy + psi3 dy^2).

The solution-space dimension (degree of mobility) is computed exactly by
truncating the system to Taylor jets at a base point and taking nullspace
dimensions of the resulting rational linear systems, order by order, until
the dimension stabilises.  The system is of finite type (its prolongation
closes up with six unknowns), so for truncation orders >= 2 the dimensions
are non-increasing and reach the true value; orders 0 and 1 sit below the
prolongation closure and are not reported.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

from . import linalg
from .expr import Expr, add, diff, div, free_symbols, mul, neg, power, sub
from .poly import Series2, expand_rational, series_expand
from .projective import Connection, Metric2D, ODECoeffs, covariant_sym_2tensor
from .zerotest import (
    DEFAULT_CONFIG,
    InconclusiveZeroTest,
    ZeroTestConfig,
    ZeroVerdict,
    is_zero,
)

Point = Tuple[Fraction, Fraction]


@dataclass(frozen=True)
class PsiTriple:
    """A (candidate) solution of the metrisability system."""

    psi1: Expr
    psi2: Expr
    psi3: Expr

    @property
    def delta(self) -> Expr:
        return sub(mul(self.psi1, self.psi3), power(self.psi2, 2))

    def quadratic_in_p(self, p: Expr) -> Expr:
        return add(self.psi1, mul(2, self.psi2, p), mul(self.psi3, power(p, 2)))


def liouville_residuals(k: ODECoeffs, s: PsiTriple) -> tuple[Expr, Expr, Expr, Expr]:
    """Left minus right of the four metrisability equations; all zero iff s
    solves the system for k."""
    a0, a1, a2, a3 = k.as_tuple()
    p1, p2, p3 = s.psi1, s.psi2, s.psi3
    r1 = sub(diff(p1, "x"), sub(mul(div(2, 3), a1, p1), mul(2, a0, p2)))
    r2 = sub(diff(p3, "y"), sub(mul(2, a3, p2), mul(div(2, 3), a2, p3)))
    r3 = sub(
        add(diff(p1, "y"), mul(2, diff(p2, "x"))),
        add(mul(div(4, 3), a2, p1), neg(mul(div(2, 3), a1, p2)), neg(mul(2, a0, p3))),
    )
    r4 = sub(
        add(diff(p3, "x"), mul(2, diff(p2, "y"))),
        add(mul(2, a3, p1), neg(mul(div(4, 3), a1, p3)), mul(div(2, 3), a2, p2)),
    )
    return r1, r2, r3, r4


def killing_tensor_residual(
    conn: Connection, s: PsiTriple
) -> tuple[Expr, Expr, Expr, Expr]:
    """Symmetrised covariant derivative of sigma = (psi1, psi2, psi3) with
    respect to the given (representative) connection.

    The four components reproduce the metrisability residuals exactly, which
    is the Killing-tensor reformulation of the system.
    """
    return covariant_sym_2tensor(conn, s.psi1, s.psi2, s.psi3)


def degenerate_condition(k: ODECoeffs, config: ZeroTestConfig = DEFAULT_CONFIG) -> ZeroVerdict:
    """Whether dA1/dy = 2 dA2/dx, i.e. whether a nonvanishing solution with
    psi2 = psi3 = 0 exists."""
    return is_zero(sub(diff(k.a1, "y"), mul(2, diff(k.a2, "x"))), config)


def verify_degenerate_psi(
    k: ODECoeffs, psi1: Expr, config: ZeroTestConfig = DEFAULT_CONFIG
) -> tuple[ZeroVerdict, ZeroVerdict]:
    """Residuals of the closed system for a degenerate solution (psi2 = psi3
    = 0): dx(psi1) = (2/3) A1 psi1 and dy(psi1) = (4/3) A2 psi1.

    Only meaningful when A3 vanishes identically (otherwise the fourth
    equation adds the constraint A3 psi1 = 0)."""
    if not is_zero(k.a3, config).is_zero:
        raise ValueError("degenerate psi1 verification requires A3 = 0")
    r1 = sub(diff(psi1, "x"), mul(div(2, 3), k.a1, psi1))
    r2 = sub(diff(psi1, "y"), mul(div(4, 3), k.a2, psi1))
    return is_zero(r1, config), is_zero(r2, config)


def psi_to_metric(s: PsiTriple, check: bool = True, config: ZeroTestConfig = DEFAULT_CONFIG) -> Metric2D:
    """The metric Delta^{-2}(psi1, psi2, psi3); requires a nondegenerate s."""
    if check and is_zero(s.delta, config).is_zero:
        raise ValueError("degenerate solution: Delta vanishes identically")
    d2 = power(s.delta, 2)
    return Metric2D(E=div(s.psi1, d2), F=div(s.psi2, d2), G=div(s.psi3, d2))


# -- jets -------------------------------------------------------------------


def _monomials(order: int) -> List[Tuple[int, int]]:
    out = []
    for d in range(order + 1):
        for i in range(d, -1, -1):
            out.append((i, d - i))
    return out


@dataclass(frozen=True)
class JetVector:
    """Taylor coefficients of (psi1, psi2, psi3) to a fixed total degree,
    stacked component-major in graded-lex monomial order."""

    base: Point
    order: int
    coeffs: Tuple[Fraction, ...]

    def __post_init__(self):
        expected = 3 * (self.order + 1) * (self.order + 2) // 2
        if len(self.coeffs) != expected:
            raise ValueError(f"jet vector length {len(self.coeffs)}, expected {expected}")

    def component_series(self, component: int) -> Series2:
        monos = _monomials(self.order)
        n = len(monos)
        block = self.coeffs[component * n : (component + 1) * n]
        return Series2(self.order, dict(zip(monos, block)))

    def value_at_base(self, component: int) -> Fraction:
        monos = _monomials(self.order)
        return self.coeffs[component * len(monos)]

    def delta_series(self) -> Series2:
        p1 = self.component_series(0)
        p2 = self.component_series(1)
        p3 = self.component_series(2)
        return p1 * p3 - p2 * p2

    def truncated(self, order: int) -> "JetVector":
        """Forget coefficients above the given total degree."""
        if order > self.order:
            raise ValueError("cannot extend a jet by truncation")
        monos_new = _monomials(order)
        out = []
        for comp in range(3):
            series = self.component_series(comp)
            out.extend(series.coefficient(i, j) for (i, j) in monos_new)
        return JetVector(base=self.base, order=order, coeffs=tuple(out))


@dataclass(frozen=True)
class MobilityReport:
    base: Point
    orders: Tuple[int, ...]
    dims: Tuple[int, ...]
    m: Optional[int]  # None = failed to stabilise (inconclusive)
    kernel: Tuple[JetVector, ...]
    nondegenerate_exists: bool
    degenerate_subspace_dim: int

    @property
    def stabilised(self) -> bool:
        return self.m is not None


DEFAULT_MAX_ORDER = 10
DEFAULT_WINDOW = 3
_MIN_ORDER = 2  # below this the truncations sit under the prolongation closure


def _coefficient_series(k: ODECoeffs, base: Point, order: int) -> List[Series2]:
    out = []
    for a in k.as_tuple():
        extraneous = free_symbols(a) - {"x", "y"}
        if extraneous:
            raise ValueError(
                f"mobility needs numerically bound parameters; free: {sorted(extraneous)}"
            )
        out.append(series_expand(a, base, order))
    return out


def _assemble(a_series: List[Series2], order: int) -> Tuple[List[List[Fraction]], int]:
    """Rows of the truncated system: coefficients (to total degree order-1)
    of the four residuals, linear in the unknown jet."""
    monos = _monomials(order)
    midx = {m: t for t, m in enumerate(monos)}
    nm = len(monos)
    ncols = 3 * nm

    a0, a1, a2, a3 = a_series

    def acc(row, component, series, scalar, r, s):
        for (kk, ll), c in series.coeffs.items():
            if kk <= r and ll <= s:
                row[component * nm + midx[(r - kk, s - ll)]] += scalar * c

    rows: List[List[Fraction]] = []
    for r, s in _monomials(order - 1):
        # d(psi1)/dx - (2/3) A1 psi1 + 2 A0 psi2
        row = [Fraction(0)] * ncols
        row[0 * nm + midx[(r + 1, s)]] += r + 1
        acc(row, 0, a1, Fraction(-2, 3), r, s)
        acc(row, 1, a0, Fraction(2), r, s)
        rows.append(row)
        # d(psi3)/dy - 2 A3 psi2 + (2/3) A2 psi3
        row = [Fraction(0)] * ncols
        row[2 * nm + midx[(r, s + 1)]] += s + 1
        acc(row, 1, a3, Fraction(-2), r, s)
        acc(row, 2, a2, Fraction(2, 3), r, s)
        rows.append(row)
        # d(psi1)/dy + 2 d(psi2)/dx - (4/3) A2 psi1 + (2/3) A1 psi2 + 2 A0 psi3
        row = [Fraction(0)] * ncols
        row[0 * nm + midx[(r, s + 1)]] += s + 1
        row[1 * nm + midx[(r + 1, s)]] += 2 * (r + 1)
        acc(row, 0, a2, Fraction(-4, 3), r, s)
        acc(row, 1, a1, Fraction(2, 3), r, s)
        acc(row, 2, a0, Fraction(2), r, s)
        rows.append(row)
        # d(psi3)/dx + 2 d(psi2)/dy - 2 A3 psi1 + (4/3) A1 psi3 - (2/3) A2 psi2
        row = [Fraction(0)] * ncols
        row[2 * nm + midx[(r + 1, s)]] += r + 1
        row[1 * nm + midx[(r, s + 1)]] += 2 * (s + 1)
        acc(row, 0, a3, Fraction(-2), r, s)
        acc(row, 1, a2, Fraction(-2, 3), r, s)
        acc(row, 2, a1, Fraction(4, 3), r, s)
        rows.append(row)
    return rows, ncols


def _kernel_at_order(k: ODECoeffs, base: Point, order: int) -> List[JetVector]:
    a_series = _coefficient_series(k, base, max(order - 1, 0))
    rows, ncols = _assemble(a_series, order)
    basis = linalg.kernel_basis(rows, ncols)
    return [JetVector(base=base, order=order, coeffs=tuple(v)) for v in basis]


def _q_matrix(kernel: Sequence[JetVector]):
    """Symmetric matrix of the quadratic form c -> Delta(sum c_i v_i) at the
    base point, from degree-0 jet coefficients."""
    vals = [(v.value_at_base(0), v.value_at_base(1), v.value_at_base(2)) for v in kernel]
    n = len(vals)
    out = [[Fraction(0)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            p1i, p2i, p3i = vals[i]
            p1j, p2j, p3j = vals[j]
            out[i][j] = (p1i * p3j + p1j * p3i) / 2 - p2i * p2j
    return out


def _nondegenerate_from_kernel(kernel: Sequence[JetVector]) -> bool:
    if not kernel:
        return False
    return any(any(c != 0 for c in row) for row in _q_matrix(kernel))


def _delta_form_coefficients(kernel: Sequence[JetVector]):
    """For each monomial of the truncated Delta, the symmetric matrix of its
    quadratic dependence on kernel coordinates."""
    series = [
        (v.component_series(0), v.component_series(1), v.component_series(2)) for v in kernel
    ]
    n = len(series)
    forms: dict = {}
    for i in range(n):
        for j in range(i, n):
            p1i, p2i, p3i = series[i]
            p1j, p2j, p3j = series[j]
            sym = (p1i * p3j + p1j * p3i).scale(Fraction(1, 2)) - p2i * p2j
            for mono, c in sym.coeffs.items():
                forms.setdefault(mono, [[Fraction(0)] * n for _ in range(n)])
                forms[mono][i][j] += c
                if i != j:
                    forms[mono][j][i] += c
    return forms


def _is_degenerate_combo(forms, coeffs: Sequence[Fraction]) -> bool:
    for matrix in forms.values():
        total = Fraction(0)
        for i, ci in enumerate(coeffs):
            if ci == 0:
                continue
            for j, cj in enumerate(coeffs):
                if cj:
                    total += ci * matrix[i][j]
        if total != 0:
            return False
    return True


def _degenerate_subspace_dim(kernel: Sequence[JetVector]) -> int:
    """Dimension of the largest kernel subspace consisting entirely of
    degenerate jets (Delta truncation identically zero).

    Exact for kernels of dimension <= 2; for larger kernels a finite probe
    family is tested, giving a certified lower bound (the theory caps the
    value at 1 in any case)."""
    k = len(kernel)
    if k == 0:
        return 0
    forms = _delta_form_coefficients(kernel)
    if k == 1:
        return 1 if _is_degenerate_combo(forms, [Fraction(1)]) else 0
    if k == 2:
        # quadratic forms q(a, b); a common projective root of all of them
        # is pinned down by the first nonzero one
        first = None
        for matrix in forms.values():
            q20, q11, q02 = matrix[0][0], 2 * matrix[0][1], matrix[1][1]
            if q20 or q11 or q02:
                first = (q20, q11, q02)
                break
        if first is None:
            return 2  # whole kernel degenerate (excluded by Koenigs-type theory)
        q20, q11, q02 = first
        candidates: List[Tuple[Fraction, Fraction]] = []
        if q20 == 0:
            candidates.append((Fraction(1), Fraction(0)))
            if q11 != 0:
                candidates.append((-q02 / q11, Fraction(1)))
        else:
            disc = q11 * q11 - 4 * q20 * q02
            if disc >= 0:
                root = _fraction_sqrt(disc)
                if root is not None:
                    candidates.append(((-q11 + root) / (2 * q20), Fraction(1)))
                    candidates.append(((-q11 - root) / (2 * q20), Fraction(1)))
        for cand in candidates:
            if _is_degenerate_combo(forms, list(cand)):
                return 1
        return 0
    # k >= 3: probe basis vectors and pairwise combinations
    probes: List[List[Fraction]] = []
    for i in range(k):
        vec = [Fraction(0)] * k
        vec[i] = Fraction(1)
        probes.append(vec)
    for i in range(k):
        for j in range(i + 1, k):
            for sign in (1, -1):
                vec = [Fraction(0)] * k
                vec[i] = Fraction(1)
                vec[j] = Fraction(sign)
                probes.append(vec)
    return 1 if any(_is_degenerate_combo(forms, v) for v in probes) else 0


def _fraction_sqrt(q: Fraction) -> Optional[Fraction]:
    if q < 0:
        return None
    from .expr import _int_nth_root

    rn = _int_nth_root(q.numerator, 2)
    rd = _int_nth_root(q.denominator, 2)
    if rn is None or rd is None:
        return None
    return Fraction(rn, rd)


# -- base points ------------------------------------------------------------

_CANDIDATE_VALUES = [
    Fraction(0),
    Fraction(1),
    Fraction(2),
    Fraction(3),
    Fraction(4),
    Fraction(5),
    Fraction(1, 2),
    Fraction(3, 2),
    Fraction(5, 2),
    Fraction(1, 3),
    Fraction(2, 3),
    Fraction(7),
    Fraction(8),
]


def _regular_at(k: ODECoeffs, point: Point) -> bool:
    for a in k.as_tuple():
        pair = expand_rational(a, tuple(sorted(free_symbols(a) | {"x", "y"})))
        if pair is None:
            return False
        _num, den = pair
        bindings = {"x": point[0], "y": point[1]}
        if den.eval(bindings) == 0:
            return False
    return True


def candidate_base_points(k: ODECoeffs, limit: int = 12):
    """Small-height rational points where all four coefficients are regular,
    in a fixed deterministic order."""
    found = []
    n = len(_CANDIDATE_VALUES)
    for total in range(2 * n - 1):
        for ix in range(0, min(total, n - 1) + 1):
            iy = total - ix
            if iy < 0 or iy >= n:
                continue
            point = (_CANDIDATE_VALUES[ix], _CANDIDATE_VALUES[iy])
            if _regular_at(k, point):
                found.append(point)
                if len(found) >= limit:
                    return found
    return found


def default_base_point(k: ODECoeffs) -> Point:
    points = candidate_base_points(k, limit=1)
    if not points:
        raise ValueError("no regular small-height base point found")
    return points[0]


# -- the mobility computation -------------------------------------------------


def mobility(
    k: ODECoeffs,
    base: Optional[Point] = None,
    max_order: int = DEFAULT_MAX_ORDER,
    window: int = DEFAULT_WINDOW,
) -> MobilityReport:
    """Kernel dimensions of the jet-truncated metrisability system at `base`,
    per truncation order, with the stabilised value as the degree of
    mobility.

    Parameters of k must be bound to exact rationals.  The kernel basis of
    the last computed order is returned along with the nondegeneracy verdict
    of the quadratic form Delta at the base point.
    """
    if base is None:
        base = default_base_point(k)
    base = (Fraction(base[0]), Fraction(base[1]))
    if not _regular_at(k, base):
        raise ValueError(f"base point {base} is singular for the coefficients")

    orders: List[int] = []
    dims: List[int] = []
    kernel: List[JetVector] = []
    m: Optional[int] = None
    for order in range(_MIN_ORDER, max_order + 1):
        kernel = _kernel_at_order(k, base, order)
        orders.append(order)
        dims.append(len(kernel))
        if len(dims) >= window and len(set(dims[-window:])) == 1:
            m = dims[-1]
            break
    return MobilityReport(
        base=base,
        orders=tuple(orders),
        dims=tuple(dims),
        m=m,
        kernel=tuple(kernel),
        nondegenerate_exists=_nondegenerate_from_kernel(kernel),
        degenerate_subspace_dim=_degenerate_subspace_dim(kernel),
    )


def nondegenerate_exists(
    k: ODECoeffs,
    report: MobilityReport,
    max_retries: int = 3,
    max_order: int = DEFAULT_MAX_ORDER,
    window: int = DEFAULT_WINDOW,
) -> bool:
    """Whether some kernel element has Delta != 0 at a base point.

    The quadratic form is evaluated at the report's base point first; if it
    vanishes there the computation is repeated at up to `max_retries`
    alternative base points before answering False."""
    if not report.kernel:
        return False
    if report.nondegenerate_exists:
        return True
    tried = {report.base}
    for point in candidate_base_points(k, limit=max_retries + 4):
        if point in tried:
            continue
        tried.add(point)
        alt = mobility(k, base=point, max_order=max_order, window=window)
        if alt.nondegenerate_exists:
            return True
        if len(tried) > max_retries:
            break
    return False


# -- the combined verdict -----------------------------------------------------

VERDICT_METRISABLE = "Metrisable"
VERDICT_NOT_METRISABLE = "NotMetrisable"
VERDICT_FLAT_METRISABLE = "FlatMetrisable"
VERDICT_INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class VerdictResult:
    verdict: str
    report: MobilityReport
    flat_l1: Optional[ZeroVerdict]
    flat_l2: Optional[ZeroVerdict]
    nondegenerate: bool
    notes: Tuple[str, ...] = field(default_factory=tuple)


def metrisability_verdict(
    k: ODECoeffs,
    base: Optional[Point] = None,
    max_order: int = DEFAULT_MAX_ORDER,
    window: int = DEFAULT_WINDOW,
    config: ZeroTestConfig = DEFAULT_CONFIG,
) -> VerdictResult:
    """Combine flatness invariants, mobility, and nondegeneracy into the
    final classification of the path geometry."""
    from .projective import is_projectively_flat

    notes: List[str] = []
    try:
        l1v, l2v = is_projectively_flat(k, config)
        flat = l1v.is_zero and l2v.is_zero
    except InconclusiveZeroTest:
        l1v = l2v = None
        flat = None
        notes.append("flatness test inconclusive (all sample points singular)")

    report = mobility(k, base=base, max_order=max_order, window=window)
    nondeg = nondegenerate_exists(k, report, max_order=max_order, window=window)

    if not report.stabilised:
        verdict = VERDICT_INCONCLUSIVE
        notes.append(f"kernel dimension did not stabilise by order {max_order}")
    elif flat is None:
        verdict = VERDICT_INCONCLUSIVE
    elif flat and nondeg:
        verdict = VERDICT_FLAT_METRISABLE
    elif nondeg:
        verdict = VERDICT_METRISABLE
    else:
        verdict = VERDICT_NOT_METRISABLE
        if flat:
            verdict = VERDICT_INCONCLUSIVE
            notes.append("flat invariants vanish but no nondegenerate solution found")

    return VerdictResult(
        verdict=verdict,
        report=report,
        flat_l1=l1v,
        flat_l2=l2v,
        nondegenerate=nondeg,
        notes=tuple(notes),
    )
