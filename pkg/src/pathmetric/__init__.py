"""Metrisability of second-order ODE path geometries on surfaces.

Exact symbolic decision machinery (is the equation's family of integral
curves the geodesics of some metric?), metric and first-integral
reconstruction for the classically integrable cases, and a numerical
verification layer.
"""

from .expr import (
    Expr,
    ParseError,
    Rational,
    SymbolTable,
    Var,
    diff,
    eval_exact,
    eval_float,
    evaluate,
    parse_expr,
    subst,
    to_text,
)
from .poly import Poly, Series2, expand_rational, series_expand
from .zerotest import InconclusiveZeroTest, ZeroTestConfig, ZeroVerdict, is_zero
from .projective import (
    Connection,
    Metric2D,
    ODECoeffs,
    OneForm,
    connection_to_coeffs,
    is_projectively_flat,
    levi_civita,
    liouville_invariants,
    projective_shift,
    representative_connection,
)
from .metrisability import (
    JetVector,
    MobilityReport,
    PsiTriple,
    degenerate_condition,
    killing_tensor_residual,
    liouville_residuals,
    metrisability_verdict,
    mobility,
    nondegenerate_exists,
    psi_to_metric,
    verify_degenerate_psi,
)
from .integrals import (
    FirstIntegral,
    PicardFuchsBasis,
    VectorField,
    conservation_residual,
    integral_from_killing,
    killing_from_degenerate,
    killing_residual,
    picard_fuchs_solve,
    pvi_integral_eval,
    ratio_integral,
)
from .dynamics import (
    Trajectory,
    coalescence_check,
    flat_chart_check,
    integrate_geodesic,
    integrate_ode,
    monitor_integral,
)
from . import catalog

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
