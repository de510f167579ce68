"""Pluriclosed flow of left-invariant Hermitian metrics on 4-dimensional Lie groups."""

from .catalog import GeometryId, GeometryParams, GeometrySpec, build_geometry, verify_coframe
from .curvature import (
    InadmissibleMetricError,
    MetricCoefficients,
    bismut_ricci,
    closed_form_ricci,
    compute_eta,
    metric_inverse,
)
from .flow import IntegratorOptions, Trajectory, integrate, rhs_closed_form, rhs_generic, solve_default
from .forms import BasisIndex, InvariantOneForm, InvariantTwoForm, StructureConstants

__version__ = "0.1.0"

__all__ = [
    "BasisIndex",
    "GeometryId",
    "GeometryParams",
    "GeometrySpec",
    "InadmissibleMetricError",
    "IntegratorOptions",
    "InvariantOneForm",
    "InvariantTwoForm",
    "MetricCoefficients",
    "StructureConstants",
    "Trajectory",
    "bismut_ricci",
    "build_geometry",
    "closed_form_ricci",
    "compute_eta",
    "integrate",
    "metric_inverse",
    "rhs_closed_form",
    "rhs_generic",
    "solve_default",
    "verify_coframe",
]
