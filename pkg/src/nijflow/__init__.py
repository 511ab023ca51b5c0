"""Geodesically compatible metrics for companion-form Nijenhuis operators.

The package builds the quadratic first-integral family of a differentially
non-degenerate operator in second companion form, certifies every algebraic
and differential identity behind the construction by exact rational
computation, and integrates the induced hydrodynamic-type systems through
their finite-dimensional reduction to commuting Hamiltonian flows, with an
independent finite-difference solver as a cross-check.
"""

from .compat import (
    CompatError,
    benenti_residual,
    coordinate_form_residual_at,
    lie_form_residual_at,
    self_adjoint_residual,
    symmetry_metric,
)
from .exactpoly import (
    ExactPolynomial,
    ParseError,
    PolynomialError,
    base_names,
    format_polynomial,
    parse_expression,
    phase_names,
)
from .flows import (
    AxisSpec,
    CotangentPoint,
    FlowError,
    FlowSettings,
    HamiltonianField,
    SolutionGrid,
    geodesic_from,
    hamiltonian_rhs,
    integrate_flow,
    integrate_flow_path,
    orbit_grid,
    verify_commutation,
    verify_conservation,
)
from .hierarchy import (
    first_integrals,
    generating_identity_residuals,
    killing_operators,
    verify_commuting_integrals,
)
from .metric import (
    CovariantMetricAt,
    GramMatrix,
    MetricError,
    PhaseFunction,
    build_h_family,
    check_gram_normal_form,
    covariant_at,
    differential_shift_residuals,
    gram_matrix,
    h_family_from_powers,
    pairwise_poisson,
    poisson_bracket,
)
from .model import CompanionModel
from .operators import (
    OneTwoTensorField,
    OperatorError,
    OperatorField,
    char_coefficients,
    commutator,
    companion_first,
    companion_second,
    guiding_bracket,
    is_gl_regular_at,
    is_strong_symmetry,
    is_symmetry,
    nijenhuis_torsion,
    torsion_of_pair,
)
from .pde import (
    PDEError,
    ResidualReport,
    compare_grids,
    convergence_orders,
    direct_solve,
    grid_residual,
)

__all__ = [
    "AxisSpec",
    "CompanionModel",
    "CompatError",
    "CotangentPoint",
    "CovariantMetricAt",
    "ExactPolynomial",
    "FlowError",
    "FlowSettings",
    "GramMatrix",
    "HamiltonianField",
    "MetricError",
    "OneTwoTensorField",
    "OperatorError",
    "OperatorField",
    "PDEError",
    "ParseError",
    "PhaseFunction",
    "PolynomialError",
    "ResidualReport",
    "SolutionGrid",
    "base_names",
    "benenti_residual",
    "build_h_family",
    "char_coefficients",
    "check_gram_normal_form",
    "commutator",
    "companion_first",
    "companion_second",
    "compare_grids",
    "convergence_orders",
    "coordinate_form_residual_at",
    "covariant_at",
    "differential_shift_residuals",
    "direct_solve",
    "first_integrals",
    "format_polynomial",
    "generating_identity_residuals",
    "geodesic_from",
    "gram_matrix",
    "grid_residual",
    "guiding_bracket",
    "h_family_from_powers",
    "hamiltonian_rhs",
    "integrate_flow",
    "integrate_flow_path",
    "is_gl_regular_at",
    "is_strong_symmetry",
    "is_symmetry",
    "killing_operators",
    "lie_form_residual_at",
    "nijenhuis_torsion",
    "orbit_grid",
    "pairwise_poisson",
    "parse_expression",
    "phase_names",
    "poisson_bracket",
    "self_adjoint_residual",
    "symmetry_metric",
    "torsion_of_pair",
    "verify_commutation",
    "verify_commuting_integrals",
    "verify_conservation",
]

__version__ = "0.1.0"
