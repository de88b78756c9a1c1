"""fraclab: numerical laboratory for the two fractional Laplacians of a bounded domain.

Builds the spectral ("Navier") and restricted ("Dirichlet") fractional
operators on box grids, verifies their comparison properties at matrix
level, solves the weighted extension problem that realizes both forms, and
estimates critical Sobolev constants against the closed-form value.
"""

__version__ = "0.1.0"

from .analysis import (
    QuotientResult,
    SobolevSetup,
    SweepRow,
    dilation_sweep,
    extension_constant,
    extremal_function,
    gamma,
    lp_norm,
    minimize_quotient,
    rayleigh_quotient,
    sobolev_constant_closed_form,
)
from .domain import (
    BoxGrid,
    GridFunction,
    SubDomain,
    dilate,
    extend_by_zero,
    make_box,
    make_shape,
    parse_shape_spec,
    restrict,
)
from .extension import (
    ExtensionMesh,
    ExtensionSolution,
    default_grading,
    energy_identity_check,
    extension_ordering_check,
    graded_mesh,
    solve_extension,
    trace_limit,
)
from .linalg import (
    EigenDecomposition,
    eigendecompose,
    quadratic_form,
    solve_spd,
    spectral_power,
    sym_matrix,
)
from .operators import (
    SpectrumComparison,
    SymOperator,
    assemble_laplacian,
    compare_spectra,
    difference_operator,
    dirichlet_operator,
    fourier_form,
    monotonicity_check,
    navier_operator,
    positivity_check,
)

__all__ = [
    "__version__",
    "BoxGrid", "SubDomain", "GridFunction",
    "make_box", "make_shape", "parse_shape_spec",
    "extend_by_zero", "restrict", "dilate",
    "EigenDecomposition", "sym_matrix", "eigendecompose",
    "spectral_power", "quadratic_form", "solve_spd",
    "SymOperator", "SpectrumComparison",
    "assemble_laplacian", "navier_operator", "dirichlet_operator",
    "fourier_form", "difference_operator", "compare_spectra",
    "positivity_check", "monotonicity_check",
    "ExtensionMesh", "ExtensionSolution", "graded_mesh", "default_grading",
    "solve_extension", "energy_identity_check", "trace_limit",
    "extension_ordering_check",
    "SobolevSetup", "QuotientResult", "SweepRow",
    "gamma", "extension_constant", "sobolev_constant_closed_form",
    "extremal_function", "lp_norm", "rayleigh_quotient",
    "minimize_quotient", "dilation_sweep",
]
