"""Fredholm second-kind equations via mixed Neumann–Fourier resolvent series."""

from .errors import (
    AnnihilationError,
    ArityError,
    AsymmetricKernelError,
    DomainError,
    EigenvalueHitError,
    ExprError,
    ExprSyntaxError,
    KernelEvaluationError,
    ResolventError,
    TruncationError,
    UnknownIdentifierError,
)
from .expr import Expression, evaluate, evaluate_checked, parse, to_source
from .quadrature import QuadRule, gauss_legendre, integrate
from .kernel import (
    GridFunction,
    IteratedKernelStack,
    Kernel,
    apply_kernel,
    build_iterated,
    off_grid_eval,
)
from .spectral import Spectrum, eigendecompose, fourier_coefficients, off_grid_psi
from .resolvent import (
    MixedSeriesParams,
    MixedSolver,
    annihilated_resolvent_eval,
    error_profile,
    exact_reference,
    resolvent_defect,
    resolvent_eval,
    solve_equation,
)
from .detseries import (
    DetCoefficients,
    compute_coefficients,
    delta_eval,
    ratio_resolvent_check,
    symmetric_function_check,
)
from .benchmark import AnalyticExample, analytic_vs_numeric, figure1, table1

__version__ = "0.1.0"
