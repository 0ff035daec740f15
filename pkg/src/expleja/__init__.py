"""Matrix-free exponential integration with Leja interpolation and cost-aware step control."""
from .controllers import VARIANTS, ControllerParams, RunLog, StepRecord, integrate
from .errors import (
    BreakdownError,
    HistoryError,
    NonConvergence,
    RejectionLimit,
    StagnationError,
)
from .integrators import INTEGRATORS, LejaSettings, StepResult, get_integrator
from .leja import OperatorHandle, SpectralBounds, apply_phi, estimate_spectral_bounds
from .phi_kernel import divided_differences, generate_leja, phi_scalar
from .problems import KINDS, LinearProblem, PDEProblem, make_problem, zero_problem

__version__ = "0.1.0"

__all__ = [
    "VARIANTS", "ControllerParams", "RunLog", "StepRecord", "integrate",
    "BreakdownError", "HistoryError", "NonConvergence", "RejectionLimit", "StagnationError",
    "INTEGRATORS", "LejaSettings", "StepResult", "get_integrator",
    "OperatorHandle", "SpectralBounds", "apply_phi", "estimate_spectral_bounds",
    "divided_differences", "generate_leja", "phi_scalar",
    "KINDS", "LinearProblem", "PDEProblem", "make_problem", "zero_problem",
]
