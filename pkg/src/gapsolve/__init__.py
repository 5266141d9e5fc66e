"""gapsolve: numerical solutions of the BCS gap equation.

Simple (constant-coupling) gap curves and critical temperatures, the full
nonlinear integral equation via Nystrom discretization with fixed-point
iteration, and the small-temperature contraction window.  Hot kernels run
on a compiled extension when available, with a numpy fallback selected at
import (see gapsolve.backend_name()).
"""

from ._core import BACKEND as _BACKEND
from .params import (PhysicalParams, SolverConfig, ValidationReport, default_u0,
                     denormalize, load_config, normalize, validate)
from .quadrature import (QuadratureRule, composite_rule, gap_integrand, integrate,
                         t0_integral_closed_form)
from .simple_gap import (GapCurve, delta_zero, gap_curve, gap_derivatives,
                         inverse_gap, solve_gap_at, tau)
from .kernel import (Kernel, constant_kernel, eval_kernel, kernel_bounds,
                     load_tabulated, separable_kernel, tabulated_kernel)
from .bcs_solver import (GapSlice, GapSurface, apply_operator, default_rule,
                         gap_surface, solve_fixed_point, transition_temperature)
from .contraction import (Condition20Report, ContractionEstimate,
                          condition20_margin, empirical_contraction_factor,
                          max_admissible_t1)
from .errors import (BracketError, ContractionWindowError, ConvergenceError,
                     DomainError, EnvelopeError, GapsolveError, KernelFileError,
                     QuadratureError)

__version__ = "0.1.0"


def backend_name() -> str:
    """Which hot-kernel backend this process imported: 'compiled' or 'python'."""
    return _BACKEND


__all__ = [
    "PhysicalParams", "SolverConfig", "ValidationReport", "default_u0",
    "denormalize", "load_config", "normalize", "validate",
    "QuadratureRule", "composite_rule", "gap_integrand", "integrate",
    "t0_integral_closed_form",
    "GapCurve", "delta_zero", "gap_curve", "gap_derivatives", "inverse_gap",
    "solve_gap_at", "tau",
    "Kernel", "constant_kernel", "eval_kernel", "kernel_bounds",
    "load_tabulated", "separable_kernel", "tabulated_kernel",
    "GapSlice", "GapSurface", "apply_operator", "default_rule", "gap_surface",
    "solve_fixed_point", "transition_temperature",
    "Condition20Report", "ContractionEstimate", "condition20_margin",
    "empirical_contraction_factor", "max_admissible_t1",
    "GapsolveError", "DomainError", "KernelFileError", "ConvergenceError",
    "QuadratureError", "BracketError", "EnvelopeError", "ContractionWindowError",
    "backend_name",
]
