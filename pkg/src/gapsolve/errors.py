"""Exception taxonomy.

Domain errors mean the caller handed in something outside the contract
(bad parameters, a point outside the kernel square, an unreadable file).
Convergence errors mean a numerical procedure ran out of budget; they carry
whatever diagnostics the solver had at the point of failure.
"""


class GapsolveError(Exception):
    """Base class for everything raised by this package."""


class DomainError(GapsolveError, ValueError):
    """Input outside the mathematical or physical domain of an operation."""


class KernelFileError(DomainError):
    """Tabulated-kernel file rejected; message carries the row/column."""


class ConvergenceError(GapsolveError, RuntimeError):
    """An iterative procedure exhausted its budget."""

    def __init__(self, message, *, residual_history=None, last_values=None):
        super().__init__(message)
        self.residual_history = list(residual_history) if residual_history else []
        self.last_values = last_values


class QuadratureError(ConvergenceError):
    """Panel doubling did not converge; .last_estimate holds the final value."""

    def __init__(self, message, *, last_value=None, last_error=None):
        super().__init__(message)
        self.last_value = last_value
        self.last_error = last_error


class BracketError(ConvergenceError):
    """A root bracket failed its sign conditions (internal inconsistency)."""


class EnvelopeError(ConvergenceError):
    """A converged slice left its sandwich band beyond the allowed margin."""


class ContractionWindowError(DomainError):
    """No temperature satisfies the contraction inequality; .report holds
    the margin evaluated in the zero-temperature limit."""

    def __init__(self, message, *, report=None):
        super().__init__(message)
        self.report = report
