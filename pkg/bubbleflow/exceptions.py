"""Errors raised by bubbleflow.

Everything derived from `NumericalAbort` ends a run with exit code 3 and a
machine-readable failure record; `ConfigError` is a usage error (exit code 2).
"""

from typing import Any


class BubbleFlowError(Exception):
    """Base class of all bubbleflow errors."""


class ConfigError(BubbleFlowError):
    """Invalid or unreadable run configuration."""


class NumericalAbort(BubbleFlowError):
    def __init__(self, message: str, **details: Any):
        super().__init__(message)
        self.details: dict[str, Any] = details

    def to_record(self) -> dict[str, Any]:
        return {"error": type(self).__name__, "message": str(self), "details": self.details}


class ResolutionError(NumericalAbort):
    """Grid or basis cannot resolve the requested degree."""


class ChartDomainError(NumericalAbort):
    """A chart was queried outside its radius."""


class ConvergenceError(NumericalAbort):
    """An iterative solver ran out of iterations."""


class ProjectionError(NumericalAbort):
    """Nearest-point projection undefined (outside the tubular neighbourhood)."""


class SingularImmersionError(NumericalAbort):
    """Induced metric of the graph immersion is degenerate."""


class DegenerateStateError(NumericalAbort):
    """A quantity needed for normalization vanished."""


class RegimeError(NumericalAbort):
    """State left the small-perturbation regime (e.g. singular Gram matrix)."""


class BoundarySolveError(ConvergenceError):
    def __init__(self, message: str, history: list[float] | None = None, **details: Any):
        super().__init__(message, history=list(history or []), **details)
        self.history = list(history or [])


class InitializationError(NumericalAbort):
    """No admissible initial state could be constructed."""


class GraphBreakdownError(NumericalAbort):
    """The surface stopped being a radial graph over the hemisphere."""


class StepError(NumericalAbort):
    """A time step was requested with invalid parameters."""


class AnalysisError(NumericalAbort):
    """A verification check cannot be evaluated on the data it was given."""
