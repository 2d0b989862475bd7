"""Exception types shared across the package."""


class ConfigurationError(ValueError):
    """Rejected constructor argument or run configuration."""


class GridMismatchError(ValueError):
    """Fields living on different grids were combined in one operation."""


class DomainError(ValueError):
    """Thermodynamic function evaluated outside its domain."""


class LinearSolverError(RuntimeError):
    """Base class for linear-solve failures."""


class LinearBreakdown(LinearSolverError):
    """Singular or numerically broken-down system matrix."""


class LinearNonConvergence(LinearSolverError):
    """Iterative linear solver stalled before reaching its tolerance."""


class SolverFailure(RuntimeError):
    """Newton iteration did not produce an acceptable state.

    Carries the structured iteration report so callers (and run logs) can
    record what happened without parsing the message string.
    """

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class InvariantViolation(RuntimeError):
    """A structural invariant (mass, positivity, energy slack) was broken."""
