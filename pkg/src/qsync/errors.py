"""Exception hierarchy shared by every qsync module."""


class QsyncError(Exception):
    """Base class for all library errors."""


class DimensionError(QsyncError, ValueError):
    """Operator or state dimensions do not match the expected layout."""


class InvalidStateError(QsyncError, ValueError):
    """A density matrix violates Hermiticity, trace or positivity bounds."""


class DegenerateSteadyStateError(QsyncError):
    """The Liouvillian has more than one stationary state."""

    def __init__(self, multiplicity: int):
        self.multiplicity = multiplicity
        super().__init__(f"Liouvillian nullspace has dimension {multiplicity}; steady state is not unique")


class TimeDependenceError(QsyncError):
    """A time-dependent model was used where a static one is required, or vice versa."""


class StiffnessError(QsyncError):
    """The adaptive integrator could not advance (step size underflow)."""


class ConvergenceError(QsyncError):
    """An iterative procedure or time average did not settle."""

    def __init__(self, message: str, drift: float | None = None):
        self.drift = drift
        super().__init__(message)


class SingularSystemError(QsyncError):
    """A linear system that should be regular turned out singular."""


class StructureError(QsyncError):
    """A state lacks the block structure an operation relies on."""


class FitError(QsyncError):
    """A least-squares fit was rejected for poor quality."""

    def __init__(self, message: str, rms_residual: float | None = None):
        self.rms_residual = rms_residual
        super().__init__(message)


class TrackingError(QsyncError):
    """Eigenvector continuation lost track of a level."""


class ConfigError(QsyncError):
    """An experiment configuration failed validation."""
