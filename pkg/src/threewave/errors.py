"""Exception hierarchy shared by the library and the command line front end."""


class ThreeWaveError(Exception):
    """Base class; the CLI maps any subclass to exit status 1."""


class InputError(ThreeWaveError, ValueError):
    """Malformed or non-finite input."""


class ResolutionError(ThreeWaveError):
    """A profile does not fit the grid (tail above tolerance, scale too small)."""


class ShootingBracketError(ThreeWaveError):
    """The shooting dichotomy could not be bracketed."""


class GeometryError(ThreeWaveError):
    """A structural property of the fiber or of the h-function failed."""


class ConstraintError(ThreeWaveError):
    """An iterate left the admissible set (lost positive coupling, degenerate masses)."""


class SubcriticalityError(InputError):
    """max(a1, a2) is not below the threshold D(alpha)."""


class IntegratorError(ThreeWaveError):
    """The time integrator produced non-finite values."""

    def __init__(self, message, last_state=None):
        super().__init__(message)
        self.last_state = last_state
