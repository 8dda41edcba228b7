"""Exception types raised by weakmeas."""


class WeakMeasError(Exception):
    """Base class for all library errors."""


class DimensionError(WeakMeasError, ValueError):
    """Operand shapes do not agree."""


class InvalidStateError(WeakMeasError, ValueError):
    """A density operator, projector or wavefunction violates its invariants."""


class NonHermitianError(WeakMeasError, ValueError):
    """A generator or observable that must be Hermitian is not."""


class NonConvergenceError(WeakMeasError, ArithmeticError):
    """A series did not converge within its term cap."""


class GridError(WeakMeasError, ValueError):
    """The position grid cannot represent the requested state or evolution."""


class WrapAroundError(GridError):
    """Amplitude reached the periodic boundary of the grid."""


class OffGridError(GridError):
    """A requested position or momentum is not a grid point."""


class DegeneratePostSelectionError(WeakMeasError, ZeroDivisionError):
    """The post-selection probability fell below the probability floor."""

    def __init__(self, probability, floor):
        self.probability = probability
        self.floor = floor
        super().__init__(
            f"post-selection probability {probability:.3e} is below the floor {floor:.1e}"
        )


class ConfigError(WeakMeasError, ValueError):
    """Scenario configuration failed validation.

    ``path`` is the dotted location of the offending field.
    """

    def __init__(self, path, message):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)
