"""Exception hierarchy for qframe."""


class QFrameError(Exception):
    """Base class for all library errors."""


class DimensionError(QFrameError, ValueError):
    """Operand shapes or dimensions do not match."""


class UnsupportedDimensionError(DimensionError):
    """A construction is undefined (or degenerate) at the requested dimension."""


class NotHermitianError(QFrameError, ValueError):
    pass


class NotPositiveError(QFrameError, ValueError):
    pass


class NotNormalizedError(QFrameError, ValueError):
    pass


class IncompletePovmError(QFrameError, ValueError):
    pass


class NotAFrameError(QFrameError, ValueError):
    """The family does not span the Hermitian operators (singular frame operator)."""


class DualityError(QFrameError, ValueError):
    """A pair of frames was required to be dual but is not."""


class LabelMismatchError(QFrameError, ValueError):
    pass


class ConventionError(QFrameError, ValueError):
    """A normalization convention cannot be applied to the given frame."""


class ValidationError(QFrameError, ValueError):
    """Combined validation failure carrying every individual problem found."""

    def __init__(self, message, errors=()):
        super().__init__(message)
        self.errors = tuple(errors)
