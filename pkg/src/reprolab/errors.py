"""Exception hierarchy shared by all reprolab modules."""


class ReproLabError(Exception):
    """Base class for every error raised by reprolab."""


class GridError(ReproLabError, ValueError):
    """Invalid grid specification or sample array."""


class GridMismatchError(GridError):
    """Two sampled objects that must share a grid do not."""


class OffGridShiftError(GridError):
    """A translation is not an integer multiple of the grid step.

    Shifting would need resampling, which the verification code refuses to
    do silently.
    """


class SingularMatrixError(ReproLabError, ValueError):
    """A dilation or group element is (numerically) singular."""


class GroupSpecError(ReproLabError, ValueError):
    """A group descriptor fails validation or a group-spec file is malformed.

    ``line`` and ``column`` are 1-based positions inside the spec file when the
    error comes from parsing, ``None`` otherwise.
    """

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            message = f"line {line}, column {column}: {message}"
        super().__init__(message)


class RegionSpecError(ReproLabError):
    """Region/sheet declarations are inconsistent with the quadratic map."""


class SupportError(ReproLabError, ValueError):
    """A function is not supported where an operation requires it to be."""


class QuadratureBudgetError(ReproLabError):
    """A requested quadrature exceeds the configured node budget."""


class ConstructionError(ReproLabError):
    """A wavelet constructor could not meet its defining conditions."""
