"""Exception hierarchy shared by all pipeline stages."""


class PHRealizeError(Exception):
    """Base class for all errors raised by this package."""


class DimensionError(PHRealizeError):
    """Matrix dimensions are inconsistent with the declared system shape."""


class SingularPencilError(PHRealizeError):
    """sE - A is numerically singular at the requested evaluation point."""


class NotRegularError(PHRealizeError):
    """The pencil (E, A) is numerically non-regular (det(sE - A) vanishes)."""

    def __init__(self, message, classification=None):
        super().__init__(message)
        self.classification = classification


class IndexTooHighError(PHRealizeError):
    """The pencil is regular but its index exceeds one."""

    def __init__(self, message, classification=None):
        super().__init__(message)
        self.classification = classification


class IllConditionedError(PHRealizeError):
    """A factor required by the reduction is too ill conditioned to invert."""


class NotPassiveError(PHRealizeError):
    """No positive definite storage certificate exists for the system."""


class ConstraintViolationError(PHRealizeError):
    """The lossless-direction constraint of the projected KYP problem fails."""


class GridMismatchError(PHRealizeError):
    """Two frequency responses were sampled on different grids."""


class RankDeficientExcitationError(PHRealizeError):
    """The input sequence does not excite the system enough to deconvolve."""


class InsufficientDataError(PHRealizeError):
    """Too few Markov parameters for the requested realization order."""


class FileFormatError(PHRealizeError):
    """A system or data file does not follow the documented schema."""
