"""Exception hierarchy shared by all pipeline stages."""


class CropmineError(Exception):
    """Base class for every error raised by this package."""


class FormatError(CropmineError, ValueError):
    """On-disk data does not match the native interchange format."""


class PayloadSizeError(FormatError):
    """Binary payload length disagrees with the sidecar header."""


class NonFiniteError(FormatError):
    """Raster contains NaN or infinite values."""


class AlphabetError(FormatError):
    """Mask holds a code outside the alphabet of its declared kind."""


class ConfigError(CropmineError, ValueError):
    """A configuration object violates its invariants."""


class PlacementError(CropmineError):
    """Synthetic fields could not be placed within the attempt budget."""


class CoverageError(CropmineError):
    """Human-label sampling could not reach the requested coverage."""


class UnlearnableError(CropmineError, ValueError):
    """Training mask lacks one of the two categories."""


class StageError(CropmineError):
    """A pipeline stage failed; carries the stage name."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage '{stage}' failed: {cause}")
