"""Exception hierarchy shared across the package."""


class TccError(Exception):
    """Base class; the CLI turns any of these into a machine-readable error line."""

    kind = "error"


class InvalidIlluminantError(TccError, ValueError):
    kind = "invalid-illuminant"


class EmptyInputError(TccError, ValueError):
    kind = "empty-input"


class DegenerateImageError(TccError):
    kind = "degenerate-image"


class DegenerateSequenceError(TccError):
    kind = "degenerate-sequence"


class ImageTooSmallError(TccError, ValueError):
    kind = "image-too-small"


class InvalidBeliefError(TccError, ValueError):
    kind = "invalid-belief"


class ShapeError(TccError, ValueError):
    kind = "shape"


class FrameIOError(TccError, OSError):
    kind = "io"


class FormatError(TccError, ValueError):
    kind = "format"


class ValidationError(TccError, ValueError):
    kind = "validation"


class CheckpointError(TccError, ValueError):
    kind = "checkpoint"


class InvalidImageError(TccError, ValueError):
    kind = "invalid-image"
