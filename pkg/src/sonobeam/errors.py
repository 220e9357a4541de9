"""Typed error hierarchy shared by all sonobeam modules."""


class SonobeamError(Exception):
    """Base class for all errors raised by this package."""


class InvalidGeometryError(SonobeamError):
    """Array construction parameters or geometry kind unusable for the operation."""


class InvalidDirectionError(SonobeamError):
    """Steering direction outside the sin^2(alpha) + sin^2(beta) <= 1 domain."""


class InvalidGridError(SonobeamError):
    """Imaging grid or sweep span contains invalid directions or bad ordering."""


class NumericDomainError(SonobeamError):
    """Intermediate value left the mathematical domain (negative radicand etc.)."""


class SamplingRateError(SonobeamError):
    """Sampling rate too low for the requested pulse."""


class DegeneratePulseError(SonobeamError):
    """Pulse has no usable spectral peak."""


class TruncationError(SonobeamError):
    """Record too short: an echo would fall (partly) outside the sampled window."""


class FarFieldViolationWarning(UserWarning):
    """A scatterer does not satisfy the far-field condition (non-fatal)."""


class InvalidArgumentError(SonobeamError):
    """Argument combination violates an operation's contract."""


class OutOfRecordError(SonobeamError):
    """Requested range maps to a time outside the beam signal's record."""


class UnsupportedMethodError(SonobeamError):
    """Method is defined for op-counting only, not executable."""


class SpanTooNarrowError(SonobeamError):
    """Pattern span does not bracket the required crossings."""


class UndefinedRatioError(SonobeamError):
    """Ratio metric undefined (zero denominator)."""


class DegenerateClusteringError(SonobeamError):
    """Clustering input is constant; no partition exists."""


class ConfigError(SonobeamError):
    """Run configuration failed strict validation."""


class FileFormatError(SonobeamError):
    """Binary file violates its format contract.

    Carries the byte offset at which the violation was detected.
    """

    def __init__(self, message, offset=None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class TruncatedPayloadError(FileFormatError):
    """File ends before the payload declared by its header."""

    def __init__(self, message=None, *, expected_bytes, actual_bytes,
                 offset=None):
        self.expected_bytes = expected_bytes
        self.actual_bytes = actual_bytes
        if message is None:
            message = (
                f"truncated payload: expected {expected_bytes} bytes, "
                f"found {actual_bytes}"
            )
        super().__init__(message, offset=offset)
