"""Exception taxonomy shared across the package."""


class PolycertError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(PolycertError, ValueError):
    """An argument is outside its documented domain."""


class ModelError(PolycertError, ValueError):
    """Inputs violate a structural precondition of the data model."""


class ParseError(PolycertError, ValueError):
    """A file could not be decoded. ``byte_offset`` locates the failure."""

    def __init__(self, message: str, byte_offset: int | None = None):
        if byte_offset is not None:
            message = f"{message} (byte offset {byte_offset})"
        super().__init__(message)
        self.byte_offset = byte_offset


class ConvergenceError(PolycertError, RuntimeError):
    """An iterative routine hit its iteration cap before reaching tolerance.

    Carries the best iterate found so far plus the residual that failed
    to meet tolerance, so callers can inspect or accept partial results.
    """

    def __init__(self, message: str, iterate=None, residual: float | None = None):
        super().__init__(message)
        self.iterate = iterate
        self.residual = residual


class SizeError(PolycertError, RuntimeError):
    """A combinatorial enumeration would exceed its configured budget."""


class CertificateUndefinedError(PolycertError, ValueError):
    """No certificate exists for this input (empty active set)."""
