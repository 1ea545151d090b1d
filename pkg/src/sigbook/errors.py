"""Exception and warning types raised across the package."""


class SigbookError(Exception):
    """Base class for all package errors."""


class DimensionError(SigbookError, ValueError):
    """Operands have incompatible widths, depths or vector lengths."""


class DomainError(SigbookError, ValueError):
    """An argument lies outside the domain of the operation."""


class TruncationError(SigbookError, ValueError):
    """A requested word is longer than the truncation depth."""


class InvalidStreamError(SigbookError, ValueError):
    """A stream violates its structural invariants."""


class LeadLagSpecError(SigbookError, ValueError):
    """Duplicate or out-of-range lag channels."""


class ParseError(SigbookError, ValueError):
    """A malformed line in an input file."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(SigbookError, ValueError):
    """An order-book stream failed validation."""


class EmptyBucketError(SigbookError, ValueError):
    """A time window holds too few rows to form a stream."""


class ConvergenceWarning(UserWarning):
    """Coordinate descent hit its sweep limit before converging."""

