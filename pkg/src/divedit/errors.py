"""Exception types shared across the package."""


class DiveditError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpanError(DiveditError, ValueError):
    """A span is out of bounds or otherwise malformed for its sentence."""


class InvalidArgumentError(DiveditError, ValueError):
    """An argument violates a documented precondition."""


class NoNeighborsError(DiveditError):
    """The edited span covers the whole sentence, leaving nothing to score."""


class BackendError(DiveditError):
    """A model backend failed: unreachable process, protocol violation, or
    an error response."""


class UnsupportedCapabilityError(BackendError):
    """The backend does not implement the requested operation."""


class EmptyBankError(DiveditError, ValueError):
    """A phrase bank is empty, or label filtering left no usable phrase."""


class UndefinedCorrelationError(DiveditError, ValueError):
    """Pearson correlation is undefined (zero variance in an input)."""


class ParseError(DiveditError, ValueError):
    """An input file failed to parse.

    Carries enough context (path, line) to point at the offending input.
    """

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        prefix = ""
        if path is not None:
            prefix += str(path)
        if line is not None:
            prefix += f":{line}"
        super().__init__(f"{prefix}: {message}" if prefix else message)
