"""Exception hierarchy shared by all modules."""


class FracDecompError(Exception):
    """Base class for library errors."""


class DomainError(FracDecompError, ValueError):
    """Argument outside the mathematical domain of an operation."""


class ResourceError(FracDecompError, RuntimeError):
    """Requested dense/exact computation exceeds the configured size guard."""


class UnsupportedError(FracDecompError, NotImplementedError):
    """Parameter combination that is deliberately not implemented."""


class PreconditionError(FracDecompError, ValueError):
    """Input violates a structural precondition (e.g. local balance)."""


class ParseError(FracDecompError, ValueError):
    """Malformed text input."""


class ValidityError(FracDecompError, ValueError):
    """Well-formed input that violates the latin property."""

    def __init__(self, message, conflict=None):
        super().__init__(message)
        self.conflict = conflict
