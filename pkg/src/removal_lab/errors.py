"""Exception hierarchy shared by every module of the lab."""


class RemovalLabError(Exception):
    """Base class for all lab errors."""


class ValidationError(RemovalLabError, ValueError):
    """Bad input: maps to CLI exit status 2."""


class InvalidPointError(ValidationError):
    pass


class DimensionError(ValidationError):
    pass


class InvalidBasisError(ValidationError):
    pass


class DomainError(ValidationError):
    pass


class UnsupportedError(ValidationError):
    pass


class PreconditionError(ValidationError):
    pass


class ParseError(ValidationError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InvariantError(RemovalLabError):
    """An internal consistency check failed; always a bug or a bad construction input."""


class NonUnimodalError(RemovalLabError):
    pass


class ScheduleError(RemovalLabError):
    pass


class CapacityError(RemovalLabError):
    """Problem too large for the configured limits: maps to CLI exit status 3."""

    def __init__(self, message, count=None):
        self.count = count
        super().__init__(message)


class BudgetExhausted(CapacityError):
    pass
