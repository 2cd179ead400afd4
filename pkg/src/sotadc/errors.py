"""Exception types shared across the package."""


class SotAdcError(Exception):
    """Base class for all package errors."""


class DomainError(SotAdcError, ValueError):
    """An argument is outside the physical or mathematical domain."""


class SingularityError(DomainError):
    pass


class RangeError(SotAdcError, IndexError):
    pass


class StateError(SotAdcError, RuntimeError):
    """Operation attempted in the wrong phase of the reset/convert cycle."""


class SingularFitError(SotAdcError, ValueError):
    pass


class MissingCodeError(SotAdcError, ValueError):
    def __init__(self, code, message=None):
        self.code = code
        super().__init__(message or f"code {code} never reached in sweep")


class OrderingError(SotAdcError, ValueError):
    pass


class InputError(SotAdcError, ValueError):
    """Malformed or invalid input file content."""

    def __init__(self, message, path=None, line=None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:{line}: " if line is not None else f"{path}: "
        super().__init__(where + message)
