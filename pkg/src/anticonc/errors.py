"""Exception hierarchy shared by the library and the CLI."""


class AnticoncError(Exception):
    """Base class for all library errors."""


class InvalidInputError(AnticoncError, ValueError):
    """An argument violates an operation's precondition."""


class ArchitectureParseError(AnticoncError, ValueError):
    """An architecture document is not well-formed."""

    def __init__(self, message, line=None, column=None):
        if line is not None:
            message = f"{message} (line {line}, column {column})"
        super().__init__(message)
        self.line = line
        self.column = column


class ArchitectureValidationError(InvalidInputError):
    """A parsed architecture violates a layout invariant."""


class ResourceLimitError(AnticoncError, RuntimeError):
    """The requested problem size exceeds a configured cap."""


class InconsistencyError(AnticoncError, ArithmeticError):
    """A numerical invariant of the engine is violated beyond tolerance."""
