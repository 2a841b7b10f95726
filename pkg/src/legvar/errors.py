"""Exception types raised by legvar."""


class DomainError(ValueError):
    """Input lies outside the domain where an operation is defined."""


class NotLegendrianError(DomainError):
    pass


class DiagnosticError(RuntimeError):
    """A numerical diagnostic exceeded its tolerance."""


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
