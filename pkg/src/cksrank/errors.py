"""Exception types shared across the package."""


class CksError(Exception):
    """Base class for every error raised deliberately by this package."""


class ParseError(CksError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class ParameterError(CksError, ValueError):
    """An argument is outside its documented domain."""


class ContractViolation(CksError, ValueError):
    """A precondition that callers are responsible for was not met."""


class SingularityError(CksError, ArithmeticError):
    """A statistic is undefined because its denominator vanishes."""
