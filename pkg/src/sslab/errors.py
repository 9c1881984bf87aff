"""Exception hierarchy shared by all modules."""


class SSLabError(Exception):
    """Base class for all errors raised by sslab."""


class ParseError(SSLabError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


class ValidationError(SSLabError):
    """A machine or graph violates a structural invariant."""


class InadmissibleWord(SSLabError):
    """Input word is not admissible for the alphabet or subshift."""


class NeedsMoreLetters(SSLabError):
    """A rule window reaches past the end of a finite word."""

    def __init__(self, message, required=None):
        self.required = required
        if required is not None:
            message = f"{message} (need at least {required} letters)"
        super().__init__(message)


class CapExceeded(SSLabError):
    """A configured size cap was exceeded (closure, orbit, level size)."""


class NotEventuallyPeriodic(SSLabError):
    """Cycle search for an eventually periodic image did not close."""


class NonUniformMachine(SSLabError):
    """Operation requires a single stationary alphabet."""


class ConvergenceError(SSLabError):
    """Iterative solver did not reach tolerance within its iteration cap."""
