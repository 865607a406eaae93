"""Exception types shared across the toolkit.

Everything derives from TubelinkError so callers (and the CLI) can catch
data problems with one handler while programming errors propagate normally.
"""


class TubelinkError(ValueError):
    """Base class for all toolkit errors."""


class ValidationError(TubelinkError):
    """A value violates a domain invariant (bad score range, hole in a tubelet, ...)."""


class ParseError(TubelinkError):
    """A file could not be parsed. Carries path and 1-based line number when known."""

    def __init__(self, message: str, path: str | None = None, line: int | None = None):
        self.path = path
        self.line = line
        where = ""
        if path is not None:
            where = f"{path}:"
            if line is not None:
                where += f"{line}:"
            where += " "
        super().__init__(where + message)


class ContractError(TubelinkError):
    """An operation was called with arguments outside its documented precondition."""


class ConfigError(TubelinkError):
    """A model or scenario configuration file is malformed."""


class FitError(TubelinkError):
    """Model fitting received unusable training data."""
