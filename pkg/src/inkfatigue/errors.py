"""Exception hierarchy shared across the package.

Everything raised on bad data derives from :class:`InkError` so callers can
catch one type at pipeline boundaries (the CLI maps it to exit code 1).
"""


class InkError(Exception):
    """Base class for all domain errors raised by this package."""


class FormatError(InkError):
    """A task file (or profile/config file) is malformed.

    Carries the 1-based line number of the offending line when known.
    """

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class RangeError(InkError):
    """A value lies outside its documented range (channel, parameter, p-value)."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class TooShortError(InkError):
    """A signal or series has fewer samples than the operation requires."""


class EmptyInputError(InkError):
    """An operation received an empty series or an empty pair list."""


class ShapeError(InkError):
    """Paired series have mismatched lengths."""


class DuplicateError(InkError):
    """Two records share the same (subject, set, task) key."""


class InsufficientDataError(InkError):
    """A paired comparison has no subject with both required records."""


class ConfigError(InkError):
    """A generator profile or run configuration is invalid."""
