"""Exception hierarchy shared by all bdfield modules.

The CLI maps these onto process exit codes, so new error conditions
should reuse one of the categories below instead of raising bare
builtins.
"""


class BdfError(Exception):
    """Base class for all bdfield errors."""


class InvalidArgumentError(BdfError, ValueError):
    """An argument violates a documented precondition."""


class CapacityError(BdfError):
    """A requested computation exceeds a configured size cap."""


class NumericalError(BdfError):
    """A linear-algebra operation failed beyond recovery (e.g. a
    precision matrix that stays indefinite after jitter escalation)."""


class DataError(BdfError):
    """Input data is missing, malformed, or inconsistent."""


class FieldIOError(DataError):
    """A saved field file cannot be read (corrupt, truncated, or from
    an unsupported format version)."""
