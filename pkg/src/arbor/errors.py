"""Shared exceptions and enumeration caps."""

DEFAULT_VERTEX_CAP = 10**6
DEFAULT_GROUP_CAP = 10**5


class ArborError(Exception):
    """Base class for all library errors."""


class ParseError(ArborError):
    """Malformed textual input (CLI exit code 2)."""


class PreconditionError(ArborError):
    """An operation's precondition or hypothesis failed (CLI exit code 3)."""


class DegreeMismatch(PreconditionError):
    """Operands live on trees of different degree."""


class CapExceeded(ArborError):
    """An enumeration would exceed its configured cap (CLI exit code 4)."""
