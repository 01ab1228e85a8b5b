"""Shared exception types.

Everything derives from ValueError so callers can catch bad input uniformly;
the subclasses exist to make intent visible at raise sites and in tests.
"""


class SizeLimitError(ValueError):
    """A requested computation exceeds a documented hard size cap."""


class TruncationError(ValueError):
    """An operator application would leave the truncated tensor algebra."""


class NonPairClassError(ValueError):
    """A tuple's equivalence class is not a perfect pairing."""


class ValidationError(ValueError):
    """One or more configuration fields are invalid; message lists all of them."""
