"""Exception hierarchy shared by all modules.

Each class maps to one CLI exit code, see cli.EXIT_CODES.
"""


class FanozetaError(Exception):
    """Base class for all errors raised by this package."""


class InputError(FanozetaError):
    """Malformed or inconsistent user input (bad prime, bad monomial, ...)."""


class PartialDataError(InputError):
    """An operation needed more count data than the report contains."""


class NoRationalLineError(FanozetaError):
    """The cubic contains no line over the requested base field."""


class ResourceError(FanozetaError):
    """An enumeration or table would exceed the configured budget."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class InvariantError(FanozetaError):
    """An internal consistency check failed; indicates a bug or corrupt data."""
