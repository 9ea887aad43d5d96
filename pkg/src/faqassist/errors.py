"""Shared exception types.

The CLI maps these onto exit codes: ConfigError is a usage/configuration
problem (exit 1), DataError and its subclasses are problems with input
data (exit 2).
"""


class FaqAssistError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(FaqAssistError):
    """Invalid configuration or unusable combination of options."""


class DataError(FaqAssistError):
    """Input data violates a documented contract."""


class ParseError(DataError):
    """A raw chat export could not be parsed."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line
