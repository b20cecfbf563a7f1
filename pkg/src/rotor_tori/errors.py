"""Exception hierarchy shared by all modules.

Exit-code mapping used by the CLI: config errors -> 2, resonance and
truncation -> 3, resource caps -> 4, acceptance failures -> 5.
"""


class RotorToriError(Exception):
    """Base class for all package errors."""


class ConfigError(RotorToriError):
    """Invalid configuration value or malformed input file."""


class PotentialFormatError(ConfigError):
    """Malformed potential specification."""


class DomainError(RotorToriError):
    """Argument outside an operation's mathematical domain."""


class ResonanceError(RotorToriError):
    """An exactly vanishing divisor omega . nu was encountered."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class TruncationError(RotorToriError):
    """A computation needs data beyond the computed truncation depth."""


class ResourceLimitError(RotorToriError):
    """An enumeration exceeded its configured cap."""

    def __init__(self, message, partial_count=None):
        super().__init__(message)
        self.partial_count = partial_count
