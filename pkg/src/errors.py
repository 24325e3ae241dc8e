"""Exception hierarchy shared by every package.

The CLI maps each family to an exit code (see ``src.main``).
"""


class MMDTError(Exception):
    """Base class for all errors raised by mmdt."""


class UsageError(MMDTError):
    """Bad command-line usage."""


class ConfigError(MMDTError):
    """Invalid configuration value or unknown configuration key."""


class DataFormatError(MMDTError):
    """Malformed manifest, image, checkpoint, or mismatched inputs."""


class NumericError(MMDTError):
    """Non-finite values or a failed gradient check."""
