"""Exception hierarchy shared by every rcslab engine."""


class RcsLabError(Exception):
    """Base class for all rcslab errors."""


class ValidationError(RcsLabError, ValueError):
    """A parameter or object failed validation."""


class ConfigError(RcsLabError, ValueError):
    """An experiment configuration is malformed."""


class ResourceLimitError(RcsLabError):
    """An engine cap (qubit count, exact-mode work) would be exceeded."""


class CorruptedStateError(RcsLabError):
    """A simulated state drifted beyond the hard numerical tolerance."""


class ConventionMismatchError(RcsLabError):
    """Two engines were asked to compare quantities under different conventions."""


class CliffordTypeError(RcsLabError, TypeError):
    """A non-Clifford gate was handed to the stabilizer engine."""
