"""Exception hierarchy shared by every module of the package."""


class IPMError(Exception):
    """Base class for all errors raised by holderipm."""


class SizeError(IPMError, ValueError):
    """A problem exceeds a configured size cap."""

    def __init__(self, message, size=None):
        super().__init__(message)
        self.size = size


class UnsupportedSmoothnessError(IPMError, ValueError):
    """Exact computation was requested for smoothness alpha > 1."""


class NumericError(IPMError, RuntimeError):
    """A solver failed to reach a certified optimum."""


class DataError(IPMError, ValueError):
    """Input data cannot be processed (bad weights, nonpositive means, ...)."""


class ConfigError(IPMError, ValueError):
    """A configuration file or flag set is invalid."""
