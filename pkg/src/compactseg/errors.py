"""Exception types shared across the package."""


class CompactSegError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CompactSegError, ValueError):
    """Invalid parameter combination (connectivity, sigma length, ...)."""


class InputError(CompactSegError, ValueError):
    """Input data outside the accepted domain."""


class FormatError(CompactSegError, ValueError):
    """Malformed file contents."""


class SolverError(CompactSegError, RuntimeError):
    """Iterative linear solver failed to reach its tolerance."""

    def __init__(self, message, residual=float("nan"), iterations=0):
        super().__init__(message)
        self.residual = residual
        self.iterations = iterations
        self.trace = None
