"""Error taxonomy shared across the library and mapped to CLI exit codes."""


class InvalidParameterError(ValueError):
    """Caller passed parameters outside an operation's domain."""


class NumericalFailureError(RuntimeError):
    """A solver failed to converge or a numerical sanity check tripped."""

    def __init__(self, message: str, residual: float | None = None):
        super().__init__(message)
        self.residual = residual


class ResourceLimitError(RuntimeError):
    """A requested object would exceed the configured memory budget."""


class DegenerateSampleError(RuntimeError):
    """A random sample fell in a measure-zero degenerate set (flagged, not fatal)."""
