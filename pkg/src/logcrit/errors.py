class DomainError(ValueError):
    """Input outside the domain of an operation (bad radius, grid mismatch, ...)."""


class PreconditionError(ValueError):
    """Hypotheses of an operation are not met by the parameters or state."""


class NumericError(RuntimeError):
    """An iterative method failed to converge or broke down."""

    def __init__(self, msg, trace=None):
        super().__init__(msg)
        self.trace = trace
