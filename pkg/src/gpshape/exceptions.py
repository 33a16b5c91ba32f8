"""Exception types shared across the package."""


class UnsupportedDerivativeError(ValueError):
    """A kernel derivative order exceeds the family's smoothness class."""


class ConditioningError(RuntimeError):
    """A symmetric factorization failed even after the jitter policy."""


class InfeasibleSystemError(RuntimeError):
    """No feasible point exists (or was supplied) for an inequality system."""

    def __init__(self, message: str, row: int | None = None):
        super().__init__(message)
        self.row = row


class IterationLimitError(RuntimeError):
    """An iterative solver exceeded its iteration budget."""


class SamplerStallError(RuntimeError):
    """Rejection sampling made no usable progress; carries diagnostics."""

    def __init__(self, message: str, proposals: int = 0, accepted: int = 0):
        super().__init__(message)
        self.proposals = proposals
        self.accepted = accepted


class ConfigurationError(ValueError):
    """Inconsistent model, constraint, or experiment configuration."""
