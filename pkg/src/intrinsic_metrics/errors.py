"""Exception types shared across the package."""


class ParameterError(ValueError):
    """An argument violates an operation's preconditions."""


class NumericalError(ArithmeticError):
    """A numerical routine failed to converge or produced an unusable value.

    ``diagnostics`` carries whatever state helps explain the failure.
    """

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class ConsistencyError(NumericalError):
    """Two independent evaluations of the same closed form disagree."""


class DegenerateScalingError(NumericalError):
    """The missed-volume estimate leaves no admissible shrink factor."""
