"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Invalid input: malformed matrices, out-of-range parameters, bad files."""


class DeviceTooNoisyError(ValidationError):
    """Noise resistance at or above 1: the inverse-series expansion diverges."""


class BudgetExceededError(RuntimeError):
    """A sampled run would exceed the configured draw cap.

    Carries the computed plan so callers can report the would-be cost.
    """

    def __init__(self, message, plan=None):
        super().__init__(message)
        self.plan = plan


class PropertyViolation(RuntimeError):
    """A checked mathematical property failed on a concrete instance."""
