"""Exception types shared across the package."""


class DimensionMismatchError(ValueError):
    """Structural error: operands disagree in length or component count."""


class ValidationError(ValueError):
    """A parameter or input violates a documented precondition."""


class NumericalError(RuntimeError):
    """A numerical procedure failed or an internal invariant was breached."""
