"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the requested quantity."""


class ShapeError(ValueError):
    """Alphabet sizes or array shapes do not agree."""


class AbsoluteContinuityError(DomainError):
    """A proposal measure puts zero mass where the target law does not."""


class CapacityError(RuntimeError):
    """An exact enumeration would exceed the configured term budget."""


class PrecisionError(ArithmeticError):
    """A truncated computation cannot meet the requested accuracy."""
