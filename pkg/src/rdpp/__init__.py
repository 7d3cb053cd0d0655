"""Numerical workbench for the indirect Rényi rate-distortion-perception-privacy problem."""

from .errors import (
    AbsoluteContinuityError,
    CapacityError,
    DomainError,
    PrecisionError,
    ShapeError,
)
from .renyi import (
    DiscreteChannel,
    DiscretePmf,
    renyi_divergence,
    renyi_entropy,
    sibson_mi,
    sibson_optimizer,
)

__all__ = [
    "AbsoluteContinuityError",
    "CapacityError",
    "DiscreteChannel",
    "DiscretePmf",
    "DomainError",
    "PrecisionError",
    "ShapeError",
    "renyi_divergence",
    "renyi_entropy",
    "sibson_mi",
    "sibson_optimizer",
]

__version__ = "0.1.0"
