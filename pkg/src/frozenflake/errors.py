"""
Exceptions and warnings raised by frozenflake.

Every error derives from :class:`SnowflakeError` and from the builtin that
best describes it, so ``except ValueError`` keeps working for callers that
do not care about the distinction.
"""

from __future__ import annotations


class SnowflakeError(Exception):
    """Base class for all frozenflake errors."""


class InvalidInputError(SnowflakeError, ValueError):
    """Input geometry is unusable (zero vector, non-finite point, wrong side)."""


class InvalidParameterError(SnowflakeError, ValueError):
    """A numeric parameter is out of its allowed range."""


class DegenerateInputError(SnowflakeError, ValueError):
    """Not enough data to compute the requested quantity."""


class TopologyError(SnowflakeError, ValueError):
    """Segments do not chain, or a junction folds back onto itself."""


class EmptyWindowError(SnowflakeError, ValueError):
    """A window ball does not meet the boundary."""


class ConfigError(SnowflakeError, ValueError):
    """Invalid run configuration."""


class ResourceLimitError(SnowflakeError, RuntimeError):
    """A leaf or chord budget would be exceeded."""

    def __init__(self, message: str, *, required: int, budget: int) -> None:
        super().__init__(f"{message} ({required} > budget {budget}); use advance_windowed")
        self.required = required
        self.budget = budget


class NumericFailureError(SnowflakeError, RuntimeError):
    """An iterative solve did not converge."""

    def __init__(self, message: str, *, residual: float) -> None:
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


class ConstructionError(SnowflakeError, RuntimeError):
    """An internal construction invariant was violated."""


# --- Warnings ---


class ResolutionWarning(UserWarning):
    """A requested radius is below the resolution of the curve."""


class WalkTimeoutWarning(UserWarning):
    """Too many walks hit the step limit."""


class InsufficientSamplesWarning(UserWarning):
    """Too few absorptions for the requested statistic."""


__all__ = [
    "ConfigError",
    "ConstructionError",
    "DegenerateInputError",
    "EmptyWindowError",
    "InsufficientSamplesWarning",
    "InvalidInputError",
    "InvalidParameterError",
    "NumericFailureError",
    "ResolutionWarning",
    "ResourceLimitError",
    "SnowflakeError",
    "TopologyError",
    "WalkTimeoutWarning",
]
