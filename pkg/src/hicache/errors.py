"""Errors Module.

All exceptions raised deliberately by the HiCache package derive from ``HiCacheError``,
so the CLI can turn them into a one-line message and a non-zero exit code.
"""

from typing import Optional


class HiCacheError(Exception):
    """Base class of every HiCache domain error."""


class ConfigurationError(HiCacheError, ValueError):
    """Raised for invalid configuration values (σ, orders, intervals, generator parameters)."""


class InvalidFeatureError(HiCacheError, ValueError):
    """Raised when a feature vector is malformed: wrong shape, wrong dimension or non-finite."""


class CacheStateError(HiCacheError):
    """Raised when an operation is not allowed in the current state of a derivative cache."""


class NumericOverflowError(HiCacheError, ArithmeticError):
    """Raised when a prediction becomes non-finite.

    Attributes:
        order (int): The expansion order whose term produced the non-finite value.
    """

    def __init__(self, order: int, message: Optional[str] = None) -> None:
        """Initializes the exception.

        Args:
            order (int): The offending expansion order.
            message (Optional[str]): Optional custom message.
        """
        self.order: int = order
        super().__init__(message or f"Prediction became non-finite at order {order}")


class OracleError(HiCacheError):
    """Raised when the feature oracle fails or returns an unusable feature.

    Attributes:
        timestep (int): The timestep that was requested from the oracle.
    """

    def __init__(self, timestep: int, message: str) -> None:
        self.timestep: int = timestep
        super().__init__(timestep, message)

    def __str__(self) -> str:
        return f"Oracle failed at t={self.args[0]}: {self.args[1]}"


class TraceFormatError(HiCacheError):
    """Raised when a trace file cannot be parsed.

    Attributes:
        position (Optional[int]): Byte offset (binary traces) or 1-based line number (CSV).
        unit (str): ``"byte"`` or ``"line"``.
    """

    def __init__(self, message: str, position: Optional[int] = None, unit: str = "byte") -> None:
        self.position: Optional[int] = position
        self.unit: str = unit
        location = f" at {unit} {position}" if position is not None else ""
        super().__init__(f"{message}{location}")


class InsufficientDataError(HiCacheError):
    """Raised when a trajectory or sample set is too small for the requested analysis."""


class SingularCovarianceError(HiCacheError):
    """Raised when a sample covariance cannot be whitened.

    Attributes:
        condition (float): Condition-number estimate of the covariance (``inf`` if singular).
    """

    def __init__(self, condition: float, message: Optional[str] = None) -> None:
        self.condition: float = condition
        super().__init__(
            message
            or f"Sample covariance is singular or ill-conditioned (cond ~ {condition:.3e})"
        )
