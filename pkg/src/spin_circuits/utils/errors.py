"""Spin Circuits Error Handling Utilities

Custom exception classes for synthesis, simulation and mitigation with
standardized error messages and CLI exit-code mapping.
"""

from typing import Optional, Dict, Any


class SpinCircuitsError(Exception):
    """Base exception for all spin-circuits errors."""

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        """Initialize error.

        Args:
            message: Human-readable error message
            details: Optional additional error details
        """
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def __str__(self) -> str:
        if self.details:
            return f"{self.message} | Details: {self.details}"
        return self.message


class ConfigError(SpinCircuitsError, ValueError):
    """Raised when flags, config files, label strings or JSON payloads are invalid."""

    pass


class LabelError(ConfigError):
    """Raised when spin labels violate a coupling rule.

    Examples:
    - Triangle rule |l1 - l2| <= l <= l1 + l2 fails
    - Integer/half-integer parity mismatch between l and m
    - |m| > l
    """

    pass


class DimensionError(SpinCircuitsError, ValueError):
    """Raised on register size mismatches or registers too large to simulate densely."""

    pass


class DecompositionError(SpinCircuitsError):
    """Raised when a gate cannot be lowered to the native set."""

    pass


class NumericalError(SpinCircuitsError):
    """Raised when a computation is numerically ill-posed.

    Examples:
    - Checked overflow in the gate-count recursion
    - Matrix supplied as a unitary is not unitary
    """

    pass


class SingularConfusionError(NumericalError):
    """Raised when a confusion matrix is too ill-conditioned to invert."""

    pass


class MissingSettingsError(SpinCircuitsError):
    """Raised when tomography data lacks the settings a Pauli estimate needs."""

    pass


EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


def exit_code_for(exc: BaseException) -> int:
    """Convert an exception to the documented CLI exit code.

    Args:
        exc: Exception raised by a command

    Returns:
        2 for configuration problems, 3 for numerical failures, 1 otherwise
    """
    from pydantic import ValidationError

    error_map = {
        ConfigError: EXIT_CONFIG,
        DimensionError: EXIT_CONFIG,
        ValidationError: EXIT_CONFIG,
        NumericalError: EXIT_NUMERICAL,
        DecompositionError: EXIT_NUMERICAL,
        MissingSettingsError: EXIT_NUMERICAL,
    }

    for error_class, code in error_map.items():
        if isinstance(exc, error_class):
            return code
    return 1
