#!/usr/bin/env python3
"""
Custom exceptions for sensor selection, solver and harness failures.
"""

from typing import Optional


class SensorSelectionError(Exception):
    """Base exception for sensor selection operations."""
    pass


class ValidationError(SensorSelectionError):
    """Exception raised when arguments or type invariants are violated."""
    pass


class DimensionMismatchError(ValidationError):
    """Exception raised when vector and matrix shapes do not agree."""
    pass


class ZeroRowError(ValidationError):
    """Exception raised when a measurement row has zero norm."""

    def __init__(self, row_index: int):
        super().__init__(f"Measurement row {row_index} has zero norm")
        self.row_index = row_index


class MessageFormatError(ValidationError):
    """Exception raised when a shared vector message cannot be decoded."""
    pass


class ConfigurationError(SensorSelectionError):
    """Exception raised for configuration issues."""
    pass


class NumericalError(SensorSelectionError):
    """Exception raised for numerical failures."""
    pass


class SingularInformationError(NumericalError):
    """Exception raised when the information matrix is not positive definite."""

    def __init__(self, smallest_pivot: float, message: Optional[str] = None):
        if message is None:
            message = (
                f"Information matrix is not positive definite "
                f"(smallest pivot {smallest_pivot:.3e})"
            )
        super().__init__(message)
        self.smallest_pivot = smallest_pivot


class BoundaryViolationError(NumericalError):
    """Exception raised when a point is outside the open unit box."""
    pass


class DegenerateReferenceError(NumericalError):
    """Exception raised when the relative gap reference is too close to zero."""
    pass


class NonConvergenceError(NumericalError):
    """Exception raised when the barrier method exhausts its iteration caps."""
    pass


class SingularKKTError(NumericalError):
    """Exception raised when the Newton KKT system cannot be solved."""
    pass


class TrialTimeoutError(NumericalError):
    """Exception raised when a solve exceeds its wall-clock deadline."""
    pass


class InformationBudgetError(SensorSelectionError):
    """Exception raised when a session transmits more or less than N*n scalars."""
    pass
