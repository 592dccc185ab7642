"""
Validation utilities for the flow map laboratory.
Provides reusable validation functions.
"""

import os
from typing import Union

import numpy as np

from .exceptions import DomainError, ValidationError


def validate_file_exists(file_path: str, file_type: str = "File") -> None:
    """
    Validate that a file exists.

    Args:
        file_path: Path to the file
        file_type: Type of file for error message

    Raises:
        ValidationError: If file doesn't exist
    """
    if not file_path or not os.path.exists(file_path):
        raise ValidationError(f"{file_type} not found: {file_path}")


def validate_positive_int(value: int, name: str) -> None:
    """
    Validate that a value is a positive integer.

    Raises:
        ValidationError: If value is not a positive integer
    """
    if isinstance(value, bool) or not isinstance(value, (int, np.integer)) or value <= 0:
        raise ValidationError(
            f"{name} must be a positive integer, got: {value}"
        )


def validate_positive(value: float, name: str) -> None:
    """Validate that a real value is finite and strictly positive."""
    if not np.isfinite(value) or value <= 0:
        raise ValidationError(f"{name} must be positive, got: {value}")


def validate_time(t: Union[float, np.ndarray], name: str = "t") -> None:
    """
    Validate that time values lie in [0, 1].

    Raises:
        DomainError: If any value is outside the unit interval or not finite
    """
    arr = np.asarray(t, dtype=float)
    if arr.size == 0:
        return
    if not np.all(np.isfinite(arr)) or arr.min() < 0.0 or arr.max() > 1.0:
        raise DomainError(
            f"{name} must lie in [0, 1], got range "
            f"[{np.nanmin(arr):.6g}, {np.nanmax(arr):.6g}]"
        )


def validate_finite(values: np.ndarray, name: str) -> None:
    """Validate that an array contains only finite entries."""
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{name} contains non-finite entries")

