"""Small argument-checking helpers shared across the package."""

from __future__ import annotations

from typing import Sequence

import numpy as np


def require(condition: bool, message: str) -> None:
    """Raise ValueError with *message* unless *condition* holds."""
    if not condition:
        raise ValueError(message)


def as_float_array(values, name: str = "values") -> np.ndarray:
    """Coerce a 1-D numeric sequence to a float64 array.

    Rejects empty input, NaN and infinities, which silently poison every
    downstream computation if let through.
    """
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise ValueError(f"{name} must not be empty")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains NaN or infinite entries")
    return arr


def check_fraction(value: float, name: str) -> float:
    value = float(value)
    require(0.0 <= value <= 1.0, f"{name} must lie in [0, 1], got {value}")
    return value


def check_positive(value: float, name: str) -> float:
    value = float(value)
    require(value > 0.0, f"{name} must be positive, got {value}")
    return value


def check_non_negative(value: float, name: str) -> float:
    value = float(value)
    require(value >= 0.0, f"{name} must be non-negative, got {value}")
    return value


def check_sequence_non_negative(values: Sequence[float], name: str) -> None:
    for i, v in enumerate(values):
        if v < 0.0:
            raise ValueError(f"{name}[{i}] must be non-negative, got {v}")
