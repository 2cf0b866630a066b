"""Input validation helpers shared by the estimators and the campaign engine.

These mirror the scikit-learn ``check_array`` idiom but raise this package's
:class:`~boat.errors.ArgumentError` so callers get one consistent error type.
"""

from __future__ import annotations

import numpy as np

from .errors import ArgumentError


def as_matrix(x, name: str = "X", *, n_cols: int | None = None) -> np.ndarray:
    """Coerce to a 2-D float array, checking finiteness and column count."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(1, -1)
    if arr.ndim != 2:
        raise ArgumentError(f"{name} must be 2-dimensional, got ndim={arr.ndim}")
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite values")
    if n_cols is not None and arr.shape[1] != n_cols:
        raise ArgumentError(
            f"{name} has {arr.shape[1]} columns, expected {n_cols}"
        )
    return arr


def as_vector(x, name: str = "y", *, length: int | None = None) -> np.ndarray:
    """Coerce to a 1-D float array, checking finiteness and length."""
    arr = np.asarray(x, dtype=float).ravel()
    if not np.all(np.isfinite(arr)):
        raise ArgumentError(f"{name} contains non-finite values")
    if length is not None and arr.size != length:
        raise ArgumentError(f"{name} has length {arr.size}, expected {length}")
    return arr


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise ArgumentError(f"{name} must be a finite positive number, got {value}")
    return value


def check_non_negative(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value < 0:
        raise ArgumentError(f"{name} must be finite and >= 0, got {value}")
    return value


def check_choice(value: str, name: str, choices: tuple[str, ...]) -> str:
    if value not in choices:
        raise ArgumentError(f"{name} must be one of {choices}, got {value!r}")
    return value
