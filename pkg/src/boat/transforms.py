"""Affine input/output transforms used around the surrogate.

Inputs are mapped linearly onto the unit hypercube so that length scales are
comparable across dimensions; outputs are shifted and scaled to zero mean and
unit variance so a zero prior mean is adequate. Both transforms round-trip
exactly up to floating point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError


@dataclass(frozen=True)
class BoxScaler:
    """Per-dimension affine map from a box onto [0, 1]^d."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lower = np.asarray(self.lower, dtype=float)
        upper = np.asarray(self.upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ArgumentError("lower/upper must be 1-D arrays of equal length")
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        # Degenerate dimensions fall back to a pure shift (scale of one).
        span = upper - lower
        span = np.where(span > 0, span, 1.0)
        object.__setattr__(self, "_span", span)

    @classmethod
    def from_bounds(cls, lower, upper) -> "BoxScaler":
        return cls(np.asarray(lower, dtype=float), np.asarray(upper, dtype=float))

    @classmethod
    def from_data(cls, X) -> "BoxScaler":
        X = np.asarray(X, dtype=float)
        return cls(X.min(axis=0), X.max(axis=0))

    def transform(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        return (X - self.lower) / self._span

    def inverse_transform(self, U) -> np.ndarray:
        U = np.asarray(U, dtype=float)
        return U * self._span + self.lower


@dataclass(frozen=True)
class Standardizer:
    """Affine map of one output column to zero mean, unit sample variance.

    Constant columns keep a unit scale so the map stays invertible.
    """

    mean: float
    scale: float

    @classmethod
    def fit(cls, y) -> "Standardizer":
        y = np.asarray(y, dtype=float).ravel()
        if y.size == 0:
            raise ArgumentError("cannot standardize an empty column")
        mean = float(np.mean(y))
        scale = float(np.std(y, ddof=1)) if y.size > 1 else 0.0
        if not scale > 0:
            scale = 1.0
        return cls(mean, scale)

    @classmethod
    def identity(cls) -> "Standardizer":
        return cls(0.0, 1.0)

    def transform(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.mean) / self.scale

    def inverse_transform(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.scale + self.mean

    def transform_variance(self, var) -> np.ndarray:
        return np.asarray(var, dtype=float) / self.scale**2

    def inverse_transform_variance(self, var) -> np.ndarray:
        return np.asarray(var, dtype=float) * self.scale**2
