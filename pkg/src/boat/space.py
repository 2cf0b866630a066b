"""Bounded continuous design spaces."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ArgumentError


@dataclass(frozen=True)
class Variable:
    """One named, bounded design variable.

    ``unit`` is informational only; all arithmetic happens in the variable's
    native units.
    """

    name: str
    lower: float
    upper: float
    unit: str = ""

    def __post_init__(self):
        if not self.name:
            raise ArgumentError("variable name must be non-empty")
        if not (np.isfinite(self.lower) and np.isfinite(self.upper)):
            raise ArgumentError(f"bounds of {self.name!r} must be finite")
        if not self.lower < self.upper:
            raise ArgumentError(
                f"variable {self.name!r} requires lower < upper, "
                f"got [{self.lower}, {self.upper}]"
            )


@dataclass(frozen=True)
class DesignSpace:
    """An axis-aligned box of named continuous design variables."""

    variables: tuple[Variable, ...] = field(default_factory=tuple)

    def __post_init__(self):
        if len(self.variables) == 0:
            raise ArgumentError("design space needs at least one variable")
        names = [v.name for v in self.variables]
        if len(set(names)) != len(names):
            raise ArgumentError(f"variable names must be unique, got {names}")
        object.__setattr__(self, "variables", tuple(self.variables))

    @property
    def dimension(self) -> int:
        return len(self.variables)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(v.name for v in self.variables)

    @property
    def lower(self) -> np.ndarray:
        return np.array([v.lower for v in self.variables])

    @property
    def upper(self) -> np.ndarray:
        return np.array([v.upper for v in self.variables])

    def contains(self, points, atol=None) -> np.ndarray:
        """Boolean mask of rows lying inside the box (within ``atol``).

        The default tolerance is a tiny relative slack so points sitting
        exactly on a bound survive round-tripping through text formats.
        """
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        if atol is None:
            atol = 1e-9 * np.maximum.reduce(
                [np.abs(self.lower), np.abs(self.upper), np.ones(self.dimension)]
            )
        lo = self.lower - atol
        hi = self.upper + atol
        return np.all((pts >= lo) & (pts <= hi), axis=1)

    def clip(self, points) -> np.ndarray:
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        return np.clip(pts, self.lower, self.upper)

    @classmethod
    def from_bounds(cls, names, lower, upper, units=None) -> "DesignSpace":
        units = units or [""] * len(names)
        return cls(
            tuple(
                Variable(n, float(lo), float(hi), u)
                for n, lo, hi, u in zip(names, lower, upper, units)
            )
        )

    def to_dict(self) -> dict:
        return {
            "variables": [
                {"name": v.name, "lower": v.lower, "upper": v.upper, "unit": v.unit}
                for v in self.variables
            ]
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "DesignSpace":
        try:
            variables = tuple(
                Variable(v["name"], float(v["lower"]), float(v["upper"]),
                         v.get("unit", ""))
                for v in doc["variables"]
            )
        except (KeyError, TypeError) as exc:
            raise ArgumentError(f"malformed design-space document: {exc}") from exc
        return cls(variables)
