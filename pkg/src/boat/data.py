"""Observed designs and outputs, with per-output roles."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ArgumentError, ValidationError
from .space import DesignSpace

SENSES = ("maximize", "minimize")
DIRECTIONS = ("le", "ge")


@dataclass(frozen=True)
class ObjectiveSpec:
    """Marks one output column as an objective with an optimization sense."""

    output_index: int
    sense: str = "maximize"
    name: str = ""

    def __post_init__(self):
        if self.sense not in SENSES:
            raise ArgumentError(f"sense must be one of {SENSES}, got {self.sense!r}")
        if self.output_index < 0:
            raise ArgumentError("output_index must be >= 0")

    def to_dict(self) -> dict:
        return {
            "output_index": self.output_index,
            "sense": self.sense,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ObjectiveSpec":
        return cls(
            output_index=int(doc["output_index"]),
            sense=doc.get("sense", "maximize"),
            name=doc.get("name", ""),
        )


@dataclass(frozen=True)
class ConstraintSpec:
    """Marks one output column as a black-box constraint against a threshold.

    ``direction="le"`` means the output must stay at or below ``threshold``;
    ``"ge"`` mirrors it.
    """

    output_index: int
    threshold: float
    direction: str = "le"
    name: str = ""

    def __post_init__(self):
        if self.direction not in DIRECTIONS:
            raise ArgumentError(
                f"direction must be one of {DIRECTIONS}, got {self.direction!r}"
            )
        if not np.isfinite(self.threshold):
            raise ArgumentError("threshold must be finite")
        if self.output_index < 0:
            raise ArgumentError("output_index must be >= 0")

    def satisfied(self, values) -> np.ndarray:
        values = np.asarray(values, dtype=float)
        if self.direction == "le":
            return values <= self.threshold
        return values >= self.threshold

    def to_dict(self) -> dict:
        return {
            "output_index": self.output_index,
            "threshold": self.threshold,
            "direction": self.direction,
            "name": self.name,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "ConstraintSpec":
        return cls(
            output_index=int(doc["output_index"]),
            threshold=float(doc["threshold"]),
            direction=doc.get("direction", "le"),
            name=doc.get("name", ""),
        )


class Dataset:
    """An n-by-d matrix of design points and an n-by-m matrix of outputs.

    Points are stored in original units. Rows are append-only; replicate
    points are allowed (the surrogate's noise model absorbs them).
    """

    def __init__(self, points, outputs, output_names=None, space: DesignSpace | None = None):
        points = np.asarray(points, dtype=float)
        outputs = np.asarray(outputs, dtype=float)
        if points.ndim != 2:
            raise ArgumentError("points must be a 2-D array")
        if outputs.ndim != 2:
            raise ArgumentError("outputs must be a 2-D array")
        if points.shape[0] != outputs.shape[0]:
            raise ArgumentError(
                f"points has {points.shape[0]} rows but outputs has {outputs.shape[0]}"
            )
        if points.size and not np.all(np.isfinite(points)):
            raise ValidationError("points contain non-finite values")
        if outputs.size and not np.all(np.isfinite(outputs)):
            raise ValidationError("outputs contain missing or non-finite values")
        if space is not None:
            if points.shape[1] != space.dimension:
                raise ArgumentError(
                    f"points have {points.shape[1]} columns, space has "
                    f"{space.dimension} variables"
                )
            inside = space.contains(points) if len(points) else np.array([], bool)
            if len(points) and not np.all(inside):
                bad = np.flatnonzero(~inside).tolist()
                raise ValidationError(
                    f"rows {bad} lie outside the design-space bounds"
                )
        if output_names is None:
            output_names = tuple(f"y_{j}" for j in range(outputs.shape[1]))
        output_names = tuple(str(n) for n in output_names)
        if len(output_names) != outputs.shape[1]:
            raise ArgumentError(
                f"{len(output_names)} output names for {outputs.shape[1]} columns"
            )
        self.points = points
        self.points.setflags(write=False)
        self.outputs = outputs
        self.outputs.setflags(write=False)
        self.output_names = output_names

    @classmethod
    def empty(cls, n_inputs: int, output_names=("y_0",)) -> "Dataset":
        names = tuple(output_names)
        return cls(
            np.empty((0, n_inputs)), np.empty((0, len(names))), names
        )

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dimension(self) -> int:
        return self.points.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.outputs.shape[1]

    def append(self, points, outputs, space: DesignSpace | None = None) -> "Dataset":
        """Return a new dataset with rows appended (original rows first)."""
        points = np.atleast_2d(np.asarray(points, dtype=float))
        outputs = np.atleast_2d(np.asarray(outputs, dtype=float))
        if points.shape[0] == 0:
            return self
        new = Dataset(points, outputs, self.output_names, space)
        if new.dimension != self.dimension:
            raise ArgumentError("appended rows have a different dimension")
        return Dataset(
            np.vstack([self.points, new.points]),
            np.vstack([self.outputs, new.outputs]),
            self.output_names,
        )

    def column(self, index_or_name) -> np.ndarray:
        """One output column, by position or by name."""
        if isinstance(index_or_name, str):
            try:
                index_or_name = self.output_names.index(index_or_name)
            except ValueError:
                raise ArgumentError(
                    f"unknown output {index_or_name!r}; have {self.output_names}"
                ) from None
        return self.outputs[:, index_or_name]

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Dataset)
            and self.output_names == other.output_names
            and self.points.shape == other.points.shape
            and np.array_equal(self.points, other.points)
            and np.array_equal(self.outputs, other.outputs)
        )

    def __repr__(self) -> str:
        return (
            f"Dataset(n={self.n}, d={self.dimension}, outputs={self.output_names})"
        )
