"""CSV ingestion and campaign persistence.

Tables move between the lab and the optimizer as plain CSV with a header
row: named input columns in design-space units plus named output columns.
Parsing is strict and locale independent: decimal point only, no thousands
separators or underscores, no non-finite values.  Numbers are written with
full round-trip precision so a saved table reloads bit for bit.

Campaign snapshots persist as a single JSON document versioned with a
``schema_version`` integer.  Writes go to a temporary file in the same
directory followed by an atomic rename, so a crash never leaves a partial
campaign file, and saves can be guarded by a revision compare-and-swap to
surface concurrent writers instead of silently losing one of them.
"""

from __future__ import annotations

import contextlib
import csv
import io
import json
import os
import re
import tempfile
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .campaign import CampaignState
from .data import Dataset
from .errors import (
    ArgumentError,
    MigrationError,
    ParseError,
    RevisionConflictError,
    SchemaError,
)
from .space import DesignSpace
from .validation import check_choice

SCHEMA_VERSION = 1
OUTPUT_ROLES = ("objective", "constraint", "auxiliary")

# Plain decimal or scientific notation only. Rejects nan/inf, underscores,
# thousands separators, and hex floats, all of which float() would accept.
_NUMBER = re.compile(r"^[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")
_INTEGER = re.compile(r"^\d+$")

_CAMPAIGN_FIELDS = frozenset(
    {
        "schema_version",
        "space",
        "data",
        "objectives",
        "constraints",
        "acquisition",
        "fit",
        "budget",
        "pending",
        "history",
        "seed",
        "revision",
    }
)


@dataclass(frozen=True)
class CsvSchema:
    """Named, ordered input and output columns of a campaign table.

    ``roles``, when given, labels each output column as an objective, a
    constraint, or auxiliary data carried along for reporting.
    """

    input_columns: tuple
    output_columns: tuple = ()
    roles: tuple | None = None
    delimiter: str = ","

    def __post_init__(self):
        object.__setattr__(self, "input_columns", tuple(self.input_columns))
        object.__setattr__(self, "output_columns", tuple(self.output_columns))
        if not self.input_columns:
            raise ArgumentError("schema needs at least one input column")
        overlap = set(self.input_columns) & set(self.output_columns)
        if overlap:
            raise ArgumentError(
                f"columns cannot be both input and output: {sorted(overlap)}"
            )
        for group in (self.input_columns, self.output_columns):
            if len(set(group)) != len(group):
                raise ArgumentError(f"duplicate column names in {group}")
        if self.roles is not None:
            roles = tuple(self.roles)
            if len(roles) != len(self.output_columns):
                raise ArgumentError(
                    f"{len(roles)} roles for {len(self.output_columns)} "
                    "output columns"
                )
            for role in roles:
                check_choice(role, "role", OUTPUT_ROLES)
            object.__setattr__(self, "roles", roles)
        if len(self.delimiter) != 1:
            raise ArgumentError("delimiter must be a single character")


def _parse_number(cell: str, row: int, column: str) -> float:
    text = cell.strip()
    if not _NUMBER.match(text):
        raise ParseError(
            f"data row {row}, column {column!r}: cannot parse {cell!r} "
            "as a number"
        )
    return float(text)


def _read_rows(path, delimiter: str):
    with open(path, encoding="utf-8-sig", newline="") as handle:
        reader = csv.reader(handle, delimiter=delimiter)
        rows = [row for row in reader if any(cell.strip() for cell in row)]
    if not rows:
        raise SchemaError(f"{path}: file has no header row")
    header = [cell.strip() for cell in rows[0]]
    if len(set(header)) != len(header):
        seen = {h for h in header if header.count(h) > 1}
        raise SchemaError(f"{path}: duplicate columns {sorted(seen)}")
    return header, rows[1:]


def load_csv(path, schema: CsvSchema, space: DesignSpace, on_out_of_bounds="error") -> Dataset:
    """Read a campaign table, validating cells against schema and space.

    Rows keep their file order.  ``on_out_of_bounds`` is ``"error"`` to
    reject inputs outside the design space or ``"clamp"`` to clip them to
    the bounds with a warning.
    """
    check_choice(on_out_of_bounds, "on_out_of_bounds", ("error", "clamp"))
    header, rows = _read_rows(path, schema.delimiter)
    wanted = list(schema.input_columns) + list(schema.output_columns)
    missing = [name for name in wanted if name not in header]
    if missing:
        raise SchemaError(
            f"{path}: missing columns {missing}; file has {header}"
        )
    where = {name: header.index(name) for name in wanted}
    points = np.empty((len(rows), len(schema.input_columns)))
    outputs = np.empty((len(rows), len(schema.output_columns)))
    for i, row in enumerate(rows):
        if len(row) != len(header):
            raise ParseError(
                f"data row {i + 1} has {len(row)} cells, expected {len(header)}"
            )
        for j, name in enumerate(schema.input_columns):
            points[i, j] = _parse_number(row[where[name]], i + 1, name)
        for j, name in enumerate(schema.output_columns):
            outputs[i, j] = _parse_number(row[where[name]], i + 1, name)
    if on_out_of_bounds == "clamp" and len(points):
        clipped = np.clip(points, space.lower, space.upper)
        moved = np.flatnonzero(np.any(clipped != points, axis=1))
        if moved.size:
            warnings.warn(
                f"clamped {moved.size} out-of-bounds rows "
                f"(data rows {[int(i) + 1 for i in moved]}) to the "
                "design-space bounds"
            )
        points = clipped
    return Dataset(points, outputs, schema.output_columns, space=space)


def _format_number(value: float) -> str:
    return repr(float(value))


def _atomic_write_text(path: Path, text: str) -> None:
    fd, tmp = tempfile.mkstemp(
        dir=str(path.parent) or ".", prefix=f".{path.name}.", suffix=".tmp"
    )
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
            handle.flush()
            os.fsync(handle.fileno())
        os.replace(tmp, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp)
        raise


def save_csv(path, space: DesignSpace, dataset: Dataset, delimiter: str = ",") -> None:
    """Write a dataset as CSV with full round-trip numeric precision."""
    if dataset.dimension != space.dimension:
        raise ArgumentError("dataset and space disagree on dimension")
    buffer = io.StringIO()
    writer = csv.writer(buffer, delimiter=delimiter, lineterminator="\n")
    writer.writerow(list(space.names) + list(dataset.output_names))
    for x_row, y_row in zip(dataset.points, dataset.outputs):
        writer.writerow([_format_number(v) for v in (*x_row, *y_row)])
    _atomic_write_text(Path(path), buffer.getvalue())


def save_campaign(state: CampaignState) -> dict:
    """The campaign as a plain JSON-ready document."""
    return {"schema_version": SCHEMA_VERSION, **state.to_dict()}


def load_campaign(document) -> CampaignState:
    """Rebuild a campaign from its persisted document.

    Unknown fields are ignored with a warning so documents written by a
    newer build with additive fields still load; a different
    ``schema_version`` is refused outright.
    """
    if not isinstance(document, dict):
        raise ParseError("campaign document must be a JSON object")
    if "schema_version" not in document:
        raise ParseError("campaign document has no schema_version")
    version = document["schema_version"]
    if version != SCHEMA_VERSION:
        raise MigrationError(
            f"campaign document has schema_version {version}, but this "
            f"build reads schema_version {SCHEMA_VERSION}"
        )
    unknown = sorted(set(document) - _CAMPAIGN_FIELDS)
    if unknown:
        warnings.warn(f"ignoring unknown campaign fields: {unknown}")
    missing = sorted(_CAMPAIGN_FIELDS - set(document) - {"schema_version"})
    if missing:
        raise ParseError(f"campaign document is missing fields: {missing}")
    try:
        return CampaignState.from_dict(document)
    except (KeyError, TypeError) as exc:
        raise ParseError(f"campaign document is malformed: {exc}") from exc


def save_campaign_file(path, state: CampaignState, expected_revision=None) -> None:
    """Persist a campaign atomically, optionally guarded by a revision check.

    ``expected_revision`` is the revision the caller loaded before making
    changes; if the file on disk has moved past it, another writer got
    there first and a RevisionConflictError carrying the current revision
    is raised instead of overwriting their work.
    """
    path = Path(path)
    if expected_revision is not None:
        if not path.exists():
            raise RevisionConflictError(
                f"{path}: expected revision {expected_revision} but the "
                "campaign file does not exist",
                current_revision=None,
            )
        current = load_campaign_file(path).revision
        if current != expected_revision:
            raise RevisionConflictError(
                f"{path}: expected revision {expected_revision} but the "
                f"file is at revision {current}",
                current_revision=current,
            )
    text = json.dumps(save_campaign(state), indent=2, allow_nan=False)
    _atomic_write_text(path, text + "\n")


def load_campaign_file(path) -> CampaignState:
    with open(path, encoding="utf-8") as handle:
        try:
            document = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return load_campaign(document)


def trace_csv_text(trace, space: DesignSpace, output_names) -> str:
    """A closed-loop trace flattened to CSV, one row per evaluated point.

    The final column is the running best feasible objective value; it is
    left empty on iterations where nothing feasible had been seen yet.
    """
    output_names = tuple(output_names)
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["iteration", *space.names, *output_names, "best_so_far"]
    )
    for record in trace:
        best = record["best"]
        best_cell = _format_number(best) if np.isfinite(best) else ""
        for x_row, y_row in zip(record["points"], record["outputs"]):
            writer.writerow(
                [str(record["iteration"])]
                + [_format_number(v) for v in x_row]
                + [_format_number(v) for v in y_row]
                + [best_cell]
            )
    return buffer.getvalue()


def write_trace_csv(path, trace, space: DesignSpace, output_names) -> None:
    _atomic_write_text(Path(path), trace_csv_text(trace, space, output_names))


def save_preferences_csv(path, pairs) -> None:
    """Write preference pairs as winner/loser row-index records."""
    pairs = np.asarray(pairs, dtype=int)
    if pairs.size == 0:
        pairs = pairs.reshape(0, 2)
    if pairs.ndim != 2 or pairs.shape[1] != 2:
        raise ArgumentError("pairs must be an (m, 2) array")
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(["winner_row_index", "loser_row_index"])
    for winner, loser in pairs:
        writer.writerow([str(int(winner)), str(int(loser))])
    _atomic_write_text(Path(path), buffer.getvalue())


def load_preferences_csv(path) -> np.ndarray:
    """Read preference pairs written by save_preferences_csv."""
    header, rows = _read_rows(path, ",")
    expected = ["winner_row_index", "loser_row_index"]
    if header != expected:
        raise SchemaError(f"{path}: header must be {expected}, got {header}")
    pairs = np.empty((len(rows), 2), dtype=int)
    for i, row in enumerate(rows):
        if len(row) != 2:
            raise ParseError(
                f"data row {i + 1} has {len(row)} cells, expected 2"
            )
        for j, name in enumerate(expected):
            text = row[j].strip()
            if not _INTEGER.match(text):
                raise ParseError(
                    f"data row {i + 1}, column {name!r}: cannot parse "
                    f"{row[j]!r} as a row index"
                )
            pairs[i, j] = int(text)
    return pairs
