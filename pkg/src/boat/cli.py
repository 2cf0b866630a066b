"""Command-line front end for the ask-tell workflow.

A campaign lives in a JSON file.  ``init`` creates it from a design-space
description, ``ask`` suggests the next batch and prints it as CSV ready to
paste into a lab notebook, ``tell`` records measured rows from a CSV file,
and ``status``/``recommend``/``pareto`` inspect the current state.
``simulate`` closes the loop against a quadratic surface fitted to the
observed data, and ``export-trace`` rewrites any campaign's observation
history as a best-so-far trace.

Exit codes: 0 on success, 2 when the input or state is at fault, 1 when
the solver itself fails.  Every verb takes ``--json`` for a machine
readable envelope; randomized verbs take ``--seed``.  Bare campaign file
names are resolved against ``$BOAT_CAMPAIGN_DIR`` when it is set.
"""

from __future__ import annotations

import csv
import functools
import io
import json
import os
import re
import sys
from dataclasses import replace
from pathlib import Path

import click
import numpy as np

from .campaign import (
    ask as ask_state,
)
from .campaign import (
    best_observed,
    fit_quadratic_oracle,
    init_campaign,
    pareto_indices,
    recommend as recommend_state,
    run_closed_loop,
    tell as tell_state,
)
from .data import ConstraintSpec, ObjectiveSpec
from .errors import (
    ArgumentError,
    BoatError,
    ConvergenceError,
    InsufficientDataError,
    MigrationError,
    NumericalError,
    OptimizationError,
    ParseError,
    RevisionConflictError,
    SchemaError,
    ValidationError,
)
from .space import DesignSpace
from .storage import (
    CsvSchema,
    _atomic_write_text,
    load_campaign_file,
    load_csv,
    save_campaign_file,
    trace_csv_text,
    write_trace_csv,
)

_ERROR_CODES = [
    (ValidationError, "validation", 2),
    (SchemaError, "schema", 2),
    (ParseError, "parse", 2),
    (MigrationError, "migration", 2),
    (RevisionConflictError, "conflict", 2),
    (InsufficientDataError, "insufficient_data", 2),
    (ArgumentError, "argument", 2),
    (NumericalError, "numerical", 1),
    (ConvergenceError, "convergence", 1),
    (OptimizationError, "optimization", 1),
    (BoatError, "internal", 1),
    (OSError, "argument", 2),
]

_STRATEGY_ALIASES = {
    "qei": "joint_qei",
    "joint_qei": "joint_qei",
    "liar": "constant_liar",
    "constant_liar": "constant_liar",
    "penalization": "local_penalization",
    "local_penalization": "local_penalization",
}

_CONSTRAINT = re.compile(r"^\s*([A-Za-z_]\w*)\s*(<=|>=)\s*(\S+)\s*$")


def _classify(exc):
    for klass, code, status in _ERROR_CODES:
        if isinstance(exc, klass):
            return code, status
    return "internal", 1


def _guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (BoatError, OSError) as exc:
            code, status = _classify(exc)
            if kwargs.get("as_json"):
                click.echo(
                    json.dumps(
                        {
                            "ok": False,
                            "error": {"code": code, "message": str(exc)},
                        }
                    )
                )
            else:
                click.echo(f"error ({code}): {exc}", err=True)
            sys.exit(status)

    return wrapper


def _resolve(name: str) -> Path:
    path = Path(name)
    if path.is_absolute() or path.exists() or len(path.parts) > 1:
        return path
    base = os.environ.get("BOAT_CAMPAIGN_DIR")
    return Path(base) / path if base else path


def _emit(as_json: bool, data: dict, revision, text: str) -> None:
    if as_json:
        envelope = {"ok": True, "data": data}
        if revision is not None:
            envelope["revision"] = revision
        click.echo(json.dumps(envelope))
    else:
        click.echo(text.rstrip("\n"))


def _rows_csv(names, rows) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(list(names))
    for row in np.atleast_2d(np.asarray(rows, dtype=float)):
        writer.writerow([repr(float(v)) for v in row])
    return buffer.getvalue()


def _table_csv(state, indices) -> str:
    names = list(state.space.names) + list(state.dataset.output_names)
    rows = [
        list(state.dataset.points[i]) + list(state.dataset.outputs[i])
        for i in indices
    ]
    return _rows_csv(names, rows) if rows else ",".join(names) + "\n"


json_flag = click.option(
    "--json", "as_json", is_flag=True, help="Emit a machine-readable envelope."
)
campaign_option = click.option(
    "--campaign",
    "campaign_file",
    required=True,
    help="Campaign JSON file (bare names resolve against $BOAT_CAMPAIGN_DIR).",
)


@click.group()
def main():
    """Ask-tell optimization campaigns for expensive experiments."""


@main.command()
@click.option("--space", "space_file", required=True, help="Design-space JSON file.")
@click.option("--out", "out_file", required=True, help="Campaign file to create.")
@click.option(
    "--objective",
    "objective_names",
    multiple=True,
    help="Objective output column, repeatable; defaults to a single 'y'.",
)
@click.option(
    "--minimize",
    "minimized",
    multiple=True,
    help="Mark a named objective as minimized.",
)
@click.option(
    "--constraint",
    "constraint_exprs",
    multiple=True,
    help="Constraint output column, e.g. 'Austenite_finish<=10'; repeatable.",
)
@click.option("--seed", type=int, default=0, show_default=True)
@json_flag
@_guarded
def init(space_file, out_file, objective_names, minimized, constraint_exprs, seed, as_json):
    """Create a fresh campaign file from a design-space description."""
    objective_names = list(objective_names) or ["y"]
    for name in minimized:
        if name not in objective_names:
            raise ArgumentError(
                f"--minimize {name!r} does not match any --objective"
            )
    constraints = []
    for expr in constraint_exprs:
        match = _CONSTRAINT.match(expr)
        if not match:
            raise ArgumentError(
                f"constraint {expr!r} must look like 'name<=value' or 'name>=value'"
            )
        name, op, threshold = match.groups()
        try:
            threshold = float(threshold)
        except ValueError:
            raise ArgumentError(f"constraint {expr!r} has a non-numeric threshold")
        constraints.append((name, "le" if op == "<=" else "ge", threshold))
    output_names = objective_names + [name for name, _, _ in constraints]
    if len(set(output_names)) != len(output_names):
        raise ArgumentError(f"output columns must be unique, got {output_names}")

    with open(_resolve(space_file), encoding="utf-8") as handle:
        try:
            space_doc = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{space_file}: not valid JSON ({exc})") from exc
    space = DesignSpace.from_dict(space_doc)

    state = init_campaign(
        space,
        objectives=tuple(
            ObjectiveSpec(
                k, "minimize" if name in minimized else "maximize", name
            )
            for k, name in enumerate(objective_names)
        ),
        constraints=tuple(
            ConstraintSpec(len(objective_names) + j, threshold, direction, name)
            for j, (name, direction, threshold) in enumerate(constraints)
        ),
        output_names=tuple(output_names),
        seed=seed,
    )
    out_path = _resolve(out_file)
    if out_path.exists():
        raise ArgumentError(f"{out_path} already exists; refusing to overwrite")
    save_campaign_file(out_path, state)
    _emit(
        as_json,
        {"path": str(out_path), "outputs": output_names},
        state.revision,
        f"initialized campaign at {out_path} (revision {state.revision})",
    )


@main.command("ask")
@campaign_option
@click.option("-q", "--batch", "q", type=int, default=1, show_default=True)
@click.option(
    "--strategy",
    type=click.Choice(sorted(_STRATEGY_ALIASES)),
    default=None,
    help="Override and persist the batch strategy.",
)
@click.option("--seed", type=int, default=None)
@json_flag
@_guarded
def ask(campaign_file, q, strategy, seed, as_json):
    """Suggest the next batch and print it as CSV rows."""
    path = _resolve(campaign_file)
    state = load_campaign_file(path)
    if strategy is not None:
        state = replace(
            state,
            acquisition=replace(
                state.acquisition, strategy=_STRATEGY_ALIASES[strategy]
            ),
        )
    new_state, points = ask_state(state, q=q, seed=seed)
    save_campaign_file(path, new_state, expected_revision=state.revision)
    _emit(
        as_json,
        {"names": list(state.space.names), "points": points.tolist()},
        new_state.revision,
        _rows_csv(state.space.names, points),
    )


@main.command("tell")
@campaign_option
@click.option("--data", "data_file", required=True, help="CSV of measured rows.")
@json_flag
@_guarded
def tell(campaign_file, data_file, as_json):
    """Record measured rows (inputs plus all output columns) from a CSV."""
    path = _resolve(campaign_file)
    state = load_campaign_file(path)
    schema = CsvSchema(state.space.names, state.dataset.output_names)
    table = load_csv(_resolve(data_file), schema, state.space)
    new_state = tell_state(state, table.points, table.outputs)
    save_campaign_file(path, new_state, expected_revision=state.revision)
    _emit(
        as_json,
        {"added": table.n, "n": new_state.n_observed, "pending": len(new_state.pending)},
        new_state.revision,
        f"recorded {table.n} rows; n={new_state.n_observed}, "
        f"revision={new_state.revision}",
    )


@main.command("status")
@campaign_option
@json_flag
@_guarded
def status(campaign_file, as_json):
    """Print row count, revision, pending batch size, and the incumbent."""
    state = load_campaign_file(_resolve(campaign_file))
    index, value = best_observed(state)
    lines = [
        f"n={state.n_observed}",
        f"revision={state.revision}",
        f"pending={len(state.pending)}",
        f"objectives={len(state.objectives)}",
    ]
    incumbent = None
    if state.is_multi_objective:
        front = pareto_indices(state) if state.n_observed else ()
        lines.append(f"pareto={len(front)}")
        data = {"pareto": [int(i) for i in front]}
    elif index is None:
        lines.append("incumbent=none")
        data = {"incumbent": None}
    else:
        incumbent = {"row": index, "value": value}
        lines.append(f"incumbent={value!r} (row {index})")
        data = {"incumbent": incumbent}
    data.update(
        n=state.n_observed,
        revision=state.revision,
        pending=len(state.pending),
        objectives=len(state.objectives),
    )
    _emit(as_json, data, state.revision, "\n".join(lines))


@main.command("recommend")
@campaign_option
@json_flag
@_guarded
def recommend(campaign_file, as_json):
    """Print the recommended observed row(s) with a rationale."""
    state = load_campaign_file(_resolve(campaign_file))
    rec = recommend_state(state)
    flag = " (flagged)" if rec.flagged else ""
    text = f"rationale: {rec.rationale}{flag}\n" + _table_csv(state, rec.indices)
    _emit(
        as_json,
        {
            "indices": [int(i) for i in rec.indices],
            "rationale": rec.rationale,
            "flagged": rec.flagged,
        },
        state.revision,
        text,
    )


@main.command("pareto")
@campaign_option
@json_flag
@_guarded
def pareto(campaign_file, as_json):
    """Print the observed non-dominated rows as CSV."""
    state = load_campaign_file(_resolve(campaign_file))
    front = pareto_indices(state)
    _emit(
        as_json,
        {"indices": [int(i) for i in front]},
        state.revision,
        _table_csv(state, front),
    )


@main.command("simulate")
@campaign_option
@click.option(
    "--oracle",
    type=click.Choice(["quadratic"]),
    default="quadratic",
    show_default=True,
    help="Ground-truth stand-in fitted to the observed data.",
)
@click.option("--iters", type=int, default=15, show_default=True)
@click.option("-q", "--batch", "q", type=int, default=2, show_default=True)
@click.option("--seed", type=int, default=None)
@click.option("--trace", "trace_file", default=None, help="Trace CSV path.")
@json_flag
@_guarded
def simulate(campaign_file, oracle, iters, q, seed, trace_file, as_json):
    """Run ask-evaluate-tell rounds against a fitted quadratic surface."""
    path = _resolve(campaign_file)
    state = load_campaign_file(path)
    oracles = [
        fit_quadratic_oracle(state.dataset.points, state.dataset.outputs[:, k])
        for k in range(state.dataset.n_outputs)
    ]

    def surface(P):
        return np.column_stack([o.predict(P) for o in oracles])

    final, trace = run_closed_loop(state, surface, iterations=iters, q=q, seed=seed)
    save_campaign_file(path, final, expected_revision=state.revision)
    trace_path = (
        _resolve(trace_file)
        if trace_file is not None
        else path.with_suffix(".trace.csv")
    )
    write_trace_csv(trace_path, trace, state.space, state.dataset.output_names)
    best = trace[-1]["best"] if trace else float("nan")
    best_out = float(best) if np.isfinite(best) else None
    _emit(
        as_json,
        {
            "iterations": len(trace),
            "evaluations": len(trace) * q,
            "best": best_out,
            "trace": str(trace_path),
        },
        final.revision,
        f"ran {len(trace)} iterations ({len(trace) * q} evaluations); "
        f"best={best_out}; trace written to {trace_path}",
    )


@main.command("export-trace")
@campaign_option
@click.option("--out", "out_file", default=None, help="Write here instead of stdout.")
@json_flag
@_guarded
def export_trace(campaign_file, out_file, as_json):
    """Rewrite the observation history as a best-so-far trace CSV."""
    state = load_campaign_file(_resolve(campaign_file))
    single = not state.is_multi_objective
    spec = state.objectives[0] if single else None
    best = None
    records = []
    for i in range(state.n_observed):
        outputs = state.dataset.outputs[i]
        if single:
            feasible = all(
                c.satisfied(outputs[c.output_index]) for c in state.constraints
            )
            if feasible:
                value = float(outputs[spec.output_index])
                if best is None:
                    best = value
                elif spec.sense == "minimize":
                    best = min(best, value)
                else:
                    best = max(best, value)
        records.append(
            {
                "iteration": i,
                "points": [state.dataset.points[i]],
                "outputs": [outputs],
                "best": float("nan") if best is None else best,
            }
        )
    text = trace_csv_text(records, state.space, state.dataset.output_names)
    if out_file is not None:
        out_path = _resolve(out_file)
        _atomic_write_text(out_path, text)
        _emit(
            as_json,
            {"rows": len(records), "out": str(out_path)},
            state.revision,
            f"wrote {len(records)} trace rows to {out_path}",
        )
    else:
        _emit(
            as_json,
            {"rows": len(records), "csv": text},
            state.revision,
            text,
        )


if __name__ == "__main__":
    main()
