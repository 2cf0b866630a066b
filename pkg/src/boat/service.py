"""HTTP/JSON facade over campaign operations.

Campaigns live as JSON files in a directory; every request loads the
file, acts, and persists through the compare-and-swap in storage, so the
service itself holds no state between requests.  Responses share one
envelope shape: ``{"ok": true, "data": ..., "revision": n}`` on success
and ``{"ok": false, "error": {"code", "message"}}`` on failure, with the
current revision echoed on conflicts so clients can reload.

Mutating endpoints accept a client-supplied ``request_id``; retrying a
request that already succeeded replays the recorded response instead of
acting twice.
"""

from __future__ import annotations

import argparse
import json
import os
import uuid
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse

from .campaign import (
    _objective_model,
    ask as ask_state,
    best_observed,
    init_campaign,
    pareto_indices,
    recommend as recommend_state,
    tell as tell_state,
)
from .data import ConstraintSpec, ObjectiveSpec
from .errors import (
    ArgumentError,
    BoatError,
    InsufficientDataError,
    MigrationError,
    ParseError,
    RevisionConflictError,
    SchemaError,
    ValidationError,
)
from .space import DesignSpace
from .storage import (
    _atomic_write_text,
    load_campaign_file,
    save_campaign_file,
)

_HTTP_STATUS = [
    (RevisionConflictError, "conflict", 409),
    (ValidationError, "validation", 422),
    (SchemaError, "schema", 422),
    (ParseError, "parse", 422),
    (MigrationError, "migration", 422),
    (InsufficientDataError, "insufficient_data", 422),
    (ArgumentError, "argument", 422),
    (BoatError, "internal", 500),
]

_STRATEGIES = ("joint_qei", "constant_liar", "local_penalization")

MAX_SLICE_POINTS = 2001


def _classify(exc):
    for klass, code, status in _HTTP_STATUS:
        if isinstance(exc, klass):
            return code, status
    return "internal", 500


def _ok(data, revision=None, status=200) -> JSONResponse:
    envelope = {"ok": True, "data": data}
    if revision is not None:
        envelope["revision"] = int(revision)
    return JSONResponse(envelope, status_code=status)


def _fail(status, code, message, revision=None) -> JSONResponse:
    envelope = {"ok": False, "error": {"code": code, "message": message}}
    if revision is not None:
        envelope["revision"] = int(revision)
    return JSONResponse(envelope, status_code=status)


def _require(body, field, kind, optional=False, default=None):
    """Pull a typed field out of a JSON body, naming the field on error."""
    if not isinstance(body, dict):
        raise ValidationError("request body must be a JSON object")
    if field not in body or body[field] is None:
        if optional:
            return default
        raise ValidationError(f"{field}: required field is missing")
    value = body[field]
    if kind is float and isinstance(value, int) and not isinstance(value, bool):
        value = float(value)
    if kind is int and isinstance(value, bool):
        raise ValidationError(f"{field}: expected an integer")
    if not isinstance(value, kind):
        raise ValidationError(f"{field}: expected {kind.__name__}")
    return value


def _space_from_body(doc) -> DesignSpace:
    variables = _require(doc, "variables", list)
    if not variables:
        raise ValidationError("space.variables: at least one variable is required")
    names, lower, upper, units = [], [], [], []
    for i, var in enumerate(variables):
        prefix = f"space.variables[{i}]"
        if not isinstance(var, dict):
            raise ValidationError(f"{prefix}: expected an object")
        for field in ("name", "lower", "upper"):
            if field not in var:
                raise ValidationError(f"{prefix}.{field}: required field is missing")
        names.append(str(var["name"]))
        for field, into in (("lower", lower), ("upper", upper)):
            value = var[field]
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"{prefix}.{field}: expected a number")
            into.append(float(value))
        units.append(str(var.get("unit", "")))
    return DesignSpace.from_bounds(names, lower, upper, units=units)


class CampaignStore:
    """File-backed campaign directory with request-id replay."""

    def __init__(self, directory):
        self.directory = Path(directory)
        self.directory.mkdir(parents=True, exist_ok=True)

    def path(self, campaign_id: str) -> Path:
        if not campaign_id.replace("-", "").isalnum():
            raise ValidationError(f"campaign id {campaign_id!r} is not valid")
        return self.directory / f"{campaign_id}.json"

    def load(self, campaign_id: str):
        path = self.path(campaign_id)
        if not path.exists():
            return None
        return load_campaign_file(path)

    def save(self, campaign_id: str, state, expected_revision=None):
        save_campaign_file(
            self.path(campaign_id), state, expected_revision=expected_revision
        )

    # Replay cache: one sidecar file per directory, request_id -> response.
    def _requests_path(self) -> Path:
        return self.directory / "requests.json"

    def recorded(self, request_id):
        if request_id is None:
            return None
        path = self._requests_path()
        if not path.exists():
            return None
        return json.loads(path.read_text(encoding="utf-8")).get(request_id)

    def record(self, request_id, status: int, envelope: dict) -> None:
        if request_id is None:
            return
        path = self._requests_path()
        table = (
            json.loads(path.read_text(encoding="utf-8")) if path.exists() else {}
        )
        table[str(request_id)] = {"status": status, "envelope": envelope}
        _atomic_write_text(path, json.dumps(table, indent=2) + "\n")


def _replay(store: CampaignStore, request_id):
    hit = store.recorded(request_id)
    if hit is None:
        return None
    return JSONResponse(hit["envelope"], status_code=hit["status"])


def _remember(store, request_id, response: JSONResponse) -> JSONResponse:
    if request_id is not None and 200 <= response.status_code < 300:
        store.record(
            request_id,
            response.status_code,
            json.loads(bytes(response.body).decode("utf-8")),
        )
    return response


def _summary(campaign_id: str, state) -> dict:
    doc = {
        "id": campaign_id,
        "space": state.space.to_dict(),
        "output_names": list(state.dataset.output_names),
        "objectives": [
            {
                "name": spec.name,
                "sense": spec.sense,
                "output_index": spec.output_index,
            }
            for spec in state.objectives
        ],
        "constraints": [
            {
                "name": spec.name,
                "threshold": spec.threshold,
                "direction": spec.direction,
                "output_index": spec.output_index,
            }
            for spec in state.constraints
        ],
        "n": state.n_observed,
        "revision": state.revision,
        "pending": state.pending.tolist(),
        "observations": {
            "points": state.dataset.points.tolist(),
            "outputs": state.dataset.outputs.tolist(),
        },
        "trace": _best_so_far(state),
        "seed": state.seed,
    }
    if state.is_multi_objective:
        doc["pareto"] = (
            [int(i) for i in pareto_indices(state)] if state.n_observed else []
        )
    else:
        index, value = best_observed(state)
        doc["incumbent"] = (
            None if index is None else {"row": index, "value": value}
        )
    return doc


def _best_so_far(state) -> list:
    """Running best feasible objective per observed row; None before any."""
    if state.is_multi_objective:
        return [None] * state.n_observed
    spec = state.objectives[0]
    best = None
    out = []
    for i in range(state.n_observed):
        row = state.dataset.outputs[i]
        feasible = all(
            c.satisfied(row[c.output_index]) for c in state.constraints
        )
        if feasible:
            value = float(row[spec.output_index])
            if best is None:
                best = value
            elif spec.sense == "minimize":
                best = min(best, value)
            else:
                best = max(best, value)
        out.append(best)
    return out


def _incumbent_row(state, spec) -> int:
    """Row whose coordinates anchor a posterior slice for one objective."""
    y = state.dataset.outputs[:, spec.output_index]
    flipped = -y if spec.sense == "minimize" else y
    feasible = np.ones(len(y), dtype=bool)
    for c in state.constraints:
        feasible &= c.satisfied(state.dataset.outputs[:, c.output_index])
    if np.any(feasible):
        flipped = np.where(feasible, flipped, -np.inf)
    return int(np.argmax(flipped))


def create_app(campaign_dir=None) -> FastAPI:
    """Build the application around a campaign directory."""
    directory = campaign_dir or os.environ.get("BOAT_CAMPAIGN_DIR") or "."
    store = CampaignStore(directory)
    app = FastAPI(title="boat", docs_url=None, redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    app.state.store = store

    @app.exception_handler(BoatError)
    async def _boat_error(request: Request, exc: BoatError):
        code, status = _classify(exc)
        revision = getattr(exc, "current_revision", None)
        return _fail(status, code, str(exc), revision=revision)

    async def _body(request: Request) -> dict:
        raw = await request.body()
        if not raw:
            return {}
        try:
            body = json.loads(raw)
        except json.JSONDecodeError as exc:
            raise ParseError(f"request body is not valid JSON ({exc})") from exc
        if not isinstance(body, dict):
            raise ValidationError("request body must be a JSON object")
        return body

    def _load_or_404(campaign_id: str):
        state = store.load(campaign_id)
        if state is None:
            return None, _fail(404, "not_found", f"no campaign {campaign_id!r}")
        return state, None

    @app.post("/campaigns")
    async def create_campaign(request: Request):
        body = await _body(request)
        request_id = _require(body, "request_id", str, optional=True)
        hit = _replay(store, request_id)
        if hit is not None:
            return hit

        space = _space_from_body(_require(body, "space", dict))
        objective_docs = _require(
            body, "objectives", list, optional=True, default=[{"name": "y"}]
        )
        constraint_docs = _require(
            body, "constraints", list, optional=True, default=[]
        )
        seed = _require(body, "seed", int, optional=True, default=0)

        names, senses = [], []
        for i, doc in enumerate(objective_docs):
            if not isinstance(doc, dict) or "name" not in doc:
                raise ValidationError(f"objectives[{i}].name: required field is missing")
            sense = doc.get("sense", "maximize")
            if sense not in ("maximize", "minimize"):
                raise ValidationError(
                    f"objectives[{i}].sense: expected 'maximize' or 'minimize'"
                )
            names.append(str(doc["name"]))
            senses.append(sense)
        constraints = []
        for i, doc in enumerate(constraint_docs):
            if not isinstance(doc, dict) or "name" not in doc:
                raise ValidationError(f"constraints[{i}].name: required field is missing")
            threshold = doc.get("threshold")
            if isinstance(threshold, bool) or not isinstance(threshold, (int, float)):
                raise ValidationError(f"constraints[{i}].threshold: expected a number")
            direction = doc.get("direction", "le")
            if direction not in ("le", "ge"):
                raise ValidationError(
                    f"constraints[{i}].direction: expected 'le' or 'ge'"
                )
            constraints.append((str(doc["name"]), float(threshold), direction))

        output_names = names + [name for name, _, _ in constraints]
        if len(set(output_names)) != len(output_names):
            raise ValidationError(
                f"objective and constraint names must be unique, got {output_names}"
            )
        state = init_campaign(
            space,
            objectives=tuple(
                ObjectiveSpec(k, senses[k], names[k]) for k in range(len(names))
            ),
            constraints=tuple(
                ConstraintSpec(len(names) + j, threshold, direction, name)
                for j, (name, threshold, direction) in enumerate(constraints)
            ),
            output_names=tuple(output_names),
            seed=seed,
        )
        campaign_id = uuid.uuid4().hex[:12]
        store.save(campaign_id, state)
        response = _ok(_summary(campaign_id, state), state.revision, status=201)
        return _remember(store, request_id, response)

    @app.get("/campaigns/{campaign_id}")
    async def get_campaign(campaign_id: str):
        state, missing = _load_or_404(campaign_id)
        if missing is not None:
            return missing
        return _ok(_summary(campaign_id, state), state.revision)

    @app.post("/campaigns/{campaign_id}/ask")
    async def ask_campaign(campaign_id: str, request: Request):
        body = await _body(request)
        request_id = _require(body, "request_id", str, optional=True)
        hit = _replay(store, request_id)
        if hit is not None:
            return hit
        state, missing = _load_or_404(campaign_id)
        if missing is not None:
            return missing
        q = _require(body, "q", int, optional=True, default=1)
        seed = _require(body, "seed", int, optional=True)
        strategy = _require(body, "strategy", str, optional=True)
        if strategy is not None:
            if strategy not in _STRATEGIES:
                raise ValidationError(
                    f"strategy: expected one of {list(_STRATEGIES)}"
                )
            from dataclasses import replace

            state = replace(
                state, acquisition=replace(state.acquisition, strategy=strategy)
            )
        new_state, points = ask_state(state, q=q, seed=seed)
        store.save(campaign_id, new_state, expected_revision=state.revision)
        response = _ok(
            {"names": list(state.space.names), "points": points.tolist()},
            new_state.revision,
        )
        return _remember(store, request_id, response)

    @app.post("/campaigns/{campaign_id}/tell")
    async def tell_campaign(campaign_id: str, request: Request):
        body = await _body(request)
        request_id = _require(body, "request_id", str, optional=True)
        hit = _replay(store, request_id)
        if hit is not None:
            return hit
        state, missing = _load_or_404(campaign_id)
        if missing is not None:
            return missing
        rows = _require(body, "rows", list)
        expected = _require(
            body, "revision", int, optional=True, default=state.revision
        )
        if expected != state.revision:
            raise RevisionConflictError(
                f"campaign is at revision {state.revision}, request expected "
                f"{expected}",
                current_revision=state.revision,
            )
        input_names = list(state.space.names)
        output_names = list(state.dataset.output_names)
        points = np.empty((len(rows), len(input_names)))
        outputs = np.empty((len(rows), len(output_names)))
        for i, row in enumerate(rows):
            if not isinstance(row, dict):
                raise ValidationError(f"rows[{i}]: expected an object")
            for j, name in enumerate(input_names + output_names):
                if name not in row:
                    raise ValidationError(f"rows[{i}].{name}: required field is missing")
                value = row[name]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    raise ValidationError(f"rows[{i}].{name}: expected a number")
                if j < len(input_names):
                    points[i, j] = float(value)
                else:
                    outputs[i, j - len(input_names)] = float(value)
        new_state = tell_state(state, points, outputs)
        store.save(campaign_id, new_state, expected_revision=state.revision)
        response = _ok(
            {
                "added": len(rows),
                "n": new_state.n_observed,
                "pending": new_state.pending.tolist(),
                "trace": _best_so_far(new_state),
            },
            new_state.revision,
        )
        return _remember(store, request_id, response)

    @app.get("/campaigns/{campaign_id}/recommend")
    async def recommend_campaign(campaign_id: str):
        state, missing = _load_or_404(campaign_id)
        if missing is not None:
            return missing
        rec = recommend_state(state)
        rows = [
            list(state.dataset.points[i]) + list(state.dataset.outputs[i])
            for i in rec.indices
        ]
        return _ok(
            {
                "indices": [int(i) for i in rec.indices],
                "rationale": rec.rationale,
                "flagged": rec.flagged,
                "columns": list(state.space.names)
                + list(state.dataset.output_names),
                "rows": rows,
            },
            state.revision,
        )

    @app.get("/campaigns/{campaign_id}/pareto")
    async def pareto_campaign(campaign_id: str):
        state, missing = _load_or_404(campaign_id)
        if missing is not None:
            return missing
        front = pareto_indices(state)
        rows = [
            list(state.dataset.points[i]) + list(state.dataset.outputs[i])
            for i in front
        ]
        return _ok(
            {
                "indices": [int(i) for i in front],
                "columns": list(state.space.names)
                + list(state.dataset.output_names),
                "rows": rows,
            },
            state.revision,
        )

    @app.get("/campaigns/{campaign_id}/slice")
    async def slice_campaign(
        campaign_id: str, dim: int = 0, points: int = 200, objective: int = 0
    ):
        state, missing = _load_or_404(campaign_id)
        if missing is not None:
            return missing
        if not 0 <= dim < state.space.dimension:
            raise ValidationError(
                f"dim: expected 0..{state.space.dimension - 1}, got {dim}"
            )
        if not 2 <= points <= MAX_SLICE_POINTS:
            raise ValidationError(
                f"points: expected 2..{MAX_SLICE_POINTS}, got {points}"
            )
        if not 0 <= objective < len(state.objectives):
            raise ValidationError(
                f"objective: expected 0..{len(state.objectives) - 1}, got {objective}"
            )
        if state.n_observed < 2:
            raise InsufficientDataError(
                "a posterior slice needs at least 2 observations"
            )
        spec = state.objectives[objective]
        y = state.dataset.outputs[:, spec.output_index]
        model = _objective_model(state, y)
        anchor = state.dataset.points[_incumbent_row(state, spec)]
        grid = np.linspace(
            state.space.lower[dim], state.space.upper[dim], points
        )
        X = np.tile(anchor, (points, 1))
        X[:, dim] = grid
        mean, var = model.posterior(X)
        band = 2.0 * np.sqrt(np.maximum(var, 0.0))
        return _ok(
            {
                "dim": dim,
                "name": state.space.names[dim],
                "objective": spec.name,
                "anchor": anchor.tolist(),
                "grid": grid.tolist(),
                "mean": mean.tolist(),
                "lower": (mean - band).tolist(),
                "upper": (mean + band).tolist(),
            },
            state.revision,
        )

    return app


def serve(host="127.0.0.1", port=8787, campaign_dir=None):
    """Run the service until interrupted."""
    import uvicorn

    uvicorn.run(create_app(campaign_dir), host=host, port=port)


def main(argv=None):
    parser = argparse.ArgumentParser(
        description="Serve ask-tell campaigns over HTTP."
    )
    parser.add_argument("--host", default="127.0.0.1")
    parser.add_argument("--port", type=int, default=8787)
    parser.add_argument(
        "--dir",
        default=None,
        help="Campaign directory (default: $BOAT_CAMPAIGN_DIR or the working directory).",
    )
    args = parser.parse_args(argv)
    serve(host=args.host, port=args.port, campaign_dir=args.dir)


if __name__ == "__main__":
    main()
