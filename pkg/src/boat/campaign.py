"""Ask-tell campaign state and the suggestion policies built on it.

A campaign is an immutable snapshot: the design space, everything observed
so far, the output roles (objectives and constraints), the acquisition and
budget settings, points suggested but not yet measured, an event history,
and a revision counter.  Every operation returns a new state with the
revision advanced; nothing mutates in place, which makes persistence and
conflict detection straightforward.

Suggestion policy by situation:

    fewer than two observations   space-filling Sobol draw
    one objective                 expected improvement (or UCB), batched
                                  by the configured strategy
    one objective + constraints   expected improvement times the product
                                  of per-constraint feasibility
                                  probabilities; pure feasibility search
                                  while nothing feasible has been seen
    several objectives            per batch element, a fresh random weight
                                  vector scalarizes the standardized
                                  objectives (augmented Chebyshev) and a
                                  model of the scalar is maximized by
                                  expected improvement

Points already pending are folded into every model through constant-liar
conditioning so a new ask does not pile onto them, and minimization
objectives are sign-flipped at the model boundary only: stored data keeps
the user's units and direction.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from datetime import datetime, timezone

import numpy as np
from scipy import linalg

from .acquisition import (
    AcquisitionSpec,
    augmented_chebyshev,
    expected_improvement,
    incumbent_from,
    pareto_mask,
    probability_of_feasibility,
    upper_confidence_bound,
)
from .data import ConstraintSpec, Dataset, ObjectiveSpec
from .errors import ArgumentError, InsufficientDataError
from .gp import FitConfig, GaussianProcess
from .optimize import (
    OptBudget,
    maximize_acquisition,
    sobol_candidates,
    suggest_batch,
)
from .space import DesignSpace
from .transforms import Standardizer
from .validation import as_matrix

COLD_START_MIN = 2
FEASIBILITY_LEVEL = 0.95
PENDING_MATCH_TOL = 1e-6


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass(frozen=True)
class CampaignState:
    """One immutable snapshot of a campaign."""

    space: DesignSpace
    dataset: Dataset
    objectives: tuple
    constraints: tuple
    acquisition: AcquisitionSpec
    fit: FitConfig
    budget: OptBudget
    pending: np.ndarray
    history: tuple
    seed: int
    revision: int

    def __post_init__(self):
        pending = np.asarray(self.pending, dtype=float)
        if pending.size == 0:
            pending = pending.reshape(0, self.space.dimension)
        if pending.ndim != 2 or pending.shape[1] != self.space.dimension:
            raise ArgumentError("pending must be (k, dimension)")
        pending.setflags(write=False)
        object.__setattr__(self, "pending", pending)
        object.__setattr__(self, "objectives", tuple(self.objectives))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        object.__setattr__(self, "history", tuple(self.history))

    def __eq__(self, other):
        if not isinstance(other, CampaignState):
            return NotImplemented
        return (
            self.space == other.space
            and self.dataset == other.dataset
            and self.objectives == other.objectives
            and self.constraints == other.constraints
            and self.acquisition == other.acquisition
            and self.fit == other.fit
            and self.budget == other.budget
            and np.array_equal(self.pending, other.pending)
            and self.history == other.history
            and self.seed == other.seed
            and self.revision == other.revision
        )

    @property
    def n_observed(self) -> int:
        return self.dataset.n

    @property
    def is_multi_objective(self) -> bool:
        return len(self.objectives) > 1

    def to_dict(self) -> dict:
        return {
            "space": self.space.to_dict(),
            "data": {
                "points": self.dataset.points.tolist(),
                "outputs": self.dataset.outputs.tolist(),
                "output_names": list(self.dataset.output_names),
            },
            "objectives": [o.to_dict() for o in self.objectives],
            "constraints": [c.to_dict() for c in self.constraints],
            "acquisition": self.acquisition.to_dict(),
            "fit": self.fit.to_dict(),
            "budget": self.budget.to_dict(),
            "pending": self.pending.tolist(),
            "history": list(self.history),
            "seed": self.seed,
            "revision": self.revision,
        }

    @classmethod
    def from_dict(cls, doc: dict) -> "CampaignState":
        data = doc["data"]
        names = tuple(data["output_names"])
        dataset = Dataset(
            np.asarray(data["points"], dtype=float).reshape(-1, len(doc["space"]["variables"])),
            np.asarray(data["outputs"], dtype=float).reshape(-1, len(names)),
            output_names=names,
        )
        return cls(
            space=DesignSpace.from_dict(doc["space"]),
            dataset=dataset,
            objectives=tuple(
                ObjectiveSpec.from_dict(o) for o in doc["objectives"]
            ),
            constraints=tuple(
                ConstraintSpec.from_dict(c) for c in doc["constraints"]
            ),
            acquisition=AcquisitionSpec.from_dict(doc["acquisition"]),
            fit=FitConfig.from_dict(doc["fit"]),
            budget=OptBudget.from_dict(doc["budget"]),
            pending=np.asarray(doc["pending"], dtype=float),
            history=tuple(doc["history"]),
            seed=int(doc["seed"]),
            revision=int(doc["revision"]),
        )


def init_campaign(
    space: DesignSpace,
    objectives,
    constraints=(),
    output_names=None,
    acquisition: AcquisitionSpec | None = None,
    fit: FitConfig | None = None,
    budget: OptBudget | None = None,
    seed: int = 0,
) -> CampaignState:
    """A fresh campaign with no observations."""
    objectives = tuple(objectives)
    constraints = tuple(constraints)
    if not objectives:
        raise ArgumentError("at least one objective is required")
    indexed = [spec.output_index for spec in objectives + constraints]
    if len(set(spec.output_index for spec in objectives)) != len(objectives):
        raise ArgumentError("objectives must target distinct output columns")
    n_outputs = max(indexed) + 1
    if output_names is None:
        output_names = tuple(f"y_{k}" for k in range(n_outputs))
    output_names = tuple(output_names)
    if len(output_names) < n_outputs:
        raise ArgumentError(
            f"output_names has {len(output_names)} entries but the "
            f"objectives and constraints reference column {n_outputs - 1}"
        )
    return CampaignState(
        space=space,
        dataset=Dataset.empty(space.dimension, output_names),
        objectives=objectives,
        constraints=constraints,
        acquisition=acquisition if acquisition is not None else AcquisitionSpec(),
        fit=fit if fit is not None else FitConfig(),
        budget=budget if budget is not None else OptBudget(),
        pending=np.empty((0, space.dimension)),
        history=({"event": "init", "revision": 0, "time": _now()},),
        seed=int(seed),
        revision=0,
    )


def _advance(state: CampaignState, event: dict, **changes) -> CampaignState:
    revision = state.revision + 1
    event = dict(event, revision=revision, time=_now())
    return replace(
        state,
        history=state.history + (event,),
        revision=revision,
        **changes,
    )


def tell(state: CampaignState, points, outputs) -> CampaignState:
    """Record measured outputs for design points.

    A told point clears the pending row it matches, within a small
    tolerance relative to each variable's span.  Telling nothing still
    advances the revision so the event is on record.
    """
    points = np.asarray(points, dtype=float)
    if points.size == 0:
        if np.asarray(outputs, dtype=float).size != 0:
            raise ArgumentError("outputs given for an empty set of points")
        return _advance(state, {"event": "tell", "count": 0})
    points = as_matrix(points, "points", n_cols=state.space.dimension)
    outputs = np.asarray(outputs, dtype=float)
    if outputs.ndim == 1:
        outputs = outputs.reshape(-1, 1)
    dataset = state.dataset.append(points, outputs, space=state.space)
    span = state.space.upper - state.space.lower
    keep = np.ones(len(state.pending), dtype=bool)
    for row in points:
        if not keep.any():
            break
        gaps = np.linalg.norm((state.pending - row) / span, axis=1)
        close = np.where(keep & (gaps < PENDING_MATCH_TOL))[0]
        if close.size:
            keep[close[np.argmin(gaps[close])]] = False
    return _advance(
        state,
        {"event": "tell", "count": int(len(points))},
        dataset=dataset,
        pending=state.pending[keep],
    )


def _ask_seed(state: CampaignState, seed) -> int:
    base = state.seed if seed is None else int(seed)
    return int(
        np.random.SeedSequence([base, state.revision]).generate_state(1)[0]
    )


def _flipped_objective(state: CampaignState, spec: ObjectiveSpec) -> np.ndarray:
    y = state.dataset.outputs[:, spec.output_index]
    return -y if spec.sense == "minimize" else y


def _objective_model(state: CampaignState, y: np.ndarray) -> GaussianProcess:
    return GaussianProcess(
        input_bounds=(state.space.lower, state.space.upper),
        fit_config=state.fit,
    ).fit(state.dataset.points, y)


def _constraint_models(state: CampaignState):
    models = []
    for spec in state.constraints:
        y = state.dataset.outputs[:, spec.output_index]
        models.append((spec, _objective_model(state, y)))
    return models


def _feasibility_product(models, X):
    product = None
    for spec, model in models:
        mean, var = model.posterior(X)
        pof = probability_of_feasibility(mean, var, spec.threshold, spec.direction)
        product = pof if product is None else product * pof
    return product


def _observed_feasible(state: CampaignState) -> np.ndarray:
    mask = np.ones(state.dataset.n, dtype=bool)
    for spec in state.constraints:
        mask &= spec.satisfied(state.dataset.outputs[:, spec.output_index])
    return mask


def _space_filling(state: CampaignState, q: int, seed: int) -> np.ndarray:
    # Draw extra rows so collisions with pending points can be skipped.
    candidates = sobol_candidates(
        state.space, q + len(state.pending) + 8, seed
    )
    span = np.where(
        state.space.upper > state.space.lower,
        state.space.upper - state.space.lower,
        1.0,
    )
    taken = [row for row in state.pending]
    picked = []
    for row in candidates:
        if len(picked) == q:
            break
        if taken:
            gaps = np.linalg.norm(
                (np.asarray(taken) - row) / span, axis=1
            )
            if gaps.min() < 1e-6:
                continue
        taken.append(row)
        picked.append(row)
    return np.asarray(picked)


def _ask_single(state: CampaignState, q: int, seed: int) -> tuple[np.ndarray, str]:
    spec = state.objectives[0]
    y = _flipped_objective(state, spec)
    model = _objective_model(state, y)
    if state.acquisition.incumbent_source == "best_posterior":
        observed_values = model.predict(state.dataset.points)
    else:
        observed_values = y
    incumbent = incumbent_from(observed_values)
    if len(state.pending):
        model = model.condition_on(
            state.pending, np.full(len(state.pending), incumbent)
        )
    points = suggest_batch(
        model,
        state.space,
        incumbent,
        q,
        spec=state.acquisition,
        budget=state.budget,
        seed=seed,
        avoid=state.pending,
    )
    return points, "single_objective"


def _ask_constrained(state: CampaignState, q: int, seed: int):
    obj_spec = state.objectives[0]
    y = _flipped_objective(state, obj_spec)
    feasible = _observed_feasible(state)
    incumbent = incumbent_from(y, feasible)
    mode = "constrained" if incumbent is not None else "feasibility_search"

    obj_model = _objective_model(state, y)
    con_models = _constraint_models(state)
    lie = incumbent if incumbent is not None else float(y.max())
    if len(state.pending):
        obj_model = obj_model.condition_on(
            state.pending, np.full(len(state.pending), lie)
        )

    chosen: list = [row for row in state.pending]
    new_points: list = []
    lying = obj_model
    for step in range(q):
        def acq(X, model=lying):
            pof = _feasibility_product(con_models, X)
            if incumbent is None:
                return pof
            mean, var = model.posterior(X)
            return expected_improvement(mean, var, incumbent) * pof

        step_seed = int(
            np.random.SeedSequence([seed, step]).generate_state(1)[0]
        )
        result = maximize_acquisition(acq, state.space, state.budget, step_seed)
        point = _pick_apart(result, chosen, state.space, step_seed)
        chosen.append(point)
        new_points.append(point)
        if step + 1 < q:
            lying = lying.condition_on(point[None, :], np.array([lie]))
    return np.asarray(new_points), mode


def _ask_multi(state: CampaignState, q: int, seed: int):
    flipped = np.column_stack(
        [_flipped_objective(state, spec) for spec in state.objectives]
    )
    standardizers = [Standardizer.fit(col) for col in flipped.T]
    tilde = np.column_stack(
        [st.transform(col) for st, col in zip(standardizers, flipped.T)]
    )
    con_models = _constraint_models(state) if state.constraints else []
    feasible = _observed_feasible(state)

    rng = np.random.default_rng(seed)
    chosen: list = [row for row in state.pending]
    new_points: list = []
    for step in range(q):
        weights = rng.dirichlet(np.ones(len(state.objectives)))
        scalars = augmented_chebyshev(tilde, weights, state.acquisition.rho)
        incumbent = incumbent_from(scalars, feasible if state.constraints else None)
        model = _objective_model(state, scalars)
        lie = incumbent if incumbent is not None else float(scalars.max())
        pending_like = list(state.pending) + new_points
        if pending_like:
            model = model.condition_on(
                np.asarray(pending_like), np.full(len(pending_like), lie)
            )

        def acq(X, model=model, incumbent=incumbent):
            if con_models:
                pof = _feasibility_product(con_models, X)
                if incumbent is None:
                    return pof
            mean, var = model.posterior(X)
            ei = expected_improvement(mean, var, incumbent)
            return ei * pof if con_models else ei

        step_seed = int(
            np.random.SeedSequence([seed, step]).generate_state(1)[0]
        )
        result = maximize_acquisition(acq, state.space, state.budget, step_seed)
        point = _pick_apart(result, chosen, state.space, step_seed)
        chosen.append(point)
        new_points.append(point)
    return np.asarray(new_points), "multi_objective"


def _pick_apart(result, chosen, space, seed):
    from .optimize import _pick_separated

    return _pick_separated(result, chosen, space, seed)


def ask(state: CampaignState, q: int = 1, seed=None, cold_start=True):
    """Suggest q new design points and mark them pending.

    Returns ``(new_state, points)``.  The suggestion stream is a pure
    function of (campaign seed or the explicit override, revision), so
    repeating an ask on an unchanged campaign returns identical points.
    With fewer than two observations there is nothing to model and a
    space-filling draw is returned instead, unless ``cold_start`` is False,
    in which case that situation is an error.
    """
    if q < 1:
        raise ArgumentError("q must be at least 1")
    ask_seed = _ask_seed(state, seed)
    if state.n_observed < COLD_START_MIN:
        if not cold_start:
            raise InsufficientDataError(
                f"model-based suggestions need at least {COLD_START_MIN} "
                f"observations, have {state.n_observed}"
            )
        points = _space_filling(state, q, ask_seed)
        mode = "space_filling"
    elif state.is_multi_objective:
        points, mode = _ask_multi(state, q, ask_seed)
    elif state.constraints:
        points, mode = _ask_constrained(state, q, ask_seed)
    else:
        points, mode = _ask_single(state, q, ask_seed)
    points = np.asarray(points, dtype=float)
    new_state = _advance(
        state,
        {"event": "ask", "q": int(q), "mode": mode},
        pending=np.vstack([state.pending, points]),
    )
    return new_state, points


@dataclass(frozen=True)
class Recommendation:
    """Rows of the observed dataset put forward as the campaign's answer."""

    indices: tuple
    rationale: str
    flagged: bool = False


def recommend(state: CampaignState) -> Recommendation:
    """Best observed design(s) according to the fitted models.

    Single objective: the observed point with the best posterior mean
    among those the constraint models call feasible with probability at
    least FEASIBILITY_LEVEL; if no point qualifies, the unconditional
    best-posterior point is returned flagged.  Several objectives: the
    observed Pareto front.
    """
    if state.n_observed == 0:
        raise InsufficientDataError("nothing has been observed yet")
    if state.is_multi_objective:
        Y = np.column_stack(
            [
                state.dataset.outputs[:, spec.output_index]
                for spec in state.objectives
            ]
        )
        senses = [spec.sense for spec in state.objectives]
        mask = pareto_mask(Y, senses)
        if state.constraints:
            feasible = _observed_feasible(state)
            if np.any(mask & feasible):
                mask = mask & feasible
        return Recommendation(
            indices=tuple(int(i) for i in np.flatnonzero(mask)),
            rationale="pareto_front",
        )

    spec = state.objectives[0]
    y = _flipped_objective(state, spec)
    if state.n_observed < COLD_START_MIN:
        best = int(np.argmax(y))
        return Recommendation((best,), "best_observed", flagged=True)
    model = _objective_model(state, y)
    mean = model.predict(state.dataset.points)
    if state.constraints:
        pof = _feasibility_product(
            _constraint_models(state), state.dataset.points
        )
        confident = pof >= FEASIBILITY_LEVEL
        if np.any(confident):
            candidates = np.where(confident, mean, -np.inf)
            return Recommendation(
                (int(np.argmax(candidates)),), "posterior_mean_feasible"
            )
        return Recommendation((int(np.argmax(mean)),), "best_posterior", flagged=True)
    return Recommendation((int(np.argmax(mean)),), "posterior_mean_feasible")


def pareto_indices(state: CampaignState) -> tuple:
    """Observed Pareto-front row indices (multi-objective campaigns)."""
    if not state.is_multi_objective:
        raise ArgumentError("the campaign has a single objective")
    if state.n_observed == 0:
        raise InsufficientDataError("nothing has been observed yet")
    Y = np.column_stack(
        [state.dataset.outputs[:, spec.output_index] for spec in state.objectives]
    )
    senses = [spec.sense for spec in state.objectives]
    return tuple(int(i) for i in np.flatnonzero(pareto_mask(Y, senses)))


def best_observed(state: CampaignState):
    """Index and raw value of the best feasible observation, for reporting.

    Feasibility here is judged on the measured constraint outputs, not the
    models.  Returns (index, value) or (None, nan) when nothing feasible
    has been seen.
    """
    if state.n_observed == 0 or state.is_multi_objective:
        return None, float("nan")
    spec = state.objectives[0]
    y = _flipped_objective(state, spec)
    feasible = _observed_feasible(state)
    if not np.any(feasible):
        return None, float("nan")
    masked = np.where(feasible, y, -np.inf)
    idx = int(np.argmax(masked))
    return idx, float(state.dataset.outputs[idx, spec.output_index])


def _monomial_names(d: int) -> list:
    names = ["1"] + [f"x{i + 1}" for i in range(d)]
    for i in range(d):
        for j in range(i, d):
            names.append(f"x{i + 1}*x{j + 1}")
    return names


def _monomials(X: np.ndarray) -> np.ndarray:
    X = np.atleast_2d(np.asarray(X, dtype=float))
    n, d = X.shape
    cols = [np.ones(n)]
    for i in range(d):
        cols.append(X[:, i])
    for i in range(d):
        for j in range(i, d):
            cols.append(X[:, i] * X[:, j])
    return np.column_stack(cols)


@dataclass(frozen=True)
class QuadraticOracle:
    """Full quadratic response surface fitted by least squares."""

    coefficients: np.ndarray
    dimension: int

    def predict(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if X.shape[1] != self.dimension:
            raise ArgumentError(
                f"expected {self.dimension} columns, got {X.shape[1]}"
            )
        return _monomials(X) @ self.coefficients

    def __call__(self, X) -> np.ndarray:
        return self.predict(X)

    def grid_max(self, space: DesignSpace, points_per_dim: int = 101):
        """Exhaustive maximum over a regular grid, evaluated in chunks.

        The grid is swept one leading-axis slice at a time so the full
        point set is never materialized.
        """
        if space.dimension != self.dimension:
            raise ArgumentError("space dimension does not match the oracle")
        axes = [
            np.linspace(space.lower[k], space.upper[k], points_per_dim)
            for k in range(self.dimension)
        ]
        best_value = -np.inf
        best_point = None
        rest = axes[1:]
        if rest:
            mesh = np.meshgrid(*rest, indexing="ij")
            tail = np.column_stack([m.ravel() for m in mesh])
        else:
            tail = np.empty((1, 0))
        for x0 in axes[0]:
            block = np.column_stack(
                [np.full(len(tail), x0), *[tail[:, k] for k in range(tail.shape[1])]]
            )
            values = self.predict(block)
            k = int(np.argmax(values))
            if values[k] > best_value:
                best_value = float(values[k])
                best_point = block[k].copy()
        return best_point, best_value


def fit_quadratic_oracle(points, values) -> QuadraticOracle:
    """Least-squares full quadratic fit with an identifiability check.

    Raises InsufficientDataError naming the monomials the design cannot
    identify when the model matrix is rank deficient.
    """
    X = as_matrix(points, "points")
    y = np.asarray(values, dtype=float).ravel()
    if y.size != X.shape[0]:
        raise ArgumentError("points and values disagree on row count")
    M = _monomials(X)
    n_terms = M.shape[1]
    if X.shape[0] < n_terms:
        raise InsufficientDataError(
            f"a full quadratic in {X.shape[1]} variables needs at least "
            f"{n_terms} runs, got {X.shape[0]}"
        )
    # Pivoted QR exposes which monomial columns fall outside the design's
    # column space.
    scale = np.linalg.norm(M, axis=0)
    scale[scale == 0] = 1.0
    R, pivots = linalg.qr(M / scale, mode="r", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(M.shape) * np.finfo(float).eps * diag.max()
    rank = int(np.sum(diag > tol))
    if rank < n_terms:
        names = _monomial_names(X.shape[1])
        missing = sorted(names[p] for p in pivots[rank:])
        raise InsufficientDataError(
            "the design cannot identify these quadratic terms: "
            + ", ".join(missing)
        )
    coef, *_ = np.linalg.lstsq(M, y, rcond=None)
    return QuadraticOracle(coefficients=coef, dimension=X.shape[1])


def run_closed_loop(state: CampaignState, fn, iterations: int, q: int = 1, seed=None):
    """Alternate ask and tell against a callable ground truth.

    ``fn`` maps a (q, d) array to outputs of width matching the campaign's
    output columns.  Returns (final_state, trace) where the trace lists one
    record per iteration with the points, outputs, and the running best.
    A non-finite oracle output aborts the loop and returns the trace of the
    iterations that completed.
    """
    if iterations < 0:
        raise ArgumentError("iterations must be non-negative")
    trace = []
    for iteration in range(iterations):
        state, points = ask(state, q=q, seed=seed)
        outputs = np.asarray(fn(points), dtype=float)
        if outputs.ndim == 1:
            outputs = outputs.reshape(len(points), -1)
        if not np.all(np.isfinite(outputs)):
            break
        state = tell(state, points, outputs)
        _, best = best_observed(state)
        trace.append(
            {
                "iteration": iteration,
                "points": points.tolist(),
                "outputs": outputs.tolist(),
                "best": best,
            }
        )
    return state, trace
