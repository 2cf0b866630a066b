"""Campaign state transitions, suggestion modes, and recommendation."""

import json

import numpy as np
import pytest

from boat.acquisition import AcquisitionSpec, pareto_mask
from boat.campaign import (
    CampaignState,
    QuadraticOracle,
    ask,
    best_observed,
    fit_quadratic_oracle,
    init_campaign,
    pareto_indices,
    recommend,
    run_closed_loop,
    tell,
)
from boat.data import ConstraintSpec, ObjectiveSpec
from boat.errors import ArgumentError, InsufficientDataError, ValidationError
from boat.gp import FitConfig
from boat.optimize import OptBudget
from boat.space import DesignSpace

FAST_FIT = FitConfig(n_restarts=2)
FAST_BUDGET = OptBudget(candidates=32, refinements=2, max_local_steps=10)


def unit_box(d=2):
    return DesignSpace.from_bounds(
        [f"x{i + 1}" for i in range(d)], [0.0] * d, [1.0] * d
    )


def fresh(d=2, **kwargs):
    defaults = dict(
        objectives=(ObjectiveSpec(0, "maximize", "score"),),
        fit=FAST_FIT,
        budget=FAST_BUDGET,
        seed=7,
    )
    defaults.update(kwargs)
    return init_campaign(unit_box(d), **defaults)


def quadratic(points):
    return -np.sum((points - 0.3) ** 2, axis=1)


class TestInit:
    def test_fresh_state(self):
        state = fresh()
        assert state.revision == 0
        assert state.n_observed == 0
        assert len(state.pending) == 0
        assert state.history[0]["event"] == "init"

    def test_requires_an_objective(self):
        with pytest.raises(ArgumentError):
            init_campaign(unit_box(), objectives=())

    def test_output_names_must_cover_referenced_columns(self):
        with pytest.raises(ArgumentError):
            init_campaign(
                unit_box(),
                objectives=(ObjectiveSpec(1, "maximize"),),
                output_names=("only_one",),
            )

    def test_duplicate_objective_columns_rejected(self):
        with pytest.raises(ArgumentError):
            init_campaign(
                unit_box(),
                objectives=(ObjectiveSpec(0), ObjectiveSpec(0, "minimize")),
            )


class TestTell:
    def test_appends_and_advances_revision(self):
        state = fresh()
        s2 = tell(state, [[0.1, 0.2]], [[1.0]])
        assert s2.n_observed == 1
        assert s2.revision == 1
        assert state.n_observed == 0
        assert s2.history[-1]["event"] == "tell"

    def test_out_of_bounds_rejected(self):
        state = fresh()
        with pytest.raises(ValidationError):
            tell(state, [[1.5, 0.2]], [[1.0]])

    def test_exact_pending_match_is_cleared(self):
        state = fresh()
        state, points = ask(state, q=2)
        assert len(state.pending) == 2
        state = tell(state, points[:1], [[0.5]])
        assert len(state.pending) == 1
        assert np.array_equal(state.pending[0], points[1])

    def test_unrelated_tell_keeps_pending(self):
        state = fresh()
        state, points = ask(state, q=1)
        state = tell(state, [[0.9, 0.9]], [[0.1]])
        assert len(state.pending) == 1

    def test_near_match_clears_pending(self):
        # A lab rounds the suggestion before running it; the pending row
        # should still be recognized within a tiny normalized tolerance.
        state = fresh()
        state, points = ask(state, q=1)
        nudged = np.clip(points[0] + 2e-7, 0.0, 1.0)
        state = tell(state, [nudged], [[0.3]])
        assert len(state.pending) == 0

    def test_empty_tell_advances_revision(self):
        state = fresh()
        s2 = tell(state, [], [])
        assert s2.revision == state.revision + 1
        assert s2.n_observed == 0
        assert s2.history[-1]["count"] == 0

    def test_history_events_are_timestamped(self):
        state = fresh()
        state = tell(state, [[0.1, 0.2]], [[1.0]])
        assert all("time" in event for event in state.history)

    def test_one_dimensional_outputs_accepted(self):
        state = fresh()
        s2 = tell(state, [[0.1, 0.2], [0.3, 0.4]], [1.0, 2.0])
        assert s2.dataset.outputs.shape == (2, 1)


class TestAskColdStart:
    def test_space_filling_before_two_points(self):
        state = fresh()
        state, points = ask(state, q=4)
        assert points.shape == (4, 2)
        assert state.space.contains(points).all()
        assert state.history[-1]["mode"] == "space_filling"
        assert len(state.pending) == 4

    def test_repeat_ask_identical_on_same_revision(self):
        state = fresh()
        _, a = ask(state, q=3)
        _, b = ask(state, q=3)
        assert np.array_equal(a, b)

    def test_revision_changes_the_stream(self):
        state = fresh()
        s2, a = ask(state, q=1)
        s3, b = ask(s2, q=1)
        assert not np.array_equal(a, b)

    def test_explicit_seed_overrides(self):
        state = fresh()
        _, a = ask(state, q=2, seed=1)
        _, b = ask(state, q=2, seed=2)
        assert not np.array_equal(a, b)

    def test_avoids_pending_collisions(self):
        state = fresh()
        state, first = ask(state, q=2)
        _, second = ask(state, q=2)
        for row in second:
            gaps = np.linalg.norm(first - row, axis=1)
            assert gaps.min() > 1e-6

    def test_disabled_fallback_is_an_error(self):
        state = fresh()
        with pytest.raises(InsufficientDataError):
            ask(state, q=1, cold_start=False)


class TestAskModelled:
    def seeded_state(self, n=6, d=2):
        state = fresh(d)
        rng = np.random.default_rng(0)
        X = rng.uniform(size=(n, d))
        return tell(state, X, quadratic(X).reshape(-1, 1))

    def test_single_objective_mode(self):
        state = self.seeded_state()
        state, points = ask(state, q=2)
        assert state.history[-1]["mode"] == "single_objective"
        assert points.shape == (2, 2)
        assert state.space.contains(points).all()

    def test_deterministic_per_revision(self):
        state = self.seeded_state()
        _, a = ask(state, q=2)
        _, b = ask(state, q=2)
        assert np.array_equal(a, b)

    def test_minimize_objective_seeks_small_values(self):
        state = fresh(d=1, objectives=(ObjectiveSpec(0, "minimize"),))
        X = np.array([[0.0], [0.25], [0.5], [0.75], [1.0]])
        y = (X[:, 0] - 0.7) ** 2
        state = tell(state, X, y.reshape(-1, 1))
        state, points = ask(state, q=1)
        # The minimum lies at 0.7; the suggestion should explore near it.
        assert abs(points[0, 0] - 0.7) < 0.25

    def test_pending_is_folded_in(self):
        state = self.seeded_state()
        s2, first = ask(state, q=1)
        s3, second = ask(s2, q=1)
        assert np.linalg.norm(first[0] - second[0]) > 1e-6


class TestConstrainedAsk:
    def make(self, feasible_any):
        state = fresh(
            objectives=(ObjectiveSpec(0, "maximize"),),
            constraints=(ConstraintSpec(1, threshold=0.5, direction="le"),),
        )
        X = np.array([[0.1, 0.1], [0.4, 0.6], [0.8, 0.3], [0.3, 0.9]])
        y = quadratic(X)
        c = np.full(4, 0.2 if feasible_any else 2.0)
        c = np.clip(c, 0.0, 1.0)
        return tell(state, X, np.column_stack([y, c]))

    def test_constrained_mode_with_feasible_points(self):
        state = self.make(feasible_any=True)
        state, points = ask(state, q=2)
        assert state.history[-1]["mode"] == "constrained"
        assert points.shape == (2, 2)

    def test_feasibility_search_without_feasible_points(self):
        state = self.make(feasible_any=False)
        state, points = ask(state, q=1)
        assert state.history[-1]["mode"] == "feasibility_search"

    def test_recommend_falls_back_flagged(self):
        state = self.make(feasible_any=False)
        rec = recommend(state)
        assert rec.rationale == "best_posterior"
        assert rec.flagged

    def test_recommend_feasible(self):
        state = self.make(feasible_any=True)
        rec = recommend(state)
        assert rec.rationale == "posterior_mean_feasible"
        assert not rec.flagged
        assert len(rec.indices) == 1


class TestMultiObjective:
    def make(self, n=8):
        state = fresh(
            objectives=(
                ObjectiveSpec(0, "maximize", "strength"),
                ObjectiveSpec(1, "minimize", "cost"),
            ),
        )
        rng = np.random.default_rng(3)
        X = rng.uniform(size=(n, 2))
        y1 = X.sum(axis=1)
        y2 = X[:, 0] * 2.0
        return tell(state, X, np.column_stack([y1, y2]))

    def test_ask_mode(self):
        state = self.make()
        state, points = ask(state, q=2)
        assert state.history[-1]["mode"] == "multi_objective"
        assert points.shape == (2, 2)
        assert state.space.contains(points).all()

    def test_pareto_indices_match_mask(self):
        state = self.make()
        Y = np.column_stack(
            [state.dataset.outputs[:, 0], state.dataset.outputs[:, 1]]
        )
        mask = pareto_mask(Y, ["maximize", "minimize"])
        assert pareto_indices(state) == tuple(np.flatnonzero(mask))

    def test_recommend_returns_front(self):
        state = self.make()
        rec = recommend(state)
        assert rec.rationale == "pareto_front"
        assert rec.indices == pareto_indices(state)

    def test_pareto_rejected_for_single_objective(self):
        state = fresh()
        with pytest.raises(ArgumentError):
            pareto_indices(state)


class TestRecommend:
    def test_needs_data(self):
        with pytest.raises(InsufficientDataError):
            recommend(fresh())

    def test_single_objective_posterior_argmax(self):
        state = fresh(d=1)
        X = np.linspace(0, 1, 7)[:, None]
        y = -((X[:, 0] - 0.3) ** 2)
        state = tell(state, X, y.reshape(-1, 1))
        rec = recommend(state)
        assert rec.rationale == "posterior_mean_feasible"
        best_x = state.dataset.points[rec.indices[0], 0]
        assert abs(best_x - 0.3) < 0.2

    def test_cold_recommend_is_flagged(self):
        state = fresh()
        state = tell(state, [[0.5, 0.5]], [[1.0]])
        rec = recommend(state)
        assert rec.rationale == "best_observed"
        assert rec.flagged


class TestStateSerialization:
    def test_round_trip_through_json(self):
        state = fresh()
        state, _ = ask(state, q=2)
        state = tell(state, [[0.2, 0.3]], [[0.7]])
        doc = json.loads(json.dumps(state.to_dict()))
        back = CampaignState.from_dict(doc)
        assert back.revision == state.revision
        assert back.dataset == state.dataset
        assert np.array_equal(back.pending, state.pending)
        assert back.space == state.space
        assert back.acquisition == state.acquisition
        assert back.history == state.history

    def test_round_trip_preserves_ask_stream(self):
        state = fresh()
        state = tell(
            state,
            np.random.default_rng(1).uniform(size=(4, 2)),
            np.arange(4.0).reshape(-1, 1),
        )
        back = CampaignState.from_dict(json.loads(json.dumps(state.to_dict())))
        _, a = ask(state, q=2)
        _, b = ask(back, q=2)
        assert np.array_equal(a, b)


class TestQuadraticOracle:
    def test_exact_recovery(self):
        rng = np.random.default_rng(5)
        X = rng.uniform(-1, 1, size=(40, 3))

        def truth(X):
            return (
                2.0
                + X[:, 0]
                - 3.0 * X[:, 2]
                + 0.5 * X[:, 0] * X[:, 1]
                - 1.5 * X[:, 1] ** 2
            )

        oracle = fit_quadratic_oracle(X, truth(X))
        Q = rng.uniform(-1, 1, size=(15, 3))
        assert np.allclose(oracle.predict(Q), truth(Q), atol=1e-9)

    def test_too_few_rows(self):
        with pytest.raises(InsufficientDataError, match="at least"):
            fit_quadratic_oracle(np.eye(3), np.ones(3))

    def test_rank_deficiency_names_terms(self):
        # A constant second coordinate can't identify anything involving x2.
        rng = np.random.default_rng(6)
        X = np.column_stack([rng.uniform(size=30), np.full(30, 0.5)])
        with pytest.raises(InsufficientDataError, match="x2"):
            fit_quadratic_oracle(X, rng.uniform(size=30))

    def test_grid_max_finds_interior_peak(self):
        oracle = fit_quadratic_oracle(
            np.random.default_rng(7).uniform(size=(20, 2)),
            np.zeros(20),
        )
        target = QuadraticOracle(
            coefficients=np.array([0.0, 1.2, 0.8, -1.0, 0.0, -1.0]),
            dimension=2,
        )
        # Peak of 1.2 x - x^2 + 0.8 y - y^2 sits at (0.6, 0.4).
        space = unit_box(2)
        point, value = target.grid_max(space, points_per_dim=101)
        assert np.allclose(point, [0.6, 0.4], atol=1e-9)
        assert value == pytest.approx(0.36 + 0.16, abs=1e-12)

    def test_grid_max_one_dimensional(self):
        oracle = QuadraticOracle(np.array([0.0, 1.0, -1.0]), dimension=1)
        space = DesignSpace.from_bounds(["x"], [0.0], [1.0])
        point, value = oracle.grid_max(space, points_per_dim=101)
        assert point[0] == pytest.approx(0.5)

    def test_constant_outputs_give_pure_intercept(self):
        rng = np.random.default_rng(9)
        oracle = fit_quadratic_oracle(
            rng.uniform(size=(25, 2)), np.full(25, 3.25)
        )
        assert oracle.coefficients[0] == pytest.approx(3.25, abs=1e-9)
        assert np.all(np.abs(oracle.coefficients[1:]) < 1e-9)


class TestClosedLoop:
    def test_trace_and_monotone_best(self):
        state = fresh()
        state = tell(
            state,
            np.random.default_rng(2).uniform(size=(3, 2)),
            quadratic(np.random.default_rng(2).uniform(size=(3, 2))).reshape(-1, 1),
        )
        final, trace = run_closed_loop(
            state, lambda P: quadratic(P), iterations=4, q=1
        )
        assert len(trace) == 4
        assert final.n_observed == state.n_observed + 4
        bests = [row["best"] for row in trace]
        assert bests == sorted(bests)

    def test_improves_on_simple_function(self):
        state = fresh()
        rng = np.random.default_rng(11)
        X0 = rng.uniform(size=(3, 2))
        state = tell(state, X0, quadratic(X0).reshape(-1, 1))
        start_best = quadratic(X0).max()
        final, trace = run_closed_loop(
            state, lambda P: quadratic(P), iterations=6, q=1
        )
        assert trace[-1]["best"] > start_best
        assert trace[-1]["best"] > -0.05

    def test_zero_iterations_is_an_empty_trace(self):
        state = fresh()
        final, trace = run_closed_loop(state, lambda P: P[:, 0], iterations=0)
        assert trace == []
        assert final.revision == state.revision

    def test_non_finite_oracle_aborts_with_partial_trace(self):
        state = fresh()
        X = np.random.default_rng(4).uniform(size=(4, 2))
        state = tell(state, X, quadratic(X).reshape(-1, 1))
        calls = []

        def flaky(P):
            calls.append(len(P))
            if len(calls) > 2:
                return np.full(len(P), np.nan)
            return quadratic(P)

        final, trace = run_closed_loop(state, flaky, iterations=6, q=1)
        assert len(trace) == 2
        assert final.n_observed == state.n_observed + 2

    def test_best_observed_requires_feasibility(self):
        state = fresh(
            constraints=(ConstraintSpec(1, threshold=0.5, direction="le"),),
        )
        state = tell(state, [[0.2, 0.2]], [[1.0, 0.9]])
        idx, value = best_observed(state)
        assert idx is None
        state = tell(state, [[0.6, 0.6]], [[0.8, 0.1]])
        idx, value = best_observed(state)
        assert idx == 1
        assert value == 0.8
