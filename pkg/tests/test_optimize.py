"""Acquisition maximization and batch construction."""

import numpy as np
import pytest

from boat.acquisition import (
    AcquisitionSpec,
    expected_improvement,
    q_expected_improvement,
)
from boat.errors import ArgumentError
from boat.gp import GaussianProcess
from boat.kernels import KernelParams
from boat.optimize import (
    MIN_SEPARATION,
    OptBudget,
    maximize_acquisition,
    sobol_candidates,
    suggest_batch,
)
from boat.space import DesignSpace


@pytest.fixture
def box():
    return DesignSpace.from_bounds(["a", "b"], [-2.0, 0.0], [2.0, 4.0])


SMALL = OptBudget(candidates=64, refinements=3, max_local_steps=25)


def fitted_model(seed=0, n=12):
    rng = np.random.default_rng(seed)
    X = rng.uniform([-2.0, 0.0], [2.0, 4.0], size=(n, 2))
    y = -((X[:, 0] - 0.5) ** 2) - (X[:, 1] - 2.0) ** 2
    params = KernelParams(1.0, np.array([1.0, 1.0]))
    return GaussianProcess(
        normalize_inputs=False,
        standardize_outputs=False,
        kernel_params=params,
        noise_var=1e-6,
    ).fit(X, y)


class TestSobolCandidates:
    def test_inside_box_and_counted(self, box):
        X = sobol_candidates(box, 100, seed=0)
        assert X.shape == (100, 2)
        assert box.contains(X).all()

    def test_seed_changes_layout(self, box):
        a = sobol_candidates(box, 32, seed=0)
        b = sobol_candidates(box, 32, seed=1)
        assert not np.allclose(a, b)

    def test_deterministic(self, box):
        assert np.array_equal(
            sobol_candidates(box, 32, seed=5), sobol_candidates(box, 32, seed=5)
        )


class TestMaximizeAcquisition:
    def test_finds_quadratic_peak(self, box):
        target = np.array([0.5, 2.5])

        def acq(X):
            return -np.sum((X - target) ** 2, axis=1)

        result = maximize_acquisition(acq, box, seed=0)
        assert np.allclose(result.x, target, atol=1e-3)
        assert result.value == pytest.approx(0.0, abs=1e-6)

    def test_peak_on_boundary(self, box):
        def acq(X):
            return X.sum(axis=1)

        result = maximize_acquisition(acq, box, budget=SMALL, seed=0)
        assert np.allclose(result.x, [2.0, 4.0], atol=1e-3)

    def test_deterministic(self, box):
        def acq(X):
            return np.sin(X[:, 0]) * np.cos(X[:, 1])

        r1 = maximize_acquisition(acq, box, budget=SMALL, seed=3)
        r2 = maximize_acquisition(acq, box, budget=SMALL, seed=3)
        assert np.array_equal(r1.x, r2.x)
        assert r1.value == r2.value

    def test_ranked_points_sorted_and_bounded(self, box):
        def acq(X):
            return -np.abs(X[:, 0])

        result = maximize_acquisition(acq, box, budget=SMALL, seed=1)
        assert len(result.ranked_points) >= SMALL.candidates
        assert np.all(np.diff(result.ranked_values) <= 0)
        assert box.contains(result.ranked_points).all()

    def test_non_finite_scores_are_ignored(self, box):
        def acq(X):
            values = X[:, 0].copy()
            values[::2] = np.nan
            return values

        result = maximize_acquisition(acq, box, budget=SMALL, seed=2)
        assert np.isfinite(result.value)

    def test_rejects_bad_shapes(self, box):
        with pytest.raises(ArgumentError):
            maximize_acquisition(lambda X: np.zeros((len(X), 2)), box, budget=SMALL)

    def test_budget_validation(self):
        with pytest.raises(ArgumentError):
            OptBudget(candidates=0)
        with pytest.raises(ArgumentError):
            OptBudget(refinements=-1)
        assert OptBudget.from_dict(OptBudget().to_dict()) == OptBudget()


class TestSuggestBatch:
    def incumbent(self, model):
        return float(model.y_raw_.max())

    @pytest.mark.parametrize(
        "strategy", ["joint_qei", "constant_liar", "local_penalization"]
    )
    def test_single_point_matches_plain_acquisition(self, box, strategy):
        model = fitted_model()
        inc = self.incumbent(model)
        spec = AcquisitionSpec(strategy=strategy, n_samples=256)
        batch = suggest_batch(model, box, inc, q=1, spec=spec, budget=SMALL, seed=4)

        def acq(X):
            mean, var = model.posterior(X)
            return expected_improvement(mean, var, inc)

        plain = maximize_acquisition(acq, box, budget=SMALL, seed=4)
        assert batch.shape == (1, 2)
        assert np.array_equal(batch[0], plain.x)

    @pytest.mark.parametrize(
        "strategy", ["joint_qei", "constant_liar", "local_penalization"]
    )
    def test_batch_shape_bounds_and_separation(self, box, strategy):
        model = fitted_model(seed=1)
        spec = AcquisitionSpec(strategy=strategy, n_samples=256)
        batch = suggest_batch(
            model, box, self.incumbent(model), q=3, spec=spec, budget=SMALL, seed=5
        )
        assert batch.shape == (3, 2)
        assert box.contains(batch).all()
        unit = (batch - box.lower) / (box.upper - box.lower)
        for i in range(3):
            for j in range(i + 1, 3):
                assert np.linalg.norm(unit[i] - unit[j]) >= MIN_SEPARATION

    def test_deterministic_given_seed(self, box):
        model = fitted_model(seed=2)
        spec = AcquisitionSpec(n_samples=256)
        a = suggest_batch(
            model, box, self.incumbent(model), q=2, spec=spec, budget=SMALL, seed=6
        )
        b = suggest_batch(
            model, box, self.incumbent(model), q=2, spec=spec, budget=SMALL, seed=6
        )
        assert np.array_equal(a, b)

    def test_joint_batch_improves_on_first_point(self, box):
        # The greedy joint score with shared draws can only grow as the
        # batch extends.
        model = fitted_model(seed=3)
        inc = self.incumbent(model)
        spec = AcquisitionSpec(strategy="joint_qei", n_samples=512)
        batch = suggest_batch(model, box, inc, q=3, spec=spec, budget=SMALL, seed=7)
        values = []
        for q in (1, 2, 3):
            mean, cov = model.joint_posterior(batch[:q])
            values.append(
                q_expected_improvement(mean, cov, inc, n_samples=512, seed=7)
            )
        assert values[0] <= values[1] <= values[2]

    def test_constant_liar_disperses_the_batch(self, box):
        model = fitted_model(seed=4)
        spec = AcquisitionSpec(strategy="constant_liar")
        batch = suggest_batch(
            model, box, self.incumbent(model), q=2, spec=spec, budget=SMALL, seed=8
        )
        # Conditioning on the lie must push the second point away from the
        # first by far more than the bare minimum separation.
        unit = (batch - box.lower) / (box.upper - box.lower)
        assert np.linalg.norm(unit[0] - unit[1]) > 1e-3

    def test_local_penalization_disperses_the_batch(self, box):
        model = fitted_model(seed=5)
        spec = AcquisitionSpec(strategy="local_penalization")
        batch = suggest_batch(
            model, box, self.incumbent(model), q=2, spec=spec, budget=SMALL, seed=9
        )
        unit = (batch - box.lower) / (box.upper - box.lower)
        assert np.linalg.norm(unit[0] - unit[1]) > 1e-3

    def test_rejects_bad_inputs(self, box):
        model = fitted_model()
        with pytest.raises(ArgumentError):
            suggest_batch(model, box, np.nan, q=1)
        with pytest.raises(ArgumentError):
            suggest_batch(model, box, 0.0, q=0)
