"""Input box scaling and output standardization."""

import numpy as np
import pytest

from boat.transforms import BoxScaler, Standardizer


class TestBoxScaler:
    def test_maps_bounds_to_unit_box(self):
        scaler = BoxScaler.from_bounds([10.0, -5.0], [20.0, 5.0])
        Z = scaler.transform(np.array([[10.0, -5.0], [20.0, 5.0], [15.0, 0.0]]))
        assert np.allclose(Z, [[0, 0], [1, 1], [0.5, 0.5]])

    def test_round_trip(self):
        rng = np.random.default_rng(0)
        scaler = BoxScaler.from_bounds([1.0, 2.0, 3.0], [4.0, 8.0, 9.0])
        X = rng.uniform(-10, 10, size=(50, 3))
        assert np.allclose(scaler.inverse_transform(scaler.transform(X)), X)

    def test_from_data(self):
        X = np.array([[1.0, 5.0], [3.0, 5.0], [2.0, 7.0]])
        scaler = BoxScaler.from_data(X)
        Z = scaler.transform(X)
        assert Z.min() == 0.0
        assert Z.max() == 1.0

    def test_degenerate_span_becomes_shift(self):
        # A dimension with zero range must not divide by zero.
        X = np.array([[1.0, 5.0], [2.0, 5.0]])
        scaler = BoxScaler.from_data(X)
        Z = scaler.transform(X)
        assert np.all(np.isfinite(Z))
        assert np.allclose(Z[:, 1], 0.0)


class TestStandardizer:
    def test_zero_mean_unit_variance(self):
        rng = np.random.default_rng(1)
        y = rng.normal(3.0, 5.0, size=200)
        st = Standardizer.fit(y)
        z = st.transform(y)
        assert np.mean(z) == pytest.approx(0.0, abs=1e-12)
        assert np.std(z, ddof=1) == pytest.approx(1.0, rel=1e-12)

    def test_round_trip(self):
        y = np.array([1.0, 4.0, -2.0, 8.0])
        st = Standardizer.fit(y)
        assert np.allclose(st.inverse_transform(st.transform(y)), y)

    def test_variance_transforms(self):
        st = Standardizer(mean=2.0, scale=3.0)
        assert st.inverse_transform_variance(np.array([1.0]))[0] == 9.0
        assert st.transform_variance(np.array([9.0]))[0] == 1.0

    def test_constant_input_uses_unit_scale(self):
        st = Standardizer.fit(np.array([4.0, 4.0, 4.0]))
        assert st.scale == 1.0
        assert np.allclose(st.transform(np.array([4.0])), [0.0])

    def test_single_value_uses_unit_scale(self):
        st = Standardizer.fit(np.array([7.0]))
        assert st.scale == 1.0

    def test_identity(self):
        st = Standardizer.identity()
        y = np.array([1.0, 2.0])
        assert np.array_equal(st.transform(y), y)
        assert np.array_equal(st.inverse_transform_variance(y), y)
