import numpy as np
import pytest

from baselines.critical_points import (CriticalKind, classify_critical, critical_point_stats, find_critical_points,
                                       kind_from_jacobian)
from baselines.lyapunov import (autocorrelation_lag, delay_embedding, lyapunov_max, lyapunov_scores, mean_period,
                                scores_to_labels)
from baselines.polyfit import (linear_fit, linear_predict, parameters_features, polyfit_coeffs,
                               polyfit_residual)
from baselines.roc import fit_threshold_roc
from dynamics.rasterize import add_noise, default_grid, rasterize
from dynamics.systemzoo import make_system
from models.field import GridSpec, VectorField
from models.system import DynClass, SystemName
from utils.errors import DegenerateLabels, NoValidNeighbors, TooShort


def _sine(n=2000, period=40.0):
    return np.sin(2 * np.pi * np.arange(n) / period)


class TestCriticalPoints:
    @pytest.mark.parametrize("jacobian, kind", [
        ([[-1.0, 0.0], [0.0, -2.0]], CriticalKind.ATTRACTING_NODE),
        ([[1.0, 0.0], [0.0, 2.0]], CriticalKind.REPELLING_NODE),
        ([[-0.1, -1.0], [1.0, -0.1]], CriticalKind.ATTRACTING_FOCUS),
        ([[0.1, -1.0], [1.0, 0.1]], CriticalKind.REPELLING_FOCUS),
        ([[1.0, 0.0], [0.0, -1.0]], CriticalKind.SADDLE),
        ([[0.0, -1.0], [1.0, 0.0]], CriticalKind.CENTER),
        ([[0.0, 0.0], [0.0, 0.0]], CriticalKind.DEGENERATE),
    ])
    def test_kind_from_jacobian(self, jacobian, kind):
        assert kind_from_jacobian(np.array(jacobian)) is kind

    def test_stable_focus(self, so_point):
        points = find_critical_points(rasterize(so_point, default_grid(so_point, 16)))
        assert len(points) == 1
        assert np.max(np.abs(points[0].position)) < 1e-6
        assert points[0].kind is CriticalKind.ATTRACTING_FOCUS

    def test_classification(self, so_point, so_cycle):
        assert classify_critical(rasterize(so_point, default_grid(so_point, 16))) is DynClass.POINT
        assert classify_critical(rasterize(so_cycle, default_grid(so_cycle, 16))) is DynClass.CYCLE

    def test_no_zero(self):
        grid = GridSpec(8, 8)
        field = VectorField(np.ones(grid.shape), np.zeros(grid.shape) + 0.5, grid)
        assert find_critical_points(field) == []
        assert classify_critical(field) is DynClass.POINT

    def test_stats_per_class(self, so_point, so_cycle):
        fields = [rasterize(s, default_grid(s, 16)) for s in (so_point, so_cycle)]
        assert critical_point_stats(fields, [0, 1]) == {"point": 1.0, "cycle": 1.0}

    def test_noise_adds_spurious_points(self, so_cycle):
        field = rasterize(so_cycle, default_grid(so_cycle, 64))
        assert len(find_critical_points(add_noise(field, 1.0, 3))) >= 1


class TestRoc:
    def test_separable(self):
        fit = fit_threshold_roc([0.1, 0.2, 0.8, 0.9], [0, 0, 1, 1])
        assert fit.threshold == pytest.approx(0.5)
        assert fit.youden_j == 1.0
        assert fit.auc == 1.0

    def test_non_finite_scores_dropped(self):
        fit = fit_threshold_roc([0.1, np.nan, 0.9, np.inf], [0, 1, 1, 0])
        assert fit.threshold == pytest.approx(0.5)

    def test_single_class(self):
        with pytest.raises(DegenerateLabels):
            fit_threshold_roc([0.1, 0.2], [1, 1])


class TestLyapunov:
    def test_too_short(self):
        with pytest.raises(TooShort):
            lyapunov_max(np.zeros(100))

    def test_embedding(self):
        orbit = delay_embedding(np.arange(10.0), 3, 2)
        assert orbit.shape == (6, 3)
        np.testing.assert_array_equal(orbit[0], [0.0, 2.0, 4.0])
        with pytest.raises(TooShort):
            delay_embedding(np.arange(4.0), 3, 2)

    def test_sine_time_scales(self):
        assert autocorrelation_lag(_sine()) in (10, 11)
        assert mean_period(_sine()) in (40, 41)
        assert mean_period(np.ones(300)) == 0

    def test_periodic_series_does_not_diverge(self):
        assert abs(lyapunov_max(_sine(period=40.3))) < 0.05

    def test_scores_are_seeded_and_thread_independent(self, so_cycle):
        targets = [so_cycle, make_system(SystemName.SO, (0.2, -0.6))]
        single = lyapunov_scores(targets, seed=7, horizon=30.0)
        assert single.shape == (2,)
        np.testing.assert_array_equal(single, lyapunov_scores(targets, seed=7, horizon=30.0, threads=2))

    def test_nan_scores_count_as_point(self):
        np.testing.assert_array_equal(scores_to_labels(np.array([0.2, np.nan, -0.1]), 0.0), [1, 0, 0])

    def test_embedding_dimension_reaches_the_estimate(self, so_cycle):
        default = lyapunov_scores([so_cycle], seed=7, horizon=60.0)
        wider = lyapunov_scores([so_cycle], seed=7, horizon=60.0, emb_dim=6)
        assert np.all(np.isfinite(default)) and np.all(np.isfinite(wider))
        assert default[0] != wider[0]

    def test_too_few_neighbours(self):
        with pytest.raises(NoValidNeighbors):
            lyapunov_max(_sine(200), lag=50)


class TestPolyfit:
    def test_recovers_cubic(self):
        grid = GridSpec(16, 16)
        xy = grid.lattice()
        x, y = xy[..., 0], xy[..., 1]
        field = VectorField(1 + 2 * x - y ** 2 + 0.5 * x ** 3, x * y - 3 * y ** 3, grid)
        expected = [1, 2, 0, 0, 0, -1, 0.5, 0, 0, 0] + [0, 0, 0, 0, 1, 0, 0, 0, 0, -3]
        np.testing.assert_allclose(polyfit_coeffs(field), expected, atol=1e-10)
        assert polyfit_residual(field) < 1e-10

    def test_simple_oscillator_is_cubic(self, so_cycle):
        coeffs = polyfit_coeffs(rasterize(so_cycle, default_grid(so_cycle, 16)))
        assert coeffs[1] == pytest.approx(0.3)
        assert coeffs[2] == pytest.approx(-0.8)
        assert coeffs[6] == pytest.approx(-1.0)

    def test_parameters_features(self, so_point, so_cycle):
        fields = [rasterize(s, default_grid(s, 16)) for s in (so_point, so_cycle)]
        assert parameters_features(fields).shape == (2, 20)

    def test_linear_classifier(self, rng):
        features = np.concatenate([rng.normal(-2, 0.5, size=(30, 3)), rng.normal(2, 0.5, size=(30, 3))])
        labels = np.repeat([0, 1], 30)
        model = linear_fit(features, labels, seed=1)
        np.testing.assert_array_equal(linear_predict(model, features), labels)
        assert linear_predict(model, np.full(3, 2.0)) is DynClass.CYCLE
        again = linear_fit(features, labels, seed=1)
        np.testing.assert_array_equal(model.weights, again.weights)
        with pytest.raises(ValueError):
            linear_predict(model, np.zeros(4))

    def test_single_class(self):
        with pytest.raises(DegenerateLabels):
            linear_fit(np.zeros((3, 2)), [0, 0, 0])
