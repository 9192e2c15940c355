import numpy as np
import pytest

from dynamics.odeint import (estimate_velocities, integrate, interpolate_scattered, scattered_to_field,
                             simulate_repressilator_sample)
from dynamics.systemzoo import eval_rhs, make_system
from models.field import GridSpec, ScatteredVelocities, Trajectory
from models.system import SystemName
from utils.errors import NonFiniteState, TooShort


def _decay(x):
    return -x


class TestIntegrate:
    def test_one_step(self):
        trajectory = integrate(_decay, [1.0], 0.1, 0.1)
        assert len(trajectory) == 2
        assert trajectory.states[-1, 0] == pytest.approx(0.90483750, abs=1e-8)

    def test_fourth_order(self):
        errors = []
        for dt in (0.1, 0.05):
            final = integrate(_decay, [1.0], dt, 1.0).states[-1, 0]
            errors.append(abs(final - np.exp(-1.0)))
        order = np.log2(errors[0] / errors[1])
        assert 3.7 <= order <= 4.3

    def test_so_limit_cycle_radius(self):
        system = make_system(SystemName.SO, (0.25, 1.0))
        trajectory = integrate(lambda x: eval_rhs(system, x), [0.9, 0.0], 0.1, 100.0)
        assert np.linalg.norm(trajectory.states[-1]) == pytest.approx(0.5, abs=1e-3)

    def test_state_count_and_times(self):
        trajectory = integrate(_decay, [1.0, 2.0], 0.1, 1.0)
        assert trajectory.states.shape == (11, 2)
        assert trajectory.dt == pytest.approx(0.1)

    def test_batched_states(self):
        trajectory = integrate(_decay, np.ones((3, 2)), 0.1, 0.5)
        assert trajectory.states.shape == (6, 3, 2)

    def test_divergence_keeps_prefix(self):
        with pytest.raises(NonFiniteState) as err:
            integrate(lambda x: x * x, [1.0], 0.01, 2.0)
        partial = err.value.partial
        assert 50 < len(partial) < 200
        assert np.all(np.isfinite(partial.states))

    @pytest.mark.parametrize("dt, horizon", [(0.0, 1.0), (-0.1, 1.0), (0.5, 0.1)])
    def test_invalid_step(self, dt, horizon):
        with pytest.raises(ValueError):
            integrate(_decay, [1.0], dt, horizon)


class TestVelocities:
    def test_linear_drift(self):
        times = np.arange(5) * 0.5
        trajectory = Trajectory(times, times[:, None] * np.array([1.0, 2.0, 3.0]))
        scattered = estimate_velocities(trajectory, (0, 1))
        assert len(scattered) == 4
        np.testing.assert_allclose(scattered.velocities, np.tile([1.0, 2.0], (4, 1)))

    def test_constant(self):
        trajectory = Trajectory(np.arange(3) * 0.1, np.ones((3, 2)))
        np.testing.assert_array_equal(estimate_velocities(trajectory).velocities, 0.0)

    def test_too_short(self):
        with pytest.raises(TooShort):
            estimate_velocities(Trajectory(np.zeros(1), np.zeros((1, 2))))

    def test_converges_to_rhs(self):
        system = make_system(SystemName.SO, (0.25, 1.0))
        deviations = []
        for dt in (0.02, 0.01):
            trajectory = integrate(lambda x: eval_rhs(system, x), [0.5, 0.0], dt, 2.0)
            scattered = estimate_velocities(trajectory)
            deviations.append(np.max(np.abs(scattered.velocities - eval_rhs(system, scattered.points))))
        assert 1.6 < deviations[0] / deviations[1] < 2.4


class TestInterpolation:
    def test_single_sample_is_constant(self):
        scattered = ScatteredVelocities([[0.2, 0.3]], [[1.5, -2.0]])
        field = interpolate_scattered(scattered, GridSpec(5, 5))
        np.testing.assert_allclose(field.u, 1.5, rtol=1e-15)
        np.testing.assert_allclose(field.v, -2.0, rtol=1e-15)

    def test_symmetric_samples_average(self):
        scattered = ScatteredVelocities([[-0.5, 0.0], [0.5, 0.0]], [[1.0, 0.0], [3.0, 2.0]])
        field = interpolate_scattered(scattered, GridSpec(3, 3), k=2)
        assert (field.u[1, 1], field.v[1, 1]) == pytest.approx((2.0, 1.0))

    def test_exact_hits(self, rng):
        grid = GridSpec(4, 4)
        lattice = grid.lattice().reshape(-1, 2)
        velocities = rng.normal(size=(len(lattice), 2))
        field = interpolate_scattered(ScatteredVelocities(lattice, velocities), grid, k=1)
        np.testing.assert_array_equal(field.stacked().transpose(1, 2, 0).reshape(-1, 2), velocities)

    def test_permutation_invariant(self, rng):
        points = rng.uniform(-1, 1, size=(60, 2))
        velocities = rng.normal(size=(60, 2))
        order = rng.permutation(60)
        grid = GridSpec(12, 12)
        first = interpolate_scattered(ScatteredVelocities(points, velocities), grid)
        second = interpolate_scattered(ScatteredVelocities(points[order], velocities[order]), grid)
        np.testing.assert_array_equal(first.u, second.u)
        np.testing.assert_array_equal(first.v, second.v)

    def test_convex_combination(self, rng):
        points = rng.uniform(-1, 1, size=(30, 2))
        velocities = rng.normal(size=(30, 2))
        field = interpolate_scattered(ScatteredVelocities(points, velocities), GridSpec(10, 10))
        assert velocities[:, 0].min() - 1e-12 <= field.u.min() <= field.u.max() <= velocities[:, 0].max() + 1e-12
        assert velocities[:, 1].min() - 1e-12 <= field.v.min() <= field.v.max() <= velocities[:, 1].max() + 1e-12

    def test_provenance_and_bounding_grid(self, rng):
        points = rng.uniform(2.0, 3.0, size=(20, 2))
        field = scattered_to_field(ScatteredVelocities(points, rng.normal(size=(20, 2))), size=16)
        (x0, x1), (y0, y1) = field.grid.extent
        assert x0 < points[:, 0].min() and x1 > points[:, 0].max()
        assert y0 < points[:, 1].min() and y1 > points[:, 1].max()
        assert field.provenance["interpolation"] == "idw"
        assert field.provenance["samples"] == 20


class TestRepressilatorSample:
    def test_seeded(self):
        first = simulate_repressilator_sample(10.0, 2.0, n_cells=20, seed=4, horizon=5.0)
        second = simulate_repressilator_sample(10.0, 2.0, n_cells=20, seed=4, horizon=5.0)
        np.testing.assert_array_equal(first.points, second.points)
        np.testing.assert_array_equal(first.velocities, second.velocities)

    def test_noise_free_states_stay_in_range(self):
        scattered = simulate_repressilator_sample(10.0, 2.0, n_cells=50, sigma=0.0, seed=1, horizon=20.0)
        assert len(scattered) == 50
        assert np.all(scattered.points >= 0.0) and np.all(scattered.points <= 10.2 + 1e-9)
        assert scattered.provenance["params"] == [10.0, 2.0]
