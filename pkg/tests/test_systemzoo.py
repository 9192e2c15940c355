import numpy as np
import pytest

from dynamics.systemzoo import (TABLE_SYSTEMS, boundary_curve, boundary_distance, eval_rhs,
                                fixed_point, make_system, param_ranges, repressilator_boundary,
                                repressilator_curve, repressilator_distance, repressilator_fixed_point,
                                repressilator_label, resolve_name, sample_params, subhopf_regime,
                                true_label)
from models.system import DynClass, Regime, SystemName
from utils.errors import (NonFiniteInput, NoOscillationWindow, ParamOutOfRange, UnknownSystem,
                          UnsupportedSystem)


class TestMakeSystem:
    def test_so_extent(self):
        system = make_system("simple_oscillator", (0.25, 1.0))
        assert system.extent == ((-1.0, 1.0), (-1.0, 1.0))
        assert system.dim == 2

    def test_selkov_extent(self):
        assert make_system(SystemName.SELKOV, (0.05, 0.5)).extent == ((0.0, 3.0), (0.0, 3.0))

    def test_out_of_range_names_coordinate(self):
        with pytest.raises(ParamOutOfRange) as err:
            make_system(SystemName.SO, (2.0, 1.0))
        assert err.value.coordinate == "a"

    def test_wrong_arity(self):
        with pytest.raises(ParamOutOfRange):
            make_system(SystemName.VAN_DER_POL, (0.1, 0.2))

    def test_unknown_system(self):
        with pytest.raises(UnknownSystem):
            make_system("lorenz", (1.0,))

    def test_repressilator_ranges_are_open(self):
        with pytest.raises(ParamOutOfRange):
            make_system(SystemName.REPRESSILATOR, (0.0, 1.0))
        assert make_system(SystemName.REPRESSILATOR, (10.0, 1.0)).dim == 6

    def test_names_are_stable(self):
        assert resolve_name("  BZReaction ") is SystemName.BZ_REACTION
        assert [s.value for s in SystemName] == [
            "simple_oscillator", "suphopf", "lienard_poly", "lienard_sigmoid", "vanderpol",
            "bzreaction", "selkov", "subhopf", "repressilator"]


class TestEvalRhs:
    def test_so_by_hand(self):
        system = make_system(SystemName.SO, (-0.5, 1.0))
        np.testing.assert_allclose(eval_rhs(system, (1.0, 0.0)), (-1.5, 1.0))

    def test_vanderpol_by_hand(self):
        system = make_system(SystemName.VAN_DER_POL, (0.5,))
        np.testing.assert_allclose(eval_rhs(system, (1.0, 1.0)), (1.0, -1.5))

    def test_repressilator_at_origin(self):
        system = make_system(SystemName.REPRESSILATOR, (10.0, 1.0))
        out = eval_rhs(system, np.zeros(6))
        np.testing.assert_allclose(out[0::2], 10.2)
        np.testing.assert_allclose(out[1::2], 0.0)

    @pytest.mark.parametrize("name, params", [
        (SystemName.SO, (0.4, -0.7)),
        (SystemName.SUBCRITICAL_HOPF, (-0.1, 0.5, 0.3)),
    ])
    def test_zero_at_origin(self, name, params):
        assert np.all(eval_rhs(make_system(name, params), (0.0, 0.0)) == 0.0)

    @pytest.mark.parametrize("name, params", [
        (SystemName.SO, (0.2, 0.9)),
        (SystemName.SUPERCRITICAL_HOPF, (0.3, -0.4, 0.8)),
        (SystemName.SUBCRITICAL_HOPF, (-0.2, 0.6, -0.5)),
    ])
    def test_rotational_covariance(self, name, params, rng):
        system = make_system(name, params)
        points = rng.uniform(-1.0, 1.0, size=(8, 2))
        psi = 0.7
        rot = np.array([[np.cos(psi), -np.sin(psi)], [np.sin(psi), np.cos(psi)]])
        rotated_out = eval_rhs(system, points @ rot.T)
        np.testing.assert_allclose(rotated_out, eval_rhs(system, points) @ rot.T, atol=1e-12)

    def test_stacked_points_keep_shape(self, so_point):
        assert eval_rhs(so_point, np.zeros((3, 4, 2))).shape == (3, 4, 2)

    def test_non_finite_input(self, so_point):
        with pytest.raises(NonFiniteInput):
            eval_rhs(so_point, (np.nan, 0.0))


class TestLabels:
    def test_so(self):
        assert true_label(make_system(SystemName.SO, (0.3, 1.0))) is DynClass.CYCLE
        assert true_label(make_system(SystemName.SO, (-0.3, 1.0))) is DynClass.POINT

    def test_selkov_window(self):
        assert true_label(make_system(SystemName.SELKOV, (0.05, 0.5))) is DynClass.CYCLE
        assert true_label(make_system(SystemName.SELKOV, (0.05, 1.1))) is DynClass.POINT

    def test_probe_systems_have_no_table_label(self):
        with pytest.raises(UnsupportedSystem):
            true_label(make_system(SystemName.SUBCRITICAL_HOPF, (0.1, 0.0, 0.0)))

    @pytest.mark.parametrize("mu, regime", [(-0.4, Regime.POINT), (-0.1, Regime.BISTABLE),
                                            (0.3, Regime.PERIODIC)])
    def test_subhopf_regimes(self, mu, regime):
        assert subhopf_regime(make_system(SystemName.SUBCRITICAL_HOPF, (mu, 1.0, 0.0))) is regime

    @pytest.mark.parametrize("name", TABLE_SYSTEMS)
    def test_label_matches_distance_sign(self, name):
        for theta in sample_params(name, 100, 5):
            system = make_system(name, theta)
            distance = boundary_distance(system)
            if distance != 0:
                assert (distance > 0) == (true_label(system) is DynClass.CYCLE)


class TestSampling:
    def test_seeded_determinism(self):
        np.testing.assert_array_equal(sample_params(SystemName.SO, 3, 7), sample_params(SystemName.SO, 3, 7))

    def test_bz_ranges(self):
        (a, b), = sample_params(SystemName.BZ_REACTION, 1, 11)
        assert 2.0 <= a <= 19.0 and 2.0 <= b <= 6.0

    def test_so_label_balance(self):
        params = sample_params(SystemName.SO, 10_000, 3)
        assert abs(np.mean(params[:, 0] > 0) - 0.5) < 0.03

    def test_within_declared_ranges(self):
        params = sample_params(SystemName.LIENARD_SIGMOID, 500, 2)
        ranges = np.array(param_ranges(SystemName.LIENARD_SIGMOID))
        assert np.all(params >= ranges[:, 0]) and np.all(params <= ranges[:, 1])

    def test_count_must_be_positive(self):
        with pytest.raises(ValueError):
            sample_params(SystemName.SO, 0, 1)


class TestBoundary:
    def test_so_distances(self):
        assert boundary_distance(make_system(SystemName.SO, (0.3, 0.5))) == pytest.approx(0.3)
        assert boundary_distance(make_system(SystemName.SO, (-0.2, -0.9))) == pytest.approx(-0.2)

    def test_so_curve_is_the_a_zero_segment(self):
        (curve,) = boundary_curve(SystemName.SO, 11)
        np.testing.assert_array_equal(curve[:, 0], 0.0)
        assert curve[0, 1] == -1.0 and curve[-1, 1] == 1.0

    def test_selkov_branches_match_closed_form(self):
        lower, upper = boundary_curve(SystemName.SELKOV, 32)
        a = lower[:, 0]
        root = np.sqrt(1.0 - 8.0 * a)
        np.testing.assert_allclose(lower[:, 1], np.sqrt(0.5 * (1.0 - 2.0 * a - root)), atol=1e-8)
        np.testing.assert_allclose(upper[:, 1], np.sqrt(0.5 * (1.0 - 2.0 * a + root)), atol=1e-8)

    def test_curve_residuals(self):
        for a, b in np.vstack(boundary_curve(SystemName.SELKOV, 64)):
            assert abs(b ** 4 + (2 * a - 1) * b ** 2 + a + a * a) < 1e-6
        for a, b in boundary_curve(SystemName.BZ_REACTION, 64)[0]:
            assert abs(3 * a / 5 - 25 / a - b) < 1e-6

    def test_point_on_curve_has_zero_distance(self):
        a, b = boundary_curve(SystemName.BZ_REACTION, 512)[0][100]
        assert abs(boundary_distance(make_system(SystemName.BZ_REACTION, (a, b)))) < 1e-3

    def test_curve_is_a_copy(self):
        curve = boundary_curve(SystemName.SELKOV, 16)[0]
        curve[:] = 0.0
        assert np.any(boundary_curve(SystemName.SELKOV, 16)[0] != 0.0)

    @pytest.mark.parametrize("name", TABLE_SYSTEMS)
    def test_every_branch_has_resolution_points(self, name):
        for branch in boundary_curve(name, 9):
            assert branch.shape == (9, len(param_ranges(name)))

    def test_van_der_pol_boundary_is_mu_zero(self):
        (curve,) = boundary_curve(SystemName.VAN_DER_POL, 5)
        np.testing.assert_array_equal(curve, np.zeros((5, 1)))

    def test_resolution_and_support(self):
        with pytest.raises(ValueError):
            boundary_curve(SystemName.SO, 1)
        with pytest.raises(UnsupportedSystem):
            boundary_curve(SystemName.REPRESSILATOR, 8)

    def test_fixed_points(self):
        bz = make_system(SystemName.BZ_REACTION, (10.0, 3.0))
        assert np.allclose(eval_rhs(bz, fixed_point(bz)), 0.0, atol=1e-12)
        selkov = make_system(SystemName.SELKOV, (0.05, 0.5))
        assert np.allclose(eval_rhs(selkov, fixed_point(selkov)), 0.0, atol=1e-12)


class TestRepressilator:
    def test_fixed_point_at_alpha_10(self):
        p_hat, slope = repressilator_fixed_point(10.0)
        assert p_hat == pytest.approx(2.08, abs=0.01)
        assert slope == pytest.approx(-1.466, abs=0.005)
        assert abs((p_hat - 0.2) * (1.0 + p_hat ** 2) - 10.0) < 1e-8

    def test_window_is_ordered(self):
        beta1, beta2 = repressilator_boundary(10.0)
        assert 0.0 < beta1 < beta2

    def test_window_stays_ordered_for_steep_repression(self, monkeypatch):
        import dynamics.systemzoo as systemzoo
        monkeypatch.setattr(systemzoo, "repressilator_fixed_point", lambda alpha: (5.0, -3.0))
        beta1, beta2 = systemzoo.repressilator_boundary(50.0)
        assert beta1 < beta2 < 0.0
        assert systemzoo.repressilator_label(50.0, 0.5 * (beta1 + beta2)) is DynClass.CYCLE
        assert systemzoo.repressilator_label(50.0, 1.0) is DynClass.POINT

    def test_window_satisfies_quadratic(self):
        # beta1, beta2 are the roots of (4A + 8) beta^2 - 2 (3A^2 - 4A - 8) beta + (4A + 8) = 0
        _, slope = repressilator_fixed_point(10.0)
        for beta in repressilator_boundary(10.0):
            residual = ((4 * slope + 8) * beta ** 2 - 2 * (3 * slope ** 2 - 4 * slope - 8) * beta
                        + (4 * slope + 8))
            assert abs(residual) < 1e-8

    def test_no_window_for_small_alpha(self):
        with pytest.raises(NoOscillationWindow):
            repressilator_boundary(0.01)
        assert repressilator_label(0.01, 1.0) is DynClass.POINT

    def test_labels_and_distance_sign(self):
        beta1, beta2 = repressilator_boundary(10.0)
        inside = 0.5 * (beta1 + beta2)
        assert repressilator_label(10.0, inside) is DynClass.CYCLE
        assert repressilator_label(10.0, beta2 + 1.0) is DynClass.POINT
        assert repressilator_distance(10.0, inside) > 0
        assert repressilator_distance(10.0, beta2 + 1.0) < 0

    def test_curve_opens_where_slope_is_minus_four_thirds(self):
        curve = repressilator_curve(64)
        alpha_min = curve[:, 0].min()
        assert repressilator_fixed_point(alpha_min)[1] == pytest.approx(-4.0 / 3.0, abs=1e-8)
