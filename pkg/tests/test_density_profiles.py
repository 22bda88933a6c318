"""Tests for the density branches, the collapse constant C_- and the jump at the reflected shock."""

import numpy as np
import pytest

from isothermal_collapse import numerics_config
from isothermal_collapse.density_profiles import (
    DensityBranch,
    DensityProfile,
    _cumulative,
    build_density,
    build_hat_neg,
    build_kink_omega,
    build_tilde_d,
    compute_c_minus,
    perturb_outer,
    rh_density_jump,
    tilde_d,
)
from isothermal_collapse.exceptions import DomainError, QuadratureFailure, WeakJump
from isothermal_collapse.similarity_core import critical_points
from isothermal_collapse.velocity_profiles import ShockData, build_kink


class TestInnerDensityBeforeCollapse:
    def test_starts_at_omega0(self, solution):
        assert solution.density.hat_neg(0.0) == pytest.approx(-1.0)
        assert solution.density(0.0, side="-") == -1.0

    def test_negative_and_nondecreasing(self, solution):
        xi = np.linspace(critical_points(solution.params).xi_w, 0.0, 50)
        values = solution.density.hat_neg(xi)
        assert np.all(values < 0)
        assert np.all(np.diff(values) >= -1e-12)

    def test_grows_in_magnitude_toward_node(self, solution):
        density = solution.density
        assert density.Omega_w / density.Omega0 >= 1.0

    def test_positive_omega0_rejected(self, solution, tolerances):
        with pytest.raises(DomainError):
            build_hat_neg(solution.velocity.hat, 1.0, solution.params, tolerances)


class TestKinkDensity:
    def test_continuous_at_node(self, solution):
        density = solution.density
        xi_w = critical_points(solution.params).xi_w
        assert density.kink(xi_w) == pytest.approx(density.hat_neg(xi_w), rel=1e-12)

    def test_collapse_constant(self, solution):
        density = solution.density
        beta = solution.params.beta
        assert density.C_minus < 0
        assert density.C_minus_error < 1e-4 * abs(density.C_minus)
        far = -1e7
        assert density.kink(far) / abs(far) ** beta == pytest.approx(density.C_minus, rel=1e-5)

    def test_negative_and_decreasing(self, solution):
        xi = np.geomspace(2.5, 5e3, 40)
        values = solution.density.kink(-xi[::-1])
        assert np.all(values < 0)
        assert np.all(np.diff(values) <= 1e-12 * np.abs(values[:-1]))

    def test_collapse_constant_stable_under_truncation(self, solution, tolerances):
        params, density = solution.params, solution.density
        kink_U, _, u_star_error = build_kink(params, tolerances, xi_min=2 * solution.velocity.kink.lo)
        kink = build_kink_omega(kink_U, density.Omega_w, params, tolerances)
        c_minus, _ = compute_c_minus(kink, params, u_star_error)
        assert c_minus == pytest.approx(density.C_minus, rel=1e-6)

    def test_requires_tail(self, solution):
        kink = solution.density.kink
        bare = DensityBranch(kink.name, kink.grid, kink.log, kink.dlog, kink.amplitude, kink.power, kink.ref, True)
        with pytest.raises(DomainError):
            compute_c_minus(bare, solution.params)


class TestOuterDensity:
    def test_node_amplitude(self, solution):
        density = solution.density
        assert density.C_plus == -density.C_minus
        assert density.tilde.amplitude == density.C_plus

    def test_far_field_matches_collapse_profile(self, solution):
        density = solution.density
        beta = solution.params.beta
        far = 1e7
        assert density.tilde(far) / far**beta == pytest.approx(density.C_plus, rel=1e-5)

    def test_d_function(self, solution):
        density = solution.density
        assert tilde_d(density.tilde, density.x_s) == pytest.approx(solution.velocity.shock.Omega_plus, rel=1e-12)

    def test_stable_under_start_offset(self, solution, tolerances):
        density = solution.density
        x0 = 0.5 * numerics_config.X0_FACTOR * density.x_s
        halved = build_tilde_d(solution.velocity.tilde, density.C_plus, solution.params, density.x_s, tolerances, x0)
        xi = np.array([solution.xi_s, 3.0 * solution.xi_s, 1e3])
        assert np.allclose(halved(xi), density.tilde(xi), rtol=1e-6)

    def test_positive(self, solution):
        xi = np.geomspace(solution.xi_s, 1e4, 40)
        assert np.all(solution.density.tilde(xi) > 0)


class TestShockDensityJump:
    def test_rankine_hugoniot_ratio(self, solution):
        shock = solution.velocity.shock
        density = solution.density
        a = solution.params.a
        assert density.limit(solution.xi_s, "+") == pytest.approx(shock.Omega_plus, rel=1e-12)
        assert density.limit(solution.xi_s, "-") == pytest.approx(shock.Omega_minus, rel=1e-12)
        assert shock.Omega_minus == pytest.approx(shock.V_plus**2 / a**2 * shock.Omega_plus, rel=1e-12)

    def test_mass_flux_continuous(self, solution):
        shock = solution.velocity.shock
        assert shock.Omega_minus * shock.V_minus == pytest.approx(shock.Omega_plus * shock.V_plus, rel=1e-7)

    def test_weak_jump(self):
        shock = ShockData(1.0, 0.5, 0.2, -0.5, -0.8, "2-shock")
        with pytest.raises(WeakJump):
            rh_density_jump(shock, 1.0, a=1.0)


class TestInnerDensityAfterCollapse:
    def test_positive_and_nondecreasing(self, solution):
        xi = np.linspace(1e-3, solution.xi_s * (1 - 1e-9), 50)
        values = solution.density.hat_pos(xi)
        assert np.all(values > 0)
        assert np.all(np.diff(values) >= -1e-12 * values[1:])

    def test_value_at_origin(self, solution):
        density = solution.density
        assert density.Omega0_prime > 0
        assert density(0.0, side="+") == density.Omega0_prime
        assert density.hat_pos(1e-9) == pytest.approx(density.Omega0_prime, rel=1e-6)


class TestDensityProfile:
    def test_amplitude_scaling_is_exact(self, solution, tolerances):
        doubled, shock = build_density(solution.velocity, -2.0, tolerances)
        density = solution.density
        assert doubled.C_minus == pytest.approx(2 * density.C_minus, rel=1e-14)
        assert doubled.Omega0_prime == pytest.approx(2 * density.Omega0_prime, rel=1e-14)
        assert shock.Omega_plus == pytest.approx(2 * solution.velocity.shock.Omega_plus, rel=1e-14)

    def test_perturb_outer(self, solution):
        perturbed = perturb_outer(solution.density, 1.01)
        xi = solution.xi_s + 0.5
        assert perturbed(xi, side="+") == pytest.approx(1.01 * solution.density(xi, side="+"))
        assert perturbed.hat_pos is solution.density.hat_pos

    def test_samples_match_interpolant(self, solution):
        for branch in (solution.density.hat_neg, solution.density.hat_pos):
            xi, omega, _ = branch.samples()
            assert np.allclose(omega, branch(xi), rtol=1e-12)

    def test_round_trip(self, solution):
        density = solution.density
        rebuilt = DensityProfile.from_dict(density.to_dict(), solution.params)
        xi = np.array([-80.0, -2.0, -0.7, 0.4, solution.xi_s, 9.0, 1e5])
        assert np.array_equal(rebuilt(xi, side="+"), density(xi, side="+"))
        assert rebuilt.C_minus == density.C_minus


class TestCumulative:
    def test_running_integral(self, tolerances):
        grid = np.linspace(0.0, 1.0, 11)
        running = _cumulative(np.cos, grid, tolerances)
        assert np.allclose(running, np.sin(grid), atol=1e-13)

    def test_unresolved_integrand_rejected(self, tolerances):
        with pytest.raises(QuadratureFailure):
            _cumulative(lambda x: np.sqrt(np.abs(x - 0.3)), np.array([0.0, 1.0]), tolerances)
