"""Tests for the velocity branches, the reflected shock and the assembled profile."""

from dataclasses import replace

import numpy as np
import pytest

from isothermal_collapse import numerics_config
from isothermal_collapse.exceptions import AssumptionViolated, DomainError, ResidualTooLarge
from isothermal_collapse.similarity_core import critical_points, origin_slope
from isothermal_collapse.velocity_profiles import (
    Branch,
    ShockData,
    VelocityProfile,
    VelocityTail,
    build_hat,
    build_kink,
    build_tilde,
    classify_shock,
    hugoniot,
    ustar_bound,
)


class TestUstarBound:
    def test_spherical_bound_is_zero(self, params_m2):
        assert ustar_bound(params_m2) == pytest.approx(0.0, abs=1e-14)

    def test_cylindrical_bound_is_negative(self, params_m1):
        assert ustar_bound(params_m1) == pytest.approx(-0.5)

    @pytest.mark.parametrize("m,betas", [(1, (-0.75, -0.5, -0.25)), (2, (-1.5, -1.0, -0.5))])
    def test_bound_exceeds_collapse_speed(self, make_params, tolerances, m, betas):
        for beta in betas:
            params = make_params(m=m, beta=beta)
            try:
                _, u_star, _ = build_kink(params, tolerances)
            except AssumptionViolated as e:
                u_star = e.u_star
            assert ustar_bound(params) > u_star, beta


class TestHat:
    def test_passes_through_origin_with_separatrix_slope(self, solution):
        hat = solution.velocity.hat
        assert hat(0.0) == pytest.approx(0.0, abs=1e-12)
        assert hat.derivative(0.0) == pytest.approx(origin_slope(solution.params), rel=1e-6)

    def test_connects_node_and_mirror(self, solution):
        cp = critical_points(solution.params)
        hat = solution.velocity.hat
        assert hat(cp.xi_w) == pytest.approx(cp.U_w, abs=1e-6)
        assert hat(-cp.xi_w) == pytest.approx(-cp.U_w, abs=1e-6)

    def test_odd_symmetry(self, solution):
        hat = solution.velocity.hat
        xi = np.linspace(0.1, 1.9, 7)
        assert np.allclose(hat(xi), -hat(-xi), atol=1e-8)

    def test_inside_wedge_between_omega_and_l_plus(self, solution):
        params = solution.params
        hat = solution.velocity.hat
        xi = np.linspace(-1.95, -0.05, 20)
        U = hat(xi)
        assert np.all(U - xi - params.a < 0)
        assert np.all(U + params.mu * xi > 0)
        assert np.all(params.beta + params.m * U / xi < 0)

    def test_small_residual(self, solution):
        assert solution.velocity.hat.residual(solution.params) < 1e-6

    def test_samples_graded_toward_node(self, solution):
        cp = critical_points(solution.params)
        hat = solution.velocity.hat
        join = numerics_config.NODE_JOIN_FACTOR * abs(cp.xi_w)
        assert hat.xi[1] - cp.xi_w == pytest.approx(join, rel=1e-9)
        assert -cp.xi_w - hat.xi[-2] == pytest.approx(join, rel=1e-9)
        steps = np.diff(hat.xi[1:40])
        assert np.all(steps[1:] > steps[:-1])

    def test_residual_enforced(self, params_m2, tolerances):
        with pytest.raises(ResidualTooLarge):
            build_hat(params_m2, replace(tolerances, residual_tol=1e-15))

    def test_no_tail(self, solution):
        with pytest.raises(DomainError):
            solution.velocity.hat(10.0)


class TestKink:
    def test_u_star_negative_and_below_bound(self, solution):
        u_star = solution.velocity.u_star
        assert u_star < 0
        assert u_star <= ustar_bound(solution.params) + 1e-8
        assert solution.velocity.u_star_error < 1e-6

    def test_decreasing_toward_node(self, solution):
        kink = solution.velocity.kink
        assert np.all(np.diff(kink.U) <= 1e-12)
        assert kink.U[0] > kink.U[-1]

    def test_fast_direction_at_node(self, solution):
        cp = critical_points(solution.params)
        left, right = solution.velocity.kink_slopes()
        assert left == pytest.approx(1 - cp.lambda_plus, rel=1e-6)
        assert right == pytest.approx(1 - cp.lambda_minus, rel=1e-6)

    def test_tail_beyond_truncation(self, solution):
        kink = solution.velocity.kink
        far = kink(-1e8)
        assert far == pytest.approx(solution.velocity.u_star, abs=1e-7)
        assert kink(kink.lo) == pytest.approx(kink.tail.value(kink.lo), abs=1e-8)

    def test_small_residual(self, solution):
        assert solution.velocity.kink.residual(solution.params) < 1e-6

    def test_residual_enforced(self, params_m2, tolerances):
        with pytest.raises(ResidualTooLarge):
            build_kink(params_m2, replace(tolerances, residual_tol=1e-15))

    def test_u_star_stable_under_truncation_and_tolerance(self, solution, tolerances):
        u_star = solution.velocity.u_star
        _, farther, _ = build_kink(solution.params, tolerances, xi_min=2 * solution.velocity.kink.lo)
        _, tighter, _ = build_kink(solution.params, tolerances.tightened(0.5))
        assert farther == pytest.approx(u_star, abs=1e-6)
        assert tighter == pytest.approx(u_star, abs=1e-6)

    def test_u_star_stable_under_node_offset(self, solution, tolerances, monkeypatch):
        monkeypatch.setattr(numerics_config, "NODE_OFFSET_FACTOR", 0.5 * numerics_config.NODE_OFFSET_FACTOR)
        _, u_star, _ = build_kink(solution.params, tolerances)
        assert u_star == pytest.approx(solution.velocity.u_star, abs=1e-7)
        hat = build_hat(solution.params, tolerances)
        xi = np.linspace(-1.9, 1.9, 9)
        assert np.allclose(hat(xi), solution.velocity.hat(xi), atol=1e-9)

    def test_truncation_too_close(self, params_m2, tolerances):
        with pytest.raises(DomainError):
            build_kink(params_m2, tolerances, xi_min=-3.0)


class TestTilde:
    def test_sonic_crossing_inside_hat_range(self, solution):
        cp = critical_points(solution.params)
        assert 0 < solution.velocity.xi_star < -cp.xi_w

    def test_ends_at_sonic_guard_band(self, solution):
        tilde = solution.velocity.tilde
        a = solution.params.a
        gap = tilde(tilde.lo) - tilde.lo + a
        assert gap == pytest.approx(-numerics_config.SONIC_GUARD * a, rel=1e-6)
        assert tilde.lo > solution.velocity.xi_star

    def test_tail_beyond_truncation(self, solution):
        assert solution.velocity.tilde(1e8) == pytest.approx(solution.velocity.u_star, abs=1e-7)

    def test_small_residual(self, solution):
        assert solution.velocity.tilde.residual(solution.params) < 1e-6

    def test_stagnation_point(self, solution):
        profile = solution.velocity
        point = profile.stagnation_point
        if not profile.stagnation:
            assert point is None
            return
        assert point > profile.xi_s
        assert profile.tilde(point) == pytest.approx(0.0, abs=1e-12)
        assert profile.tilde(0.99 * point) > 0 > profile.tilde(1.01 * point)

    def test_requires_negative_u_star(self, params_m2, tolerances):
        with pytest.raises(AssumptionViolated):
            build_tilde(params_m2, 0.1, tolerances)


class TestShock:
    def test_location(self, solution):
        shock = solution.velocity.shock
        assert solution.velocity.xi_star < shock.xi_bar < -critical_points(solution.params).xi_w

    def test_jump_condition(self, solution):
        shock = solution.velocity.shock
        assert shock.jump_residual(solution.params.a) < 1e-8
        assert shock.U_plus == pytest.approx(
            float(hugoniot(shock.xi_bar, solution.velocity.hat, solution.params)), abs=1e-8
        )

    def test_lax_admissible(self, solution):
        shock = solution.velocity.shock
        inner, outer = shock.entropy_margins(solution.params.a)
        assert inner > 0 and outer > 0
        assert shock.family == "2-shock"

    def test_outer_state_supersonic_relative_to_shock(self, solution):
        shock = solution.velocity.shock
        assert shock.V_plus**2 > solution.params.a**2

    def test_densities_filled(self, solution):
        shock = solution.velocity.shock
        assert shock.Omega_minus > shock.Omega_plus > 0

    def test_hugoniot_meets_node_mirror(self, solution):
        cp = critical_points(solution.params)
        value = float(hugoniot(-cp.xi_w, solution.velocity.hat, solution.params))
        assert value + cp.U_w == pytest.approx(0.0, abs=1e-8)

    def test_hugoniot_below_sonic_line(self, solution):
        cp = critical_points(solution.params)
        xi = np.linspace(1e-3, 0.999 * -cp.xi_w, 1000)
        assert np.all(hugoniot(xi, solution.velocity.hat, solution.params) < xi - solution.params.a)

    def test_hugoniot_diverges_at_origin(self, solution):
        values = hugoniot(np.array([1e-1, 1e-2, 1e-3, 1e-4]), solution.velocity.hat, solution.params)
        assert np.all(np.diff(values) < 0)
        assert values[-1] < -1e3

    def test_hugoniot_domain(self, solution):
        with pytest.raises(DomainError):
            hugoniot(-0.5, solution.velocity.hat, solution.params)
        with pytest.raises(DomainError):
            hugoniot(5.0, solution.velocity.hat, solution.params)


class TestClassifyShock:
    def test_two_shock(self):
        assert classify_shock(U_minus=0.5, U_plus=-0.5, xi_bar=1.2, a=1.0) == "2-shock"

    def test_one_shock(self):
        assert classify_shock(U_minus=3.0, U_plus=1.0, xi_bar=1.2, a=1.0) == "1-shock"

    def test_inadmissible(self):
        assert classify_shock(U_minus=-0.5, U_plus=0.5, xi_bar=1.2, a=1.0) == "inadmissible"


class TestVelocityProfile:
    def test_piecewise_selection(self, solution):
        profile = solution.velocity
        cp = critical_points(solution.params)
        assert profile(cp.xi_w - 1.0) == profile.kink(cp.xi_w - 1.0)
        assert profile(-0.5) == profile.hat(-0.5)
        assert profile(profile.xi_s + 0.5) == profile.tilde(profile.xi_s + 0.5)

    def test_continuous_at_node(self, solution):
        cp = critical_points(solution.params)
        profile = solution.velocity
        assert profile.limit(cp.xi_w, "-") == pytest.approx(profile.limit(cp.xi_w, "+"), abs=1e-6)

    def test_jump_at_shock(self, solution):
        profile = solution.velocity
        assert profile.limit(profile.xi_s, "-") > profile.limit(profile.xi_s, "+")

    def test_vector_and_scalar(self, solution):
        values = solution.velocity(np.array([-10.0, -1.0, 0.5, 10.0]))
        assert values.shape == (4,)
        assert isinstance(solution.velocity(1.0), float)

    def test_manifest_round_trip(self, solution):
        data = solution.velocity.to_dict()
        rebuilt = VelocityProfile.from_dict(data, solution.params)
        xi = np.array([-50.0, -2.5, -1.0, 0.0, 0.3, solution.xi_s, 3.0, 400.0])
        assert np.array_equal(rebuilt(xi), solution.velocity(xi))
        assert rebuilt.shock == solution.velocity.shock


class TestBranch:
    def test_unordered_samples_rejected(self):
        with pytest.raises(ValueError):
            Branch("bad", np.array([0.0, 2.0, 1.0]), np.zeros(3), np.zeros(3))

    def test_tail_side_enforced(self, params_m2):
        tail = VelocityTail(-0.2, params_m2)
        branch = Branch("b", np.array([-10.0, -5.0]), np.array([0.0, 0.1]), np.array([0.02, 0.02]), tail, "low")
        assert branch(-20.0) == pytest.approx(tail.value(-20.0))
        with pytest.raises(DomainError):
            branch(-1.0)

    def test_shock_data_round_trip(self):
        shock = ShockData(1.1, 0.4, -0.6, -0.7, -1.7, "2-shock")
        assert ShockData.from_dict(shock.to_dict()) == shock

