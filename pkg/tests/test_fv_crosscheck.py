"""Tests for the finite-volume cross-check."""

from dataclasses import replace

import numpy as np
import pytest

from isothermal_collapse import numerics_config
from isothermal_collapse.config import RunConfig
from isothermal_collapse.exceptions import CFLViolation, FVConfigError
from isothermal_collapse.fv_crosscheck import (
    RIEMANN_FLUXES,
    ExactIsothermalFlux,
    FVConfig,
    HLLFlux,
    advance,
    compare,
    convergence_study,
    fv_checks,
    init_from_similarity,
    physical_flux,
    shock_front,
)


class TestFVConfig:
    @pytest.mark.parametrize(
        "overrides",
        [
            {"cells": 32},
            {"cfl": 1.0},
            {"cfl": 0.0},
            {"t_start": 0.0},
            {"t_end": -1.5},
            {"flux": "roe"},
            {"dt": 0.0},
            {"r_min": 0.0},
        ],
    )
    def test_invalid(self, overrides):
        kwargs = {"r_min": 0.1, "r_max": 8.0, **overrides}
        with pytest.raises(FVConfigError):
            FVConfig(**kwargs)

    def test_for_solution(self, sol_m2):
        config = FVConfig.for_solution(sol_m2, cells=128)
        assert config.r_min == pytest.approx(0.1)
        assert config.r_max == pytest.approx(8.0)
        assert config.cells == 128

    def test_from_run_config(self, sol_m2):
        config = FVConfig.from_run_config(sol_m2, RunConfig(cells=[64, 256], cfl=0.3, t_end=0.25))
        assert config.cells == 256
        assert config.cfl == 0.3
        assert config.t_end == 0.25


def star(rho_l, u_l, rho_r, u_r, a=1.0):
    rho, u = ExactIsothermalFlux().star_state(*(np.array([v]) for v in (rho_l, u_l, rho_r, u_r)), a)
    return rho[0], u[0]


class TestRiemannFluxes:
    @pytest.mark.parametrize("name", sorted(RIEMANN_FLUXES))
    def test_consistent_with_physical_flux(self, name):
        flux = RIEMANN_FLUXES[name]()
        rho = np.array([0.5, 2.0, 1.0])
        u = np.array([-2.0, 0.3, 1.5])
        mass, momentum = flux(rho, u, rho, u, 1.0)
        expected_mass, expected_momentum = physical_flux(rho, u, 1.0)
        assert np.allclose(mass, expected_mass, rtol=1e-12)
        assert np.allclose(momentum, expected_momentum, rtol=1e-12)

    def test_symmetric_collision(self):
        rho_s, u_s = star(1.0, 1.0, 1.0, -1.0)
        assert u_s == pytest.approx(0.0, abs=1e-14)
        assert rho_s > 1.0

    def test_shock_star_state_satisfies_jump(self):
        # two shocks of equal strength: u_L - u* = a (rho* - rho)/sqrt(rho* rho)
        rho, _ = star(1.0, 1.0, 1.0, -1.0)
        assert (rho - 1.0) / np.sqrt(rho) == pytest.approx(1.0, rel=1e-12)

    def test_symmetric_rarefaction(self):
        rho_s, u_s = star(1.0, -0.5, 1.0, 0.5)
        assert u_s == pytest.approx(0.0, abs=1e-14)
        assert rho_s == pytest.approx(np.exp(-0.5), rel=1e-12)

    def test_hll_upwinds_supersonic_flow(self):
        mass, _ = HLLFlux()(np.array([1.0]), np.array([3.0]), np.array([2.0]), np.array([3.5]), 1.0)
        assert mass[0] == pytest.approx(3.0)


class TestScheme:
    @pytest.fixture(scope="class")
    def run(self, sol_m2):
        config = FVConfig.for_solution(sol_m2, cells=256, t_end=0.5)
        start = init_from_similarity(sol_m2, config)
        return config, start, advance(start, config, sol_m2)

    def test_initial_state_matches_exact(self, sol_m2, run):
        _, start, _ = run
        errors = compare(start, sol_m2)
        assert errors["rho"] < 1e-8
        assert errors["momentum"] < 1e-8

    def test_reaches_end_time(self, run):
        config, _, final = run
        assert final.t == pytest.approx(config.t_end, abs=1e-14)
        assert final.steps > 0

    def test_conservation(self, run):
        _, start, final = run
        drift = abs(final.total_mass - start.total_mass - final.boundary_mass) / start.total_mass
        assert drift < 1e-10

    def test_positive(self, run):
        _, _, final = run
        assert np.all(final.rho > 0)

    def test_shock_front_position(self, sol_m2, run):
        _, _, final = run
        assert abs(shock_front(final) - sol_m2.xi_s * final.t) <= numerics_config.FV_FRONT_CELLS * final.dr

    def test_fixed_step_above_cfl(self, sol_m2):
        config = FVConfig.for_solution(sol_m2, cells=64, dt=1.0)
        with pytest.raises(CFLViolation):
            advance(init_from_similarity(sol_m2, config), config, sol_m2)

    def test_converges(self, sol_m2):
        base = FVConfig.for_solution(sol_m2, t_start=-0.5, t_end=0.25)
        rows = convergence_study(sol_m2, [256, 128], base)
        assert [row["cells"] for row in rows] == [128, 256]
        assert rows[0]["rate_rho"] is None
        assert rows[1]["l1_rho"] < rows[0]["l1_rho"]
        assert rows[1]["l1_momentum"] < rows[0]["l1_momentum"]

    def test_flux_choice(self, sol_m2):
        base = FVConfig.for_solution(sol_m2, cells=64, t_start=-0.5, t_end=-0.25)
        results = {}
        for name in RIEMANN_FLUXES:
            config = replace(base, flux=name)
            results[name] = compare(advance(init_from_similarity(sol_m2, config), config, sol_m2), sol_m2)["rho"]
        assert all(0 < value < 1.0 for value in results.values())


class TestChecks:
    @pytest.mark.slow
    def test_pass_on_fine_grid(self, sol_m2):
        results = {r.name: r for r in fv_checks(sol_m2, FVConfig.for_solution(sol_m2, cells=512))}
        assert list(results) == ["fv_conservation", "fv_positivity", "fv_shock_front", "fv_convergence_rate"]
        assert all(r.passed for r in results.values()), [r.to_dict() for r in results.values() if not r.passed]
        assert results["fv_convergence_rate"].value >= numerics_config.FV_MIN_RATE
        assert results["fv_shock_front"].value <= numerics_config.FV_FRONT_CELLS

    def test_front_skipped_before_collapse(self, sol_m2):
        config = FVConfig.for_solution(sol_m2, cells=64, t_start=-0.5, t_end=-0.25)
        names = [r.name for r in fv_checks(sol_m2, config)]
        assert names == ["fv_conservation", "fv_positivity", "fv_convergence_rate"]
