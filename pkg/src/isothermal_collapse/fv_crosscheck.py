"""Finite-volume cross-check of the similarity solution.

Evolves the quasi one-dimensional radial system

    (r^m rho)_t + (r^m rho u)_r = 0
    (r^m rho u)_t + (r^m (rho u² + a² rho))_r = m r^(m-1) a² rho

on [r_min, R] with a first-order Godunov-type scheme, starting from exact
similarity data and fed by exact boundary states, and measures the distance
to the exact solution through collapse and shock reflection.
"""

import logging
from dataclasses import dataclass, replace

import numpy as np
from tqdm import tqdm

from . import numerics_config, quadrature
from .config import RunConfig
from .exceptions import CFLViolation, FVConfigError, PositivityLoss
from .flow_field import CheckResult, SimilaritySolution, evaluate

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FVConfig:
    r_min: float
    r_max: float
    cells: int = numerics_config.FV_DEFAULT_CELLS
    cfl: float = numerics_config.FV_DEFAULT_CFL
    t_start: float = -1.0
    t_end: float = 0.5
    flux: str = "hll"  # "hll" or "exact"
    dt: float | None = None  # fixed step; None: CFL-limited

    def __post_init__(self):
        if not 0 < self.r_min < self.r_max:
            raise FVConfigError(f"need 0 < r_min < R, got [{self.r_min}, {self.r_max}]")
        if self.cells < 64:
            raise FVConfigError(f"at least 64 cells required, got {self.cells}")
        if not 0 < self.cfl < 1:
            raise FVConfigError(f"cfl must lie in (0, 1), got {self.cfl}")
        if not self.t_start < 0:
            raise FVConfigError(f"runs start before collapse, got t_start={self.t_start}")
        if not self.t_end > self.t_start:
            raise FVConfigError(f"t_end={self.t_end} must follow t_start={self.t_start}")
        if self.flux not in RIEMANN_FLUXES:
            raise FVConfigError(f"unknown flux {self.flux!r}; expected one of {sorted(RIEMANN_FLUXES)}")
        if self.dt is not None and not self.dt > 0:
            raise FVConfigError(f"dt must be positive, got {self.dt}")

    @classmethod
    def for_solution(cls, sol: SimilaritySolution, **kwargs) -> "FVConfig":
        """Default domain [0.05, 4] x |xi_w| for this solution."""
        w = abs(sol.xi_w)
        return cls(
            r_min=numerics_config.FV_R_MIN_FACTOR * w,
            r_max=numerics_config.FV_R_MAX_FACTOR * w,
            **kwargs,
        )

    @classmethod
    def from_run_config(cls, sol: SimilaritySolution, config: RunConfig) -> "FVConfig":
        return cls.for_solution(
            sol, cells=max(config.cells), cfl=config.cfl, t_start=config.t_start, t_end=config.t_end
        )


@dataclass
class FVState:
    """Cell averages of (r^m rho, r^m rho u) on a uniform radial grid."""

    edges: np.ndarray
    Q: np.ndarray  # shape (2, cells)
    t: float
    m: int
    boundary_mass: float = 0.0  # net r^m rho u flux in through both ends since the start
    steps: int = 0

    @property
    def dr(self) -> float:
        return float(self.edges[1] - self.edges[0])

    @property
    def centers(self) -> np.ndarray:
        return 0.5 * (self.edges[:-1] + self.edges[1:])

    @property
    def volumes(self) -> np.ndarray:
        n = self.m + 1
        return (self.edges[1:] ** n - self.edges[:-1] ** n) / n

    @property
    def rho(self) -> np.ndarray:
        return self.Q[0] * self.dr / self.volumes

    @property
    def u(self) -> np.ndarray:
        return self.Q[1] / self.Q[0]

    @property
    def total_mass(self) -> float:
        return float(np.sum(self.Q[0]) * self.dr)

    def copy(self) -> "FVState":
        return replace(self, Q=self.Q.copy())


# --- Riemann fluxes ---


def physical_flux(rho, u, a: float):
    return rho * u, rho * u * u + a * a * rho


class RiemannFlux:
    """Interface flux from left and right primitive states."""

    name = "base"

    def __call__(self, rho_l, u_l, rho_r, u_r, a: float):
        raise NotImplementedError


class HLLFlux(RiemannFlux):
    """Two-wave flux with speeds min(u_L - a, u_R - a) and max(u_L + a, u_R + a)."""

    name = "hll"

    def __call__(self, rho_l, u_l, rho_r, u_r, a: float):
        s_l = np.minimum(u_l - a, u_r - a)
        s_r = np.maximum(u_l + a, u_r + a)
        f_l = physical_flux(rho_l, u_l, a)
        f_r = physical_flux(rho_r, u_r, a)
        q_l = (rho_l, rho_l * u_l)
        q_r = (rho_r, rho_r * u_r)
        out = []
        for fl, fr, ql, qr in zip(f_l, f_r, q_l, q_r):
            middle = (s_r * fl - s_l * fr + s_l * s_r * (qr - ql)) / (s_r - s_l)
            out.append(np.where(s_l >= 0, fl, np.where(s_r <= 0, fr, middle)))
        return tuple(out)


class ExactIsothermalFlux(RiemannFlux):
    """Godunov flux from the exact isothermal Riemann solution sampled at x/t = 0.

    The star density solves f_L(rho*) + f_R(rho*) + u_R - u_L = 0 with
    f_K = a ln(rho*/rho_K) across a rarefaction and a (rho* - rho_K)/sqrt(rho* rho_K)
    across a shock; Newton iteration runs on z = ln rho*.
    """

    name = "exact"

    def __init__(self, max_iter: int = 50, tol: float = 1e-13):
        self.max_iter = max_iter
        self.tol = tol

    @staticmethod
    def _wave(rho, rho_k, a):
        shock = rho > rho_k
        root = np.sqrt(rho * rho_k)
        f = np.where(shock, a * (rho - rho_k) / root, a * np.log(rho / rho_k))
        df_dz = np.where(shock, a * (rho + rho_k) / (2 * root), a)
        return f, df_dz

    def star_state(self, rho_l, u_l, rho_r, u_r, a: float):
        z = 0.5 * np.log(rho_l * rho_r) - (u_r - u_l) / (2 * a)
        for _ in range(self.max_iter):
            rho = np.exp(z)
            f_l, d_l = self._wave(rho, rho_l, a)
            f_r, d_r = self._wave(rho, rho_r, a)
            step = (f_l + f_r + u_r - u_l) / (d_l + d_r)
            z = z - step
            if np.max(np.abs(step)) < self.tol:
                break
        rho = np.exp(z)
        f_l, _ = self._wave(rho, rho_l, a)
        f_r, _ = self._wave(rho, rho_r, a)
        return rho, 0.5 * (u_l + u_r) + 0.5 * (f_r - f_l)

    def __call__(self, rho_l, u_l, rho_r, u_r, a: float):
        rho_s, u_s = self.star_state(rho_l, u_l, rho_r, u_r, a)

        # left wave governs the interface when the contact moves right
        left_shock = rho_s > rho_l
        s_l = u_l - a * np.sqrt(rho_s / rho_l)
        left_is_l = np.where(left_shock, s_l >= 0, u_l - a >= 0)
        left_is_star = np.where(left_shock, s_l < 0, u_s - a <= 0)
        rho_left = np.where(left_is_l, rho_l, np.where(left_is_star, rho_s, rho_l * np.exp((u_l - a) / a)))
        u_left = np.where(left_is_l, u_l, np.where(left_is_star, u_s, a))

        right_shock = rho_s > rho_r
        s_r = u_r + a * np.sqrt(rho_s / rho_r)
        right_is_r = np.where(right_shock, s_r <= 0, u_r + a <= 0)
        right_is_star = np.where(right_shock, s_r > 0, u_s + a >= 0)
        rho_right = np.where(right_is_r, rho_r, np.where(right_is_star, rho_s, rho_r * np.exp(-(a + u_r) / a)))
        u_right = np.where(right_is_r, u_r, np.where(right_is_star, u_s, -a))

        use_left = u_s >= 0
        return physical_flux(np.where(use_left, rho_left, rho_right), np.where(use_left, u_left, u_right), a)


RIEMANN_FLUXES = {"hll": HLLFlux, "exact": ExactIsothermalFlux}


# --- Scheme ---


def _exact_averages(sol: SimilaritySolution, t: float, edges: np.ndarray, m: int) -> np.ndarray:
    """Cell averages of (r^m rho, r^m rho u) by 3-point Gauss quadrature."""
    x, w = quadrature.gauss_legendre(3)
    lo, hi = edges[:-1, None], edges[1:, None]
    r = 0.5 * (lo + hi) + 0.5 * (hi - lo) * x
    rho, u = evaluate(sol, t, r)
    mass = rho * r**m
    return np.stack([0.5 * np.sum(mass * w, axis=-1), 0.5 * np.sum(mass * u * w, axis=-1)])


def init_from_similarity(sol: SimilaritySolution, config: FVConfig) -> FVState:
    edges = np.linspace(config.r_min, config.r_max, config.cells + 1)
    Q = _exact_averages(sol, config.t_start, edges, sol.params.m)
    state = FVState(edges=edges, Q=Q, t=config.t_start, m=sol.params.m)
    if np.any(state.Q[0] <= 0):
        raise PositivityLoss(f"non-positive initial density at t={config.t_start}")
    logger.info(f"FV state: {config.cells} cells on [{config.r_min:.4g}, {config.r_max:.4g}] at t={config.t_start}")
    return state


def _ghosts(sol: SimilaritySolution, state: FVState) -> tuple[tuple[float, float], tuple[float, float]]:
    """Exact point states at the ghost-cell centres."""
    dr = state.dr
    left = max(state.edges[0] - 0.5 * dr, 0.5 * state.edges[0])
    right = state.edges[-1] + 0.5 * dr
    rho, u = evaluate(sol, state.t, np.array([left, right]))
    return (float(rho[0]), float(u[0])), (float(rho[1]), float(u[1]))


def _max_speed(rho_u: tuple[np.ndarray, np.ndarray], a: float) -> float:
    return float(np.max(np.abs(rho_u[1])) + a)


def step(state: FVState, sol: SimilaritySolution, flux: RiemannFlux, dt: float) -> FVState:
    """One forward-Euler step of the unsplit flux-difference update with the geometric source."""
    a = sol.params.a
    m = state.m
    (rho_gl, u_gl), (rho_gr, u_gr) = _ghosts(sol, state)
    rho = np.concatenate([[rho_gl], state.rho, [rho_gr]])
    u = np.concatenate([[u_gl], state.u, [u_gr]])
    f_mass, f_mom = flux(rho[:-1], u[:-1], rho[1:], u[1:], a)
    area = state.edges**m
    dr = state.dr
    new = state.copy()
    new.Q[0] -= dt / dr * (area[1:] * f_mass[1:] - area[:-1] * f_mass[:-1])
    new.Q[1] -= dt / dr * (area[1:] * f_mom[1:] - area[:-1] * f_mom[:-1])
    new.Q[1] += dt * a * a * state.rho * (area[1:] - area[:-1]) / dr
    new.boundary_mass += dt * (area[0] * f_mass[0] - area[-1] * f_mass[-1])
    new.t = state.t + dt
    new.steps = state.steps + 1
    if np.any(~np.isfinite(new.Q)) or np.any(new.Q[0] <= 0):
        bad = int(np.argmax(~np.isfinite(new.Q[0]) | (new.Q[0] <= 0)))
        raise PositivityLoss(f"density lost positivity in cell {bad} (r={new.centers[bad]:.4g}) at t={new.t:.6g}")
    return new


def advance(state: FVState, config: FVConfig, sol: SimilaritySolution, t_end: float | None = None) -> FVState:
    """March the state to t_end (default config.t_end).

    Raises:
        CFLViolation: a fixed config.dt exceeds the CFL limit at some step.
        PositivityLoss: a cell density becomes non-positive.
    """
    t_end = config.t_end if t_end is None else t_end
    flux = RIEMANN_FLUXES[config.flux]()
    a = sol.params.a
    current = state
    while current.t < t_end - 1e-14 * max(1.0, abs(t_end)):
        (rho_gl, u_gl), (rho_gr, u_gr) = _ghosts(sol, current)
        speed = max(_max_speed((current.rho, current.u), a), abs(u_gl) + a, abs(u_gr) + a)
        limit = config.cfl * current.dr / speed
        if config.dt is not None:
            if config.dt > limit:
                raise CFLViolation(f"dt={config.dt:.3e} exceeds the CFL limit {limit:.3e} at t={current.t:.6g}")
            dt = config.dt
        else:
            dt = limit
        dt = min(dt, t_end - current.t)
        current = step(current, sol, flux, dt)
    logger.info(f"FV run reached t={current.t:.6g} in {current.steps - state.steps} steps ({config.cells} cells)")
    return current


def compare(state: FVState, sol: SimilaritySolution, exclude_shock_cells: int = 0) -> dict[str, float]:
    """L1 distance Σ |cell avg - exact cell avg| dr for r^m rho and r^m rho u."""
    exact = _exact_averages(sol, state.t, state.edges, state.m)
    diff = np.abs(state.Q - exact)
    if exclude_shock_cells and state.t > 0:
        near = np.abs(state.centers - sol.xi_s * state.t) <= exclude_shock_cells * state.dr
        diff[:, near] = 0.0
    return {"rho": float(np.sum(diff[0]) * state.dr), "momentum": float(np.sum(diff[1]) * state.dr)}


def shock_front(state: FVState) -> float:
    """Interface radius with the largest density jump."""
    i = int(np.argmax(np.abs(np.diff(state.rho))))
    return float(state.edges[i + 1])


def convergence_study(
    sol: SimilaritySolution, cells: list[int], base: FVConfig, show_progress: bool = False
) -> list[dict]:
    """L1 errors at base.t_end for each grid, with observed rates between successive grids."""
    rows = []
    for n in tqdm(sorted(cells), desc="FV grids", disable=not show_progress):
        config = replace(base, cells=n)
        final = advance(init_from_similarity(sol, config), config, sol)
        errors = compare(final, sol)
        row = {
            "cells": n,
            "l1_rho": errors["rho"],
            "l1_momentum": errors["momentum"],
            "rate_rho": None,
            "rate_momentum": None,
        }
        if rows:
            prev = rows[-1]
            span = np.log(n / prev["cells"])
            row["rate_rho"] = float(np.log(prev["l1_rho"] / errors["rho"]) / span)
            row["rate_momentum"] = float(np.log(prev["l1_momentum"] / errors["momentum"]) / span)
        rows.append(row)
        logger.info(f"N={n}: L1(rho)={errors['rho']:.4e}, L1(rho u)={errors['momentum']:.4e}")
    return rows


def fv_checks(sol: SimilaritySolution, config: FVConfig) -> list[CheckResult]:
    """Conservation, shock-front position and a grid-doubling rate for one configuration."""
    start = init_from_similarity(sol, config)
    final = advance(start, config, sol)
    results = []

    drift = abs(final.total_mass - start.total_mass - final.boundary_mass) / start.total_mass
    results.append(CheckResult("fv_conservation", drift <= 1e-10, drift, 1e-10, "mass change minus boundary flux"))
    results.append(CheckResult("fv_positivity", bool(np.all(final.rho > 0)), float(np.min(final.rho)), 0.0))

    if final.t > 0:
        expected = sol.xi_s * final.t
        offset = abs(shock_front(final) - expected) / final.dr
        limit = float(numerics_config.FV_FRONT_CELLS)
        detail = f"cells from r = xi_s t = {expected:.4g}"
        results.append(CheckResult("fv_shock_front", offset <= limit, offset, limit, detail))

    grids = [config.cells // 2, config.cells] if config.cells >= 128 else [config.cells, 2 * config.cells]
    rows = convergence_study(sol, grids, config)
    rate = rows[-1]["rate_rho"]
    results.append(
        CheckResult("fv_convergence_rate", rate >= numerics_config.FV_MIN_RATE, rate, numerics_config.FV_MIN_RATE)
    )
    return results
