"""Physical-space flow built from the similarity profiles.

    u(t, r) = U(r/t),   rho(t, r) = sgn(t) |t|^beta Omega(r/t)

with the collapse-time limits u(0, r) = U* and rho(0, r) = |C_-| r^beta.
"""

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp

from . import numerics_config, quadrature
from .config import Tolerances
from .density_profiles import DensityProfile, build_density
from .exceptions import DomainError, InvalidInput, OriginAtCollapse, ReachedOrigin
from .similarity_core import SimilarityParams, critical_points
from .velocity_profiles import VelocityProfile, build_velocity, with_shock

logger = logging.getLogger(__name__)

TRACE_KINDS = {"characteristic-plus": 1.0, "characteristic-minus": -1.0, "particle": 0.0}

# Traces stop at this radius; the collapse point itself is never evaluated.
ORIGIN_RADIUS = 1e-10


@dataclass
class CheckResult:
    """Outcome of one numerical check."""

    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
            "detail": self.detail,
        }


@dataclass(frozen=True)
class SimilaritySolution:
    params: SimilarityParams
    velocity: VelocityProfile
    density: DensityProfile
    tolerances: Tolerances = field(default_factory=Tolerances)

    @property
    def xi_w(self) -> float:
        return critical_points(self.params).xi_w

    @property
    def xi_s(self) -> float:
        return self.velocity.xi_s

    @property
    def u_star(self) -> float:
        return self.velocity.u_star

    @property
    def c_minus(self) -> float:
        return self.density.C_minus

    def to_manifest(self) -> dict:
        """Everything needed to re-evaluate the solution without rebuilding it."""
        return {
            "schema": numerics_config.SOLUTION_SCHEMA,
            "params": self.params.to_dict(),
            "tolerances": vars(self.tolerances).copy(),
            "critical": critical_points(self.params).to_dict(),
            "velocity": self.velocity.to_dict(),
            "density": self.density.to_dict(),
        }

    @classmethod
    def from_manifest(cls, data: dict) -> "SimilaritySolution":
        if data.get("schema") != numerics_config.SOLUTION_SCHEMA:
            raise InvalidInput(f"not a solution manifest (schema={data.get('schema')!r})")
        params = SimilarityParams(**data["params"])
        return cls(
            params=params,
            velocity=VelocityProfile.from_dict(data["velocity"], params),
            density=DensityProfile.from_dict(data["density"], params),
            tolerances=Tolerances(**data["tolerances"]),
        )


def build_solution(
    params: SimilarityParams,
    omega0: float = -1.0,
    tolerances: Tolerances | None = None,
    xi_min: float | None = None,
    xi_max: float | None = None,
    x0: float | None = None,
    method: str = "DOP853",
) -> SimilaritySolution:
    """Construct velocity and density profiles for one (m, beta, a, Omega0)."""
    tol = tolerances or Tolerances()
    logger.info(f"Constructing solution for m={params.m}, beta={params.beta}, a={params.a}, Omega0={omega0}")
    velocity = build_velocity(params, tol, xi_min, xi_max, method)
    density, shock = build_density(velocity, omega0, tol, x0)
    return SimilaritySolution(params=params, velocity=with_shock(velocity, shock), density=density, tolerances=tol)


def evaluate(sol: SimilaritySolution, t, r):
    """(rho, u) at (t, r); t and r broadcast against each other.

    Raises:
        DomainError: r < 0.
        OriginAtCollapse: (t, r) = (0, 0).
    """
    scalar = np.ndim(t) == 0 and np.ndim(r) == 0
    t, r = np.broadcast_arrays(np.asarray(t, dtype=float), np.asarray(r, dtype=float))
    shape = t.shape
    t, r = t.ravel(), r.ravel()
    if np.any(r < 0):
        raise DomainError("radius must be non-negative")
    collapse = t == 0.0
    if np.any(collapse & (r == 0.0)):
        raise OriginAtCollapse("density blows up at (t, r) = (0, 0)")

    beta = sol.params.beta
    rho = np.empty_like(t)
    u = np.empty_like(t)
    rho[collapse] = abs(sol.density.C_minus) * r[collapse] ** beta
    u[collapse] = sol.velocity.u_star
    for mask, side in ((t < 0, "-"), (t > 0, "+")):
        if np.any(mask):
            xi = r[mask] / t[mask]
            rho[mask] = np.sign(t[mask]) * np.abs(t[mask]) ** beta * sol.density(xi, side)
            u[mask] = sol.velocity(xi)
    if scalar:
        return float(rho[0]), float(u[0])
    return rho.reshape(shape), u.reshape(shape)


def energy_density(sol: SimilaritySolution, t, r):
    """E = [rho u²/2 + a² rho ln rho] r^m."""
    rho, u = evaluate(sol, t, r)
    a2 = sol.params.a**2
    return (0.5 * rho * u * u + a2 * rho * np.log(rho)) * np.asarray(r, dtype=float) ** sol.params.m


def _breakpoints(sol: SimilaritySolution, t: float) -> list[float]:
    """|xi| where the integrand of this time sign has a jump, a kink or a change of representation."""
    velocity, density = sol.velocity, sol.density
    if t < 0:
        points = [sol.xi_w, velocity.kink.lo, *density.kink.xi_range, *density.hat_neg.xi_range]
    else:
        points = [sol.xi_s, velocity.tilde.hi, *density.tilde.xi_range, *density.hat_pos.xi_range]
        stagnation = velocity.stagnation_point
        if stagnation is not None:
            points.append(stagnation)
    return [abs(p) for p in points if np.isfinite(p) and p != 0.0]


def _eta_edges(sol: SimilaritySolution, t: float, eta_max: float) -> np.ndarray:
    """Panel edges in eta = r/|t| on [0, eta_max], split at every breakpoint of this time sign."""
    wave = abs(sol.xi_w) if t < 0 else sol.xi_s
    near = min(eta_max, 2.0 * max(wave, abs(sol.xi_w)))
    edges = [np.linspace(0.0, near, 9), [b for b in _breakpoints(sol, t) if b < eta_max]]
    if eta_max > near:
        edges.append(quadrature.graded_edges(near, eta_max))
    return quadrature.merge_edges(*edges)


def _radial_integral(sol: SimilaritySolution, t: float, r_bar: float, integrand, tol: Tolerances | None) -> float:
    """∫_0^r_bar integrand(rho, u, r) dr at t != 0, integrated in eta = r/|t|."""
    tol = tol or sol.tolerances
    scale = abs(t)

    def f(eta):
        r = scale * eta
        rho, u = evaluate(sol, t, r)
        return integrand(rho, u, r) * scale

    value, error = quadrature.refined(f, _eta_edges(sol, t, r_bar / scale), tol.quad_tol)
    logger.debug(f"radial integral at t={t}: {value:.12g} (±{error:.1e})")
    return value


def _check_radius(r_bar: float):
    if not r_bar > 0:
        raise DomainError(f"r_bar must be positive, got {r_bar}")


def mass_integral(sol: SimilaritySolution, t: float, r_bar: float, tol: Tolerances | None = None) -> float:
    """M(t; r_bar) = ∫_0^r_bar rho r^m dr, in closed form at t = 0."""
    _check_radius(r_bar)
    m, beta, n = sol.params.m, sol.params.beta, sol.params.n
    if t == 0:
        return abs(sol.density.C_minus) * r_bar ** (beta + n) / (beta + n)
    return _radial_integral(sol, t, r_bar, lambda rho, u, r: rho * r**m, tol)


def moment_integral(sol: SimilaritySolution, t: float, r_bar: float, q: int, tol: Tolerances | None = None) -> float:
    """I_q(t; r_bar) = ∫_0^r_bar rho |u|^q r^m dr for q in {1, 2}."""
    if q not in (1, 2):
        raise DomainError(f"q must be 1 or 2, got {q}")
    _check_radius(r_bar)
    m, beta, n = sol.params.m, sol.params.beta, sol.params.n
    if t == 0:
        return abs(sol.density.C_minus) * abs(sol.velocity.u_star) ** q * r_bar ** (beta + n) / (beta + n)
    return _radial_integral(sol, t, r_bar, lambda rho, u, r: rho * np.abs(u) ** q * r**m, tol)


def energy_integral(sol: SimilaritySolution, t: float, r_bar: float, tol: Tolerances | None = None) -> float:
    """∫_0^r_bar E dr; finite for every r_bar, unbounded as r_bar grows."""
    _check_radius(r_bar)
    m, beta, a2 = sol.params.m, sol.params.beta, sol.params.a**2
    if t == 0:
        amplitude = abs(sol.density.C_minus)
        p = beta + m + 1.0
        base = r_bar**p / p
        log_moment = r_bar**p * (np.log(r_bar) / p - 1.0 / p**2)
        return amplitude * (
            (0.5 * sol.velocity.u_star**2 + a2 * np.log(amplitude)) * base + a2 * beta * log_moment
        )

    def integrand(rho, u, r):
        return (0.5 * rho * u * u + a2 * rho * np.log(rho)) * r**m

    return _radial_integral(sol, t, r_bar, integrand, tol)


def field_slice(sol: SimilaritySolution, t: float, r_grid) -> dict[str, np.ndarray]:
    """rho, u and E on a radial grid at one time."""
    r = np.asarray(r_grid, dtype=float)
    rho, u = evaluate(sol, t, r)
    return {"r": r, "rho": rho, "u": u, "E": energy_density(sol, t, r)}


# --- Characteristics and particle paths ---


@dataclass
class PathTrace:
    kind: str
    t: np.ndarray
    r: np.ndarray
    crossings: list[tuple[str, float, float]] = field(default_factory=list)
    speed_at_collapse: float | None = None
    radius_at_collapse: float | None = None
    reached_origin: bool = False
    terminal_slope: float | None = None

    @property
    def nodes(self) -> np.ndarray:
        """Ordered (t, r) samples, shape (N, 2)."""
        return np.column_stack([self.t, self.r])

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "crossings": [{"event": e, "t": t, "r": r} for e, t, r in self.crossings],
            "speed_at_collapse": self.speed_at_collapse,
            "radius_at_collapse": self.radius_at_collapse,
            "reached_origin": self.reached_origin,
            "terminal_slope": self.terminal_slope,
        }


def _speed(sol: SimilaritySolution, sign: float):
    a = sol.params.a

    def rhs(t, y):
        r = max(y[0], ORIGIN_RADIUS * 1e-3)
        _, u = evaluate(sol, t, r)
        return [u + sign * a]

    return rhs


def trace(
    sol: SimilaritySolution,
    kind: str,
    t0: float,
    r0: float,
    t1: float,
    allow_origin: bool = False,
    tol: Tolerances | None = None,
) -> PathTrace:
    """Integrate dr/dt = u ± a (characteristics) or u (particle paths) from (t0, r0) to t1.

    Crossings of t = 0, the kink line r = xi_w t and the shock line r = xi_s t are
    located as events and recorded; the integration restarts after each so that
    the discontinuity in the speed is never stepped over.

    Raises:
        ReachedOrigin: the path hits r = 0 and allow_origin is False; the partial trace is attached.
    """
    if kind not in TRACE_KINDS:
        raise InvalidInput(f"unknown trace kind {kind!r}; expected one of {sorted(TRACE_KINDS)}")
    if not r0 > 0:
        raise DomainError(f"r0 must be positive, got {r0}")
    if t1 == t0:
        raise DomainError("t1 must differ from t0")
    tol = tol or sol.tolerances
    sign = TRACE_KINDS[kind]
    rhs = _speed(sol, sign)
    xi_w, xi_s = sol.xi_w, sol.xi_s

    def collapse(t, y):
        return t

    def kink_line(t, y):
        return y[0] - xi_w * t

    def shock_line(t, y):
        return y[0] - xi_s * t

    def origin(t, y):
        return y[0] - ORIGIN_RADIUS

    origin.terminal = True
    named = {"collapse": collapse, "kink": kink_line, "shock": shock_line}
    for event in named.values():
        event.terminal = True

    path = PathTrace(kind=kind, t=np.array([t0]), r=np.array([r0]))
    t_start, r_start = t0, r0
    ts, rs = [np.array([t0])], [np.array([r0])]
    while True:
        armed = [
            name for name, event in named.items() if abs(event(t_start, [r_start])) > 1e-12 * max(1.0, abs(r_start))
        ]
        events = [named[name] for name in armed] + [origin]
        sol_ivp = solve_ivp(
            rhs, (t_start, t1), [r_start], method="RK45", rtol=tol.ode_rtol, atol=tol.ode_atol, events=events
        )
        ts.append(sol_ivp.t[1:])
        rs.append(sol_ivp.y[0, 1:])
        t_start, r_start = float(sol_ivp.t[-1]), float(sol_ivp.y[0, -1])
        if sol_ivp.status != 1:
            break
        if sol_ivp.t_events[-1].size:
            path.reached_origin = True
            path.terminal_slope = float(rhs(t_start, [r_start])[0])
            break
        for name, hits in zip(armed, sol_ivp.t_events[:-1]):
            if hits.size:
                path.crossings.append((name, t_start, r_start))
                if name == "collapse":
                    path.radius_at_collapse = r_start
                    path.speed_at_collapse = float(rhs(0.0, [r_start])[0])
                logger.debug(f"{kind} trace crossed the {name} line at t={t_start:.6g}, r={r_start:.6g}")

    path.t = np.concatenate(ts)
    path.r = np.concatenate(rs)
    if path.reached_origin and not allow_origin:
        raise ReachedOrigin(f"{kind} trace from (t0={t0}, r0={r0}) reached r=0 at t={t_start:.6g}", trace=path)
    return path


# --- Requirements on the assembled flow ---


def check_requirements(sol: SimilaritySolution) -> list[CheckResult]:
    """Vanishing centre velocity before collapse, finite collapse limits, positive density."""
    a = sol.params.a
    results = []

    times = np.linspace(-1.0, -0.1, 10)
    _, u_centre = evaluate(sol, times, 1e-8)
    worst = float(np.max(np.abs(u_centre)))
    results.append(CheckResult("centre_velocity", worst <= 1e-6 * a, worst, 1e-6 * a, "max |u(t, 1e-8)| for t<0"))

    k = np.arange(10, 21)
    rho_c, u_c = evaluate(sol, 0.0, 1.0)
    spread = 0.0
    for side in (-1.0, 1.0):
        rho_k, u_k = evaluate(sol, side * 2.0 ** (-k), 1.0)
        spread = max(spread, abs(rho_k[-1] / rho_c - 1.0), abs(u_k[-1] - u_c) / max(a, abs(u_c)))
    results.append(CheckResult("collapse_limits", spread <= 1e-4, spread, 1e-4, "t = ±2^-20 against t = 0 at r = 1"))

    t_grid = np.concatenate([np.linspace(-1.0, -0.05, 20), np.linspace(0.05, 1.0, 20)])
    r_grid = np.geomspace(1e-6, 10.0 * abs(sol.xi_w), 200)
    rho, _ = evaluate(sol, t_grid[:, None], r_grid[None, :])
    lowest = float(np.min(rho))
    results.append(CheckResult("positive_density", lowest > 0, lowest, 0.0, "min rho over a (t, r) grid"))
    return results
