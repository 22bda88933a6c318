"""Velocity branches of the converging-diverging solution.

U(xi) is assembled from three solutions of the velocity ODE:

- hat:   the solution through the origin, on [xi_w, -xi_w] (odd in xi)
- kink:  the solution leaving P_w along the fast eigendirection, on (-inf, xi_w]
- tilde: the solution coming in from +inf with U -> U*, on (xi_s, inf)

The reflected shock sits where tilde meets the Hugoniot locus of hat.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicHermiteSpline

from . import numerics_config
from .config import Tolerances
from .exceptions import (
    AssumptionViolated,
    DomainError,
    EntropyViolation,
    NoBracket,
    NodeNotReached,
    NoSonicCrossing,
    ResidualTooLarge,
    SonicSingularity,
)
from .similarity_core import (
    CriticalPointData,
    SimilarityParams,
    critical_points,
    origin_slope,
    velocity_rhs,
)

logger = logging.getLogger(__name__)


def _as_output(values: np.ndarray, scalar: bool):
    return float(values[0]) if scalar else values


@dataclass(frozen=True)
class VelocityTail:
    """Large-|xi| model U ≈ U* - a²β/xi - a²U*(m+2β)/(2xi²)."""

    u_star: float
    params: SimilarityParams

    def value(self, xi):
        m, beta, a2 = self.params.m, self.params.beta, self.params.a**2
        return self.u_star - a2 * beta / xi - a2 * self.u_star * (m + 2 * beta) / (2 * xi * xi)

    def slope(self, xi):
        m, beta, a2 = self.params.m, self.params.beta, self.params.a**2
        return a2 * beta / (xi * xi) + a2 * self.u_star * (m + 2 * beta) / (xi * xi * xi)


@dataclass(eq=False)
class Branch:
    """Dense samples of one ODE solution with a cubic Hermite interpolant.

    Outside [xi[0], xi[-1]] the branch falls back to its tail model on the
    tail side and raises DomainError elsewhere.
    """

    name: str
    xi: np.ndarray
    U: np.ndarray
    dU: np.ndarray
    tail: VelocityTail | None = None
    tail_side: str | None = None  # "low" or "high"
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.xi = np.asarray(self.xi, dtype=float)
        self.U = np.asarray(self.U, dtype=float)
        self.dU = np.asarray(self.dU, dtype=float)
        if np.any(np.diff(self.xi) <= 0):
            raise ValueError(f"branch {self.name}: samples not strictly ordered in xi")
        self._spline = CubicHermiteSpline(self.xi, self.U, self.dU, extrapolate=False)

    @property
    def lo(self) -> float:
        return float(self.xi[0])

    @property
    def hi(self) -> float:
        return float(self.xi[-1])

    def _evaluate(self, xi, nu: int):
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty_like(xi)
        inside = (xi >= self.lo) & (xi <= self.hi)
        out[inside] = self._spline(xi[inside], nu)
        outside = ~inside
        if np.any(outside):
            beyond = xi[outside]
            on_tail = (self.tail_side == "low" and np.all(beyond < self.lo)) or (
                self.tail_side == "high" and np.all(beyond > self.hi)
            )
            if self.tail is None or not on_tail:
                raise DomainError(f"branch {self.name} defined on [{self.lo}, {self.hi}], got {beyond.min()}")
            out[outside] = self.tail.value(beyond) if nu == 0 else self.tail.slope(beyond)
        return _as_output(out, scalar)

    def __call__(self, xi):
        return self._evaluate(xi, 0)

    def derivative(self, xi):
        return self._evaluate(xi, 1)

    def residual(self, params: SimilarityParams) -> float:
        """Largest relative ODE residual |U' - rhs| / (1 + |rhs|) at the midpoints between samples."""
        mid = 0.5 * (self.xi[:-1] + self.xi[1:])
        mid = mid[mid != 0.0]
        rhs = velocity_rhs(mid, self._spline(mid), params)
        return float(np.max(np.abs(self._spline(mid, 1) - rhs) / (1.0 + np.abs(rhs))))

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "xi": self.xi.tolist(),
            "U": self.U.tolist(),
            "dU": self.dU.tolist(),
            "tail_side": self.tail_side,
        }

    @classmethod
    def from_dict(cls, data: dict, tail: VelocityTail | None = None) -> "Branch":
        return cls(
            name=data["name"],
            xi=np.array(data["xi"]),
            U=np.array(data["U"]),
            dU=np.array(data["dU"]),
            tail=tail,
            tail_side=data.get("tail_side"),
        )


@dataclass(frozen=True)
class ShockData:
    """Reflected-shock data in similarity variables; densities are filled by density_profiles."""

    xi_bar: float
    U_minus: float
    U_plus: float
    V_minus: float
    V_plus: float
    family: str
    root_count: int = 1
    Omega_minus: float | None = None
    Omega_plus: float | None = None

    def jump_residual(self, a: float) -> float:
        """|V+ V- - a²|."""
        return abs(self.V_plus * self.V_minus - a * a)

    def entropy_margins(self, a: float) -> tuple[float, float]:
        """Slack in U- > xi - a > U+ (both positive for an admissible 2-shock)."""
        sonic = self.xi_bar - a
        return (self.U_minus - sonic, sonic - self.U_plus)

    def to_dict(self) -> dict:
        return {
            "xi_bar": self.xi_bar,
            "U_minus": self.U_minus,
            "U_plus": self.U_plus,
            "V_minus": self.V_minus,
            "V_plus": self.V_plus,
            "family": self.family,
            "root_count": self.root_count,
            "Omega_minus": self.Omega_minus,
            "Omega_plus": self.Omega_plus,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ShockData":
        return cls(**data)


def classify_shock(U_minus: float, U_plus: float, xi_bar: float, a: float) -> str:
    """Lax classification of a similarity shock from its inner and outer velocities."""
    if U_minus > xi_bar - a > U_plus:
        return "2-shock"
    if U_minus > xi_bar + a > U_plus:
        return "1-shock"
    return "inadmissible"


# --- Integration helpers ---


def _integrate(rhs, span, y0, tol: Tolerances, method: str, events=None):
    sol = solve_ivp(
        rhs,
        span,
        [y0],
        method=method,
        rtol=tol.ode_rtol,
        atol=tol.ode_atol,
        dense_output=True,
        events=events,
    )
    if sol.status == -1:
        raise SonicSingularity(f"integration failed on {span}: {sol.message}")
    return sol


def _sample(sol, grid: np.ndarray, params: SimilarityParams) -> tuple[np.ndarray, np.ndarray]:
    U = sol.sol(grid)[0]
    return U, velocity_rhs(grid, U, params)


def _relative_grid(start: float, stop: float, spacing: float) -> np.ndarray:
    """Points from start to stop (same sign, |stop| > |start|) with relative spacing."""
    count = max(2, int(np.ceil(np.log(stop / start) / np.log1p(spacing))) + 1)
    return np.geomspace(start, stop, count)


def _node_offset(cp: CriticalPointData) -> float:
    return numerics_config.NODE_OFFSET_FACTOR * abs(cp.xi_w)


def _hat_grid(width: float) -> np.ndarray:
    """Sample magnitudes |xi| in (0, width): uniform in the bulk, geometric in the distance to the node."""
    join = numerics_config.NODE_JOIN_FACTOR * width
    zone = numerics_config.NODE_GRADED_ZONE * width
    graded = width - _relative_grid(join, zone, numerics_config.NODE_GRADING)[::-1]
    bulk, step = np.linspace(0.0, width, numerics_config.HAT_SAMPLES, retstep=True)
    bulk = bulk[1:][bulk[1:] < graded[0] - 0.5 * step]
    return np.concatenate([bulk, graded])


def _check_residual(branch: Branch, params: SimilarityParams, tol: Tolerances) -> None:
    residual = branch.residual(params)
    if residual > 10 * tol.residual_tol:
        raise ResidualTooLarge(f"{branch.name} branch residual {residual:.2e} exceeds {10 * tol.residual_tol:.2e}")
    logger.debug(f"{branch.name} branch residual {residual:.2e}")


# --- Operations ---


def build_hat(params: SimilarityParams, tol: Tolerances, method: str = "DOP853") -> Branch:
    """Integrate the solution through the origin back to P_w and forward to -P_w.

    Starts at (0, 0) with slope -beta/n. Each half is integrated to a node offset
    short of ±P_w, but stored samples stop at the join distance, where the
    solution is still resolved; the critical point itself closes each half
    exactly, with the slow-direction slope 1 - lambda_- there.

    Raises:
        NodeNotReached: the integration left the wedge between omega and l+.
        ResidualTooLarge: the stored branch misses the ODE by more than 10 residual_tol.
    """
    cp = critical_points(params)
    a, mu = params.a, params.mu
    eps = _node_offset(cp)
    slope0 = origin_slope(params)
    slow = 1.0 - cp.lambda_minus

    def rhs(xi, y):
        if xi == 0.0:
            return [slope0]
        return [velocity_rhs(xi, y[0], params)]

    def below_l_plus(xi, y):
        return xi + a - y[0]

    def above_omega(xi, y):
        return y[0] + mu * xi

    def above_l_minus(xi, y):
        return y[0] - xi + a

    def below_mirror_omega(xi, y):
        return -mu * xi - y[0]

    for event in (below_l_plus, above_omega, above_l_minus, below_mirror_omega):
        event.terminal = True
        event.direction = -1

    halves = []
    for end, events, target in (
        (cp.xi_w + eps, [below_l_plus, above_omega], cp.U_w),
        (-cp.xi_w - eps, [above_l_minus, below_mirror_omega], -cp.U_w),
    ):
        sol = _integrate(rhs, (0.0, end), 0.0, tol, method, events)
        if sol.status == 1:
            raise NodeNotReached(f"inner branch left the wedge at xi={sol.t[-1]:.6g}, U={sol.y[0, -1]:.6g}")
        if abs(sol.y[0, -1] - target) > 10 * eps * max(1.0, abs(slow)):
            raise NodeNotReached(f"inner branch ended at U={sol.y[0, -1]:.12g}, expected ≈{target:.12g}")
        grid = np.sign(end) * _hat_grid(abs(cp.xi_w))
        U, dU = _sample(sol, grid, params)
        halves.append((grid, U, dU))
        logger.debug(f"inner branch reached {end:.6g} in {sol.t.size} steps")

    (g_neg, U_neg, dU_neg), (g_pos, U_pos, dU_pos) = halves
    xi = np.concatenate([[cp.xi_w], g_neg[::-1], [0.0], g_pos, [-cp.xi_w]])
    U = np.concatenate([[cp.U_w], U_neg[::-1], [0.0], U_pos, [-cp.U_w]])
    dU = np.concatenate([[slow], dU_neg[::-1], [slope0], dU_pos, [slow]])
    branch = Branch("hat", xi, U, dU)
    _check_residual(branch, params, tol)
    logger.info(f"Inner branch built on [{cp.xi_w:.6g}, {-cp.xi_w:.6g}] ({xi.size} samples)")
    return branch


def _u_star_estimate(U_end: float, xi: float, params: SimilarityParams) -> float:
    """Invert the tail model at a single point: U* from U(xi)."""
    m, beta, a2 = params.m, params.beta, params.a**2
    return (U_end + a2 * beta / xi) / (1.0 - a2 * (m + 2 * beta) / (2 * xi * xi))


def build_kink(
    params: SimilarityParams, tol: Tolerances, xi_min: float | None = None, method: str = "DOP853"
) -> tuple[Branch, float, float]:
    """Integrate the kink solution from P_w down to xi_min and extrapolate U* = U_k(-inf).

    Returns:
        (branch, u_star, u_star_error); the error is the Richardson spread between
        the estimates at xi_min and xi_min/2.

    Raises:
        AssumptionViolated: U* >= 0.
        ResidualTooLarge: the stored branch misses the ODE by more than 10 residual_tol.
    """
    cp = critical_points(params)
    a = params.a
    if xi_min is None:
        xi_min = -numerics_config.XI_MIN_FACTOR * abs(cp.xi_w)
    if xi_min >= 2 * cp.xi_w:
        raise DomainError(f"xi_min={xi_min} must lie well below xi_w={cp.xi_w}")
    eps = _node_offset(cp)
    fast = 1.0 - cp.lambda_plus
    xi0 = cp.xi_w - eps
    U0 = cp.U_w - eps * fast

    def rhs(xi, y):
        return [velocity_rhs(xi, y[0], params)]

    def above_l_plus(xi, y):
        return y[0] - xi - a

    above_l_plus.terminal = True
    above_l_plus.direction = -1

    sol = _integrate(rhs, (xi0, xi_min), U0, tol, method, [above_l_plus])
    if sol.status == 1:
        raise SonicSingularity(f"kink solution reached l+ at xi={sol.t[-1]:.6g}")

    grid = -_relative_grid(-xi0, -xi_min, numerics_config.RELATIVE_SPACING)
    grid[-1] = xi_min
    U, dU = _sample(sol, grid, params)

    far = _u_star_estimate(float(U[-1]), xi_min, params)
    half = _u_star_estimate(float(sol.sol(xi_min / 2)[0]), xi_min / 2, params)
    u_star = (8.0 * far - half) / 7.0
    u_star_error = abs(far - half) / 7.0
    logger.info(f"Kink branch built down to xi={xi_min:.6g}: U*={u_star:.12g} (±{u_star_error:.2e})")
    if u_star >= 0:
        raise AssumptionViolated(f"U*={u_star:.6g} is not negative for m={params.m}, beta={params.beta}", u_star)

    xi = np.concatenate([grid[::-1], [cp.xi_w]])
    Us = np.concatenate([U[::-1], [cp.U_w]])
    dUs = np.concatenate([dU[::-1], [fast]])
    branch = Branch("kink", xi, Us, dUs, tail=VelocityTail(u_star, params), tail_side="low")
    _check_residual(branch, params, tol)
    return branch, u_star, u_star_error


def ustar_bound(params: SimilarityParams) -> float:
    """Upper bound U_w + a²m ∫_{-inf}^{xi_w} dxi / (xi (xi - (a + U_w))) in closed form."""
    cp = critical_points(params)
    a = params.a
    c = a + cp.U_w
    width = abs(cp.xi_w)
    if abs(c) <= 1e-14 * a:
        integral = 1.0 / width
    else:
        integral = np.log1p(c / width) / c
    return float(cp.U_w + a * a * params.m * integral)


def build_tilde(
    params: SimilarityParams,
    u_star: float,
    tol: Tolerances,
    xi_max: float | None = None,
    method: str = "DOP853",
) -> tuple[Branch, float]:
    """Integrate the outer branch down from xi_max toward the sonic line l-.

    The branch starts on the tail model at xi_max. Inside the sonic guard band
    the independent variable switches to U so that the crossing xi* with l- is
    located exactly; the stored branch ends at the band edge.

    Returns:
        (branch, xi_star)

    Raises:
        NoSonicCrossing: the branch does not meet l- inside (0, -xi_w).
        ResidualTooLarge: the stored branch misses the ODE by more than 10 residual_tol.
    """
    if u_star >= 0:
        raise AssumptionViolated(f"outer branch needs U* < 0, got {u_star}", u_star)
    cp = critical_points(params)
    a = params.a
    if xi_max is None:
        xi_max = numerics_config.XI_MAX_FACTOR * abs(cp.xi_w)
    tail = VelocityTail(u_star, params)
    guard = numerics_config.SONIC_GUARD * a

    def rhs(xi, y):
        return [velocity_rhs(xi, y[0], params)]

    def sonic_band(xi, y):
        return y[0] - xi + a + guard

    sonic_band.terminal = True
    sonic_band.direction = 1

    floor = 1e-6 * abs(cp.xi_w)
    sol = _integrate(rhs, (xi_max, floor), float(tail.value(xi_max)), tol, method, [sonic_band])
    if sol.status != 1:
        raise NoSonicCrossing(f"outer branch reached xi={floor:.3g} without approaching l-")
    xi_lo = float(sol.t_events[0][0])
    U_lo = float(sol.y_events[0][0][0])

    # xi as a function of U across the band, where dU/dxi is unbounded
    def rhs_xi(U, y):
        xi = y[0]
        return [((U - xi) ** 2 - a * a) / (a * a * (params.beta + params.m * U / xi))]

    def on_l_minus(U, y):
        return U - y[0] + a

    on_l_minus.terminal = True
    on_l_minus.direction = 1

    cap = solve_ivp(
        rhs_xi, (U_lo, U_lo + 2 * a), [xi_lo], method=method, rtol=tol.ode_rtol, atol=tol.ode_atol, events=[on_l_minus]
    )
    if cap.status != 1:
        raise NoSonicCrossing(f"outer branch did not meet l- after entering the band at xi={xi_lo:.6g}")
    xi_star = float(cap.y_events[0][0][0])
    if not 0 < xi_star < -cp.xi_w:
        raise NoSonicCrossing(f"xi*={xi_star:.6g} outside (0, {-cp.xi_w:.6g})")

    offset = max(xi_lo - xi_star, 1e-12 * abs(cp.xi_w))
    grid = xi_star + _relative_grid(offset, xi_max - xi_star, numerics_config.RELATIVE_SPACING)
    grid[0] = xi_lo
    grid[-1] = xi_max
    U, dU = _sample(sol, grid, params)
    branch = Branch("tilde", grid, U, dU, tail=tail, tail_side="high")
    _check_residual(branch, params, tol)
    logger.info(f"Outer branch built on [{xi_lo:.6g}, {xi_max:.6g}], xi*={xi_star:.12g}")
    return branch, xi_star


def hugoniot(xi, hat: Branch, params: SimilarityParams):
    """H(xi) = xi + a²/(U_hat(xi) - xi): outer states reachable from the inner branch across a shock at xi."""
    cp = critical_points(params)
    arr = np.asarray(xi, dtype=float)
    if np.any(arr <= 0) or np.any(arr > -cp.xi_w):
        raise DomainError(f"Hugoniot locus defined on (0, {-cp.xi_w}], got {arr.min()}..{arr.max()}")
    return arr + params.a**2 / (hat(arr) - arr)


def find_shock(hat: Branch, tilde: Branch, params: SimilarityParams, tol: Tolerances) -> ShockData:
    """Locate xi_s where the outer branch meets the Hugoniot locus.

    A sign scan precedes root polishing; all sign changes are counted and the
    largest root is used.

    Raises:
        NoBracket: U_tilde - H never changes sign.
        EntropyViolation: the intersection fails U- > xi_s - a > U+.
    """
    cp = critical_points(params)
    a = params.a
    lo, hi = tilde.lo, -cp.xi_w

    def gap(xi):
        return tilde(xi) - hugoniot(xi, hat, params)

    grid = np.linspace(lo, hi, numerics_config.HUGONIOT_SCAN_POINTS)
    values = gap(grid)
    if not (values[0] > 0 and values[-1] < 0):
        logger.warning(
            f"unexpected end signs of U_tilde - H: {values[0]:.3e}, {values[-1]:.3e} on [{lo:.6g}, {hi:.6g}]"
        )
    crossings = np.nonzero(np.sign(values[:-1]) * np.sign(values[1:]) <= 0)[0]
    if crossings.size == 0:
        raise NoBracket(f"U_tilde - H keeps sign {np.sign(values[0]):+.0f} on [{lo:.6g}, {hi:.6g}]")

    roots = []
    for i in crossings:
        if values[i] == 0.0:
            roots.append(float(grid[i]))
        elif values[i + 1] != 0.0:
            roots.append(optimize.brentq(gap, grid[i], grid[i + 1], xtol=tol.root_tol, rtol=4 * np.finfo(float).eps))
    roots = sorted(set(roots))
    if len(roots) > 1:
        logger.warning(f"{len(roots)} intersections of U_tilde with H found: {roots}; using the largest")
    xi_s = roots[-1]

    U_minus = float(hat(xi_s))
    U_plus = float(tilde(xi_s))
    family = classify_shock(U_minus, U_plus, xi_s, a)
    if family != "2-shock":
        raise EntropyViolation(f"shock at xi_s={xi_s:.12g} is {family}: U-={U_minus:.6g}, U+={U_plus:.6g}")
    shock = ShockData(
        xi_bar=xi_s,
        U_minus=U_minus,
        U_plus=U_plus,
        V_minus=U_minus - xi_s,
        V_plus=U_plus - xi_s,
        family=family,
        root_count=len(roots),
    )
    logger.info(f"Shock at xi_s={xi_s:.12g} (U-={U_minus:.6g}, U+={U_plus:.6g}, jump {shock.jump_residual(a):.2e})")
    return shock


@dataclass(frozen=True)
class VelocityProfile:
    """Piecewise similarity velocity: kink on (-inf, xi_w], hat on (xi_w, xi_s), tilde on [xi_s, inf)."""

    params: SimilarityParams
    hat: Branch
    kink: Branch
    tilde: Branch
    u_star: float
    u_star_error: float
    xi_star: float
    shock: ShockData

    @property
    def critical(self) -> CriticalPointData:
        return critical_points(self.params)

    @property
    def xi_s(self) -> float:
        return self.shock.xi_bar

    @property
    def stagnation(self) -> bool:
        """True when the fluid just outside the reflected shock moves outward."""
        return self.shock.U_plus > 0

    @property
    def stagnation_point(self) -> float | None:
        """xi > xi_s where the outer branch changes sign, or None without outward flow behind the shock."""
        if not self.stagnation:
            return None
        hi = 2.0 * self.xi_s
        while self.tilde(hi) >= 0:
            hi *= 2.0
        return float(optimize.brentq(self.tilde, self.xi_s, hi, xtol=1e-14 * hi))

    def _pieces(self, xi: np.ndarray):
        xi_w = self.critical.xi_w
        kink = xi <= xi_w
        tilde = xi >= self.xi_s
        hat = ~(kink | tilde)
        return ((kink, self.kink), (hat, self.hat), (tilde, self.tilde))

    def _evaluate(self, xi, nu: int):
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty_like(xi)
        for mask, branch in self._pieces(xi):
            if np.any(mask):
                out[mask] = branch(xi[mask]) if nu == 0 else branch.derivative(xi[mask])
        return _as_output(out, scalar)

    def __call__(self, xi):
        return self._evaluate(xi, 0)

    def derivative(self, xi):
        return self._evaluate(xi, 1)

    def limit(self, xi: float, side: str) -> float:
        """One-sided value at a wave location ("-" from below in xi, "+" from above)."""
        if np.isclose(xi, self.xi_s, rtol=0, atol=1e-14):
            return float(self.hat(xi) if side == "-" else self.tilde(xi))
        if np.isclose(xi, self.critical.xi_w, rtol=0, atol=1e-14):
            return float(self.kink(xi) if side == "-" else self.hat(xi))
        return float(self(xi))

    def kink_slopes(self) -> tuple[float, float]:
        """(U'(xi_w-), U'(xi_w+)): fast and slow eigen-slopes across the weak discontinuity."""
        xi_w = self.critical.xi_w
        return float(self.kink.derivative(xi_w)), float(self.hat.derivative(xi_w))

    def to_dict(self) -> dict:
        return {
            "u_star": self.u_star,
            "u_star_error": self.u_star_error,
            "xi_star": self.xi_star,
            "shock": self.shock.to_dict(),
            "hat": self.hat.to_dict(),
            "kink": self.kink.to_dict(),
            "tilde": self.tilde.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict, params: SimilarityParams) -> "VelocityProfile":
        tail = VelocityTail(data["u_star"], params)
        return cls(
            params=params,
            hat=Branch.from_dict(data["hat"]),
            kink=Branch.from_dict(data["kink"], tail),
            tilde=Branch.from_dict(data["tilde"], tail),
            u_star=data["u_star"],
            u_star_error=data["u_star_error"],
            xi_star=data["xi_star"],
            shock=ShockData.from_dict(data["shock"]),
        )


def assemble_velocity(
    hat: Branch,
    kink: Branch,
    tilde: Branch,
    shock: ShockData,
    u_star: float,
    u_star_error: float,
    xi_star: float,
    params: SimilarityParams,
) -> VelocityProfile:
    """Combine the three branches into the piecewise profile."""
    profile = VelocityProfile(
        params=params,
        hat=hat,
        kink=kink,
        tilde=tilde,
        u_star=u_star,
        u_star_error=u_star_error,
        xi_star=xi_star,
        shock=shock,
    )
    if profile.stagnation:
        logger.info(f"U_tilde(xi_s)={shock.U_plus:.6g} > 0: outward flow just outside the reflected shock")
    return profile


def build_velocity(
    params: SimilarityParams,
    tol: Tolerances,
    xi_min: float | None = None,
    xi_max: float | None = None,
    method: str = "DOP853",
) -> VelocityProfile:
    """Run the whole velocity construction."""
    hat = build_hat(params, tol, method)
    kink, u_star, u_star_error = build_kink(params, tol, xi_min, method)
    tilde, xi_star = build_tilde(params, u_star, tol, xi_max, method)
    shock = find_shock(hat, tilde, params, tol)
    return assemble_velocity(hat, kink, tilde, shock, u_star, u_star_error, xi_star, params)


def with_shock(profile: VelocityProfile, shock: ShockData) -> VelocityProfile:
    """Copy of the profile carrying updated shock data."""
    return replace(profile, shock=shock)
