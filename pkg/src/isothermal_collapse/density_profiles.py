"""Density amplitude Omega(xi) of the converging-diverging solution.

Four pieces, each integrated in log form from d(ln|Omega|)/dxi = -(U - xi)U'/a²:

- hat_neg: [xi_w, 0), started from Omega(0-) = Omega0 < 0
- kink:    (-inf, xi_w], continuous with hat_neg at xi_w, ~ C_- |xi|^beta at -inf
- tilde:   [xi_s, inf), stored through D(x) = Omega(1/x) ~ C_+ x^-beta, C_+ = -C_-
- hat_pos: (0, xi_s), started from the Rankine-Hugoniot state behind the shock

Log amplitudes are normalized so that Omega0 only enters through a signed
factor; scaling Omega0 scales every piece exactly.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.interpolate import CubicHermiteSpline

from . import numerics_config, quadrature
from .config import Tolerances
from .exceptions import DomainError, QuadratureFailure, SignViolation, TailDivergence, WeakJump
from .similarity_core import SimilarityParams, critical_points, log_omega_rhs
from .velocity_profiles import Branch, ShockData, VelocityProfile

logger = logging.getLogger(__name__)


@dataclass(eq=False)
class DensityBranch:
    """One density piece: Omega = amplitude * (|xi|/ref)^power * exp(L).

    L is stored on `grid`, which is xi itself or, for reciprocal branches,
    s = 1/xi. Reciprocal branches carry a tail L ≈ c0 + c1|s| + c2 s² used
    between s = 0 and the closest sample.
    """

    name: str
    grid: np.ndarray
    log: np.ndarray
    dlog: np.ndarray
    amplitude: float
    power: float = 0.0
    ref: float = 1.0
    reciprocal: bool = False
    tail: tuple[float, float, float] | None = None
    tail_error: float = 0.0
    _spline: CubicHermiteSpline = field(init=False, repr=False)

    def __post_init__(self):
        self.grid = np.asarray(self.grid, dtype=float)
        self.log = np.asarray(self.log, dtype=float)
        self.dlog = np.asarray(self.dlog, dtype=float)
        if self.tail is not None:
            self.tail = tuple(float(c) for c in self.tail)
        self._spline = CubicHermiteSpline(self.grid, self.log, self.dlog, extrapolate=False)

    @property
    def xi_range(self) -> tuple[float, float]:
        """Sampled interval in xi."""
        if self.reciprocal:
            ends = sorted(1.0 / self.grid[[0, -1]])
            return float(ends[0]), float(ends[1])
        return float(self.grid[0]), float(self.grid[-1])

    def log_amplitude(self, xi) -> tuple[np.ndarray, np.ndarray]:
        """L and dL/dxi at xi (arrays)."""
        xi = np.asarray(xi, dtype=float)
        s = 1.0 / xi if self.reciprocal else xi
        L = np.empty_like(s)
        dL = np.empty_like(s)
        lo, hi = self.grid[0], self.grid[-1]
        inside = (s >= lo - 1e-12 * abs(lo)) & (s <= hi + 1e-12 * abs(hi))
        s_in = np.clip(s[inside], lo, hi)
        L[inside] = self._spline(s_in)
        dL[inside] = self._spline(s_in, 1)
        outside = ~inside
        if np.any(outside):
            s_out = s[outside]
            closest = np.min(np.abs(self.grid))
            if self.tail is None or not np.all(np.abs(s_out) < closest):
                lo, hi = self.xi_range
                raise DomainError(f"density branch {self.name} defined on [{lo}, {hi}], got xi outside")
            c0, c1, c2 = self.tail
            L[outside] = c0 + c1 * np.abs(s_out) + c2 * s_out**2
            dL[outside] = c1 * np.sign(s_out) + 2 * c2 * s_out
        if self.reciprocal:
            dL = -dL * s * s
        return L, dL

    def __call__(self, xi):
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        L, _ = self.log_amplitude(xi)
        factor = (np.abs(xi) / self.ref) ** self.power if self.power else 1.0
        out = self.amplitude * factor * np.exp(L)
        return float(out[0]) if scalar else out

    def derivative(self, xi):
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        _, dL = self.log_amplitude(xi)
        if self.power:
            dL = dL + self.power / xi
        out = self(xi) * dL
        return float(out[0]) if scalar else out

    def sample_xi(self) -> np.ndarray:
        """The stored samples as xi values, increasing."""
        return np.sort(1.0 / self.grid) if self.reciprocal else self.grid.copy()

    def samples(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """(xi, Omega, dOmega/dxi) at the stored samples, increasing in xi, without re-interpolating."""
        if self.reciprocal:
            xi = 1.0 / self.grid
            dL = -self.dlog * self.grid**2
        else:
            xi = self.grid
            dL = self.dlog
        with np.errstate(divide="ignore", invalid="ignore"):
            factor = (np.abs(xi) / self.ref) ** self.power if self.power else np.ones_like(xi)
            omega = self.amplitude * factor * np.exp(self.log)
            slope = omega * (dL + (self.power / xi if self.power else 0.0))
        order = np.argsort(xi)
        return xi[order], omega[order], slope[order]

    def scaled(self, factor: float) -> "DensityBranch":
        return replace(self, amplitude=self.amplitude * factor)

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "grid": self.grid.tolist(),
            "log": self.log.tolist(),
            "dlog": self.dlog.tolist(),
            "amplitude": self.amplitude,
            "power": self.power,
            "ref": self.ref,
            "reciprocal": self.reciprocal,
            "tail": list(self.tail) if self.tail is not None else None,
            "tail_error": self.tail_error,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "DensityBranch":
        data = dict(data)
        if data.get("tail") is not None:
            data["tail"] = tuple(data["tail"])
        return cls(**data)


def _cumulative(f, grid: np.ndarray, tol: Tolerances) -> np.ndarray:
    """Running integral of f from grid[0] through every sample.

    The total is checked against panel bisection of the same grid.

    Raises:
        QuadratureFailure: bisection does not converge, or its total differs from the running sum.
    """
    nodes, weights = quadrature.panel_nodes(grid, numerics_config.GAUSS_ORDER)
    pieces = np.sum(f(nodes) * weights, axis=-1)
    running = np.concatenate([[0.0], np.cumsum(pieces)])
    checked, error = quadrature.refined(f, grid, tol.quad_tol, max_levels=2)
    drift = abs(checked - running[-1])
    if drift > 10 * tol.quad_tol * max(1.0, abs(checked)):
        raise QuadratureFailure(f"running integral {running[-1]:.12g} differs from bisected total {checked:.12g}")
    logger.debug(f"running integral over {grid.size} samples: drift {drift:.1e}, bisection error {error:.1e}")
    return running


def _check_pattern(branch: DensityBranch, value_sign: int, slope_sign: int):
    xi = branch.sample_xi()
    values = branch(xi)
    if np.any(np.sign(values) != value_sign) or not np.all(np.isfinite(values)):
        raise SignViolation(f"density branch {branch.name} leaves sign {value_sign:+d}")
    slopes = branch.derivative(xi)
    floor = 1e-9 * np.max(np.abs(slopes))
    if np.any(slope_sign * slopes < -floor):
        worst = xi[np.argmin(slope_sign * slopes)]
        raise SignViolation(f"density branch {branch.name} slope changes sign near xi={worst:.6g}")


def _log_rate(branch: Branch, params: SimilarityParams):
    """F(xi) = d ln|Omega|/dxi along a velocity branch."""

    def rate(xi):
        return log_omega_rhs(xi, branch(xi), branch.derivative(xi), params)

    return rate


def build_hat_neg(hat_U: Branch, omega0: float, params: SimilarityParams, tol: Tolerances) -> DensityBranch:
    """Omega on [xi_w, 0] from Omega(0-) = omega0 < 0; negative and nondecreasing."""
    if not omega0 < 0:
        raise DomainError(f"Omega0 must be negative, got {omega0}")
    grid = hat_U.xi[hat_U.xi <= 0.0]
    rate = _log_rate(hat_U, params)
    running = _cumulative(rate, grid, tol)
    branch = DensityBranch("hat_neg", grid, running - running[-1], rate(grid), amplitude=omega0)
    _check_pattern(branch, -1, 1)
    logger.info(f"Inner density (t<0) built: Omega(xi_w)/Omega0 = {np.exp(branch.log[0]):.12g}")
    return branch


def build_kink_omega(kink_U: Branch, omega_w: float, params: SimilarityParams, tol: Tolerances) -> DensityBranch:
    """Omega_k on (-inf, xi_w] from Omega_k(xi_w) = omega_w < 0.

    Stored in s = 1/xi as L = ln|Omega_k/Omega_w| - beta ln(|xi|/|xi_w|). The
    decay of beta/xi - F_k is fitted over the last decade as (C + D/|xi|)/xi²,
    which gives the tail of L beyond xi_min.

    Raises:
        TailDivergence: beta/xi - F_k decays slower than about |xi|^-2.
    """
    if not omega_w < 0:
        raise DomainError(f"Omega_w must be negative, got {omega_w}")
    cp = critical_points(params)
    beta = params.beta
    xi = kink_U.xi
    F = _log_rate(kink_U, params)

    def reduced(x):
        return F(x) - beta / x

    running = _cumulative(reduced, xi, tol)
    L = running - running[-1]
    slope = reduced(xi)

    eta = np.abs(xi)
    h = eta[0]
    window = eta >= h / 10.0**numerics_config.TAIL_FIT_DECADES
    gap = -slope[window]
    floor = numerics_config.TAIL_NOISE_FLOOR * abs(beta) / h
    if np.all(np.abs(gap) > floor):
        exponent = np.polyfit(np.log(eta[window]), np.log(np.abs(gap)), 1)[0]
        logger.debug(f"kink density tail exponent {exponent:.4f}")
        if exponent > -2.0 + numerics_config.TAIL_EXPONENT_SLACK:
            raise TailDivergence(f"beta/xi - F_k decays like |xi|^{exponent:.3f}, slower than |xi|^-2")
    D, C = np.polyfit(1.0 / eta[window], gap * eta[window] ** 2, 1)
    L_inf = L[0] + C / h + D / (2 * h * h)

    s = 1.0 / xi
    branch = DensityBranch(
        "kink",
        s[::-1],
        L[::-1],
        (-slope * xi * xi)[::-1],
        amplitude=omega_w,
        power=beta,
        ref=abs(cp.xi_w),
        reciprocal=True,
        tail=(L_inf, -C, -D / 2.0),
        tail_error=abs(D) / (2 * h * h),
    )
    _check_pattern(branch, -1, -1)
    logger.info(f"Kink density built down to xi={xi[0]:.6g}, tail constant C={C:.6g}")
    return branch


def compute_c_minus(
    kink_branch: DensityBranch, params: SimilarityParams, u_star_error: float = 0.0
) -> tuple[float, float]:
    """C_- = lim Omega_k |xi|^-beta as xi -> -inf, with an error bar.

    The error bar combines the unfitted part of the tail and the uncertainty
    of U* carried by the fitted tail constant.
    """
    if kink_branch.tail is None:
        raise DomainError("kink density branch has no tail fit")
    cp = critical_points(params)
    L_inf = kink_branch.tail[0]
    c_minus = kink_branch.amplitude * np.exp(L_inf) / abs(cp.xi_w) ** params.beta
    h = 1.0 / np.min(np.abs(kink_branch.grid))
    relative = kink_branch.tail_error + (params.m + params.beta) * u_star_error / h
    error = abs(c_minus) * relative
    logger.info(f"C_- = {c_minus:.12g} (±{error:.2e})")
    return float(c_minus), float(error)


def build_tilde_d(
    tilde_U: Branch,
    c_plus: float,
    params: SimilarityParams,
    x_s: float,
    tol: Tolerances,
    x0: float | None = None,
) -> DensityBranch:
    """D(x) = Omega_tilde(1/x) on (0, x_s] from the node behaviour D ~ C_+ x^-beta.

    Stored as L = ln D + beta ln x - ln C_+, which starts at x0 from its
    first-order expansion -(m+beta)U* x0 and has a regular right-hand side at x = 0.
    """
    if not c_plus > 0:
        raise DomainError(f"C_+ must be positive, got {c_plus}")
    if tilde_U.tail is None:
        raise DomainError("outer velocity branch carries no tail model")
    if x0 is None:
        x0 = numerics_config.X0_FACTOR * x_s
    if not 0 < x0 < x_s:
        raise DomainError(f"x0={x0} must lie in (0, x_s={x_s})")
    beta = params.beta
    c1 = -(params.m + beta) * tilde_U.tail.u_star
    F = _log_rate(tilde_U, params)

    def rate(x):
        xi = 1.0 / x
        return -(F(xi) - beta * x) / (x * x)

    grid = np.geomspace(x0, x_s, max(2, int(np.ceil(np.log(x_s / x0) / np.log1p(numerics_config.RELATIVE_SPACING)))))
    grid[-1] = x_s
    running = _cumulative(rate, grid, tol)
    branch = DensityBranch(
        "tilde",
        grid,
        c1 * x0 + running,
        rate(grid),
        amplitude=c_plus,
        power=beta,
        ref=1.0,
        reciprocal=True,
        tail=(0.0, c1, 0.0),
    )
    _check_pattern(branch, 1, -1)
    logger.info(f"Outer density built on x in [{x0:.3g}, {x_s:.6g}], D(x_s)={branch(1.0 / x_s):.12g}")
    return branch


def tilde_d(branch: DensityBranch, x):
    """D(x) = Omega_tilde(1/x)."""
    return branch(1.0 / np.asarray(x, dtype=float))


def rh_density_jump(shock: ShockData, omega_plus: float, a: float) -> float:
    """Omega_- = ((U+ - xi_s)²/a²) Omega_+.

    Raises:
        WeakJump: (U+ - xi_s)² <= a², i.e. the outer state is not supersonic relative to the shock.
    """
    ratio = shock.V_plus**2 / (a * a)
    if ratio <= 1.0:
        raise WeakJump(f"(U+ - xi_s)²/a² = {ratio:.6g} <= 1 at xi_s={shock.xi_bar:.6g}")
    return ratio * omega_plus


def build_hat_pos(
    hat_U: Branch, omega_s_minus: float, xi_s: float, params: SimilarityParams, tol: Tolerances
) -> tuple[DensityBranch, float]:
    """Omega on (0, xi_s) integrated back from Omega(xi_s-) = omega_s_minus > 0.

    Returns:
        (branch, Omega0_prime) with Omega0_prime = lim Omega(xi) as xi -> 0+.
    """
    if not omega_s_minus > 0:
        raise DomainError(f"Omega(xi_s-) must be positive, got {omega_s_minus}")
    inner = hat_U.xi[(hat_U.xi >= 0.0) & (hat_U.xi < xi_s)]
    grid = np.concatenate([inner, [xi_s]])
    rate = _log_rate(hat_U, params)
    running = _cumulative(rate, grid, tol)
    branch = DensityBranch("hat_pos", grid, running - running[-1], rate(grid), amplitude=omega_s_minus)
    _check_pattern(branch, 1, 1)
    omega0_prime = omega_s_minus * np.exp(branch.log[0])
    logger.info(f"Inner density (t>0) built: Omega0' = {omega0_prime:.12g}")
    return branch, float(omega0_prime)


@dataclass(frozen=True)
class DensityProfile:
    """Piecewise similarity density.

    For t < 0 (xi < 0): kink on (-inf, xi_w], hat_neg on (xi_w, 0).
    For t > 0 (xi > 0): hat_pos on (0, xi_s), tilde on [xi_s, inf).
    At xi = 0 the value depends on the side: Omega0 from below, Omega0' from above.
    """

    params: SimilarityParams
    hat_neg: DensityBranch
    kink: DensityBranch
    tilde: DensityBranch
    hat_pos: DensityBranch
    Omega0: float
    Omega_w: float
    C_minus: float
    C_minus_error: float
    C_plus: float
    Omega0_prime: float
    xi_s: float

    @property
    def x_s(self) -> float:
        return 1.0 / self.xi_s

    def _pieces(self, xi: np.ndarray):
        xi_w = critical_points(self.params).xi_w
        return (
            (xi <= xi_w, self.kink),
            ((xi > xi_w) & (xi < 0), self.hat_neg),
            ((xi > 0) & (xi < self.xi_s), self.hat_pos),
            (xi >= self.xi_s, self.tilde),
        )

    def _evaluate(self, xi, side: str, derivative: bool):
        scalar = np.ndim(xi) == 0
        xi = np.atleast_1d(np.asarray(xi, dtype=float))
        out = np.empty_like(xi)
        for mask, branch in self._pieces(xi):
            if np.any(mask):
                out[mask] = branch.derivative(xi[mask]) if derivative else branch(xi[mask])
        zero = xi == 0.0
        if np.any(zero):
            if derivative:
                out[zero] = 0.0
            else:
                out[zero] = self.Omega0 if side == "-" else self.Omega0_prime
        return float(out[0]) if scalar else out

    def __call__(self, xi, side: str = "-"):
        return self._evaluate(xi, side, derivative=False)

    def derivative(self, xi, side: str = "-"):
        return self._evaluate(xi, side, derivative=True)

    def limit(self, xi: float, side: str) -> float:
        """One-sided value at xi_s, xi_w or 0 ("-" from below in xi, "+" from above)."""
        if xi == self.xi_s:
            return float(self.hat_pos(xi) if side == "-" else self.tilde(xi))
        if xi == 0.0:
            return self.Omega0 if side == "-" else self.Omega0_prime
        return float(self(xi))

    def to_dict(self) -> dict:
        return {
            "Omega0": self.Omega0,
            "Omega_w": self.Omega_w,
            "C_minus": self.C_minus,
            "C_minus_error": self.C_minus_error,
            "C_plus": self.C_plus,
            "Omega0_prime": self.Omega0_prime,
            "xi_s": self.xi_s,
            "hat_neg": self.hat_neg.to_dict(),
            "kink": self.kink.to_dict(),
            "tilde": self.tilde.to_dict(),
            "hat_pos": self.hat_pos.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict, params: SimilarityParams) -> "DensityProfile":
        branches = {name: DensityBranch.from_dict(data[name]) for name in ("hat_neg", "kink", "tilde", "hat_pos")}
        scalars = {k: v for k, v in data.items() if k not in branches}
        return cls(params=params, **branches, **scalars)


def assemble_density(
    hat_neg: DensityBranch,
    kink: DensityBranch,
    tilde: DensityBranch,
    hat_pos: DensityBranch,
    c_minus: float,
    c_minus_error: float,
    omega0_prime: float,
    xi_s: float,
    params: SimilarityParams,
) -> DensityProfile:
    """Combine the four pieces; C_+ is taken as -C_- exactly."""
    c_plus = -c_minus
    if tilde.amplitude != c_plus:
        raise DomainError(f"outer branch amplitude {tilde.amplitude} differs from -C_- = {c_plus}")
    return DensityProfile(
        params=params,
        hat_neg=hat_neg,
        kink=kink,
        tilde=tilde,
        hat_pos=hat_pos,
        Omega0=hat_neg.amplitude,
        Omega_w=kink.amplitude,
        C_minus=c_minus,
        C_minus_error=c_minus_error,
        C_plus=c_plus,
        Omega0_prime=omega0_prime,
        xi_s=xi_s,
    )


def build_density(
    velocity: VelocityProfile, omega0: float, tol: Tolerances, x0: float | None = None
) -> tuple[DensityProfile, ShockData]:
    """Run the density construction on a finished velocity profile.

    Returns:
        (density, shock) where shock carries Omega_- and Omega_+.
    """
    params = velocity.params
    shock = velocity.shock
    hat_neg = build_hat_neg(velocity.hat, omega0, params, tol)
    omega_w = float(hat_neg(critical_points(params).xi_w))
    kink = build_kink_omega(velocity.kink, omega_w, params, tol)
    c_minus, c_minus_error = compute_c_minus(kink, params, velocity.u_star_error)
    tilde = build_tilde_d(velocity.tilde, -c_minus, params, 1.0 / shock.xi_bar, tol, x0)
    omega_plus = float(tilde(shock.xi_bar))
    omega_minus = rh_density_jump(shock, omega_plus, params.a)
    hat_pos, omega0_prime = build_hat_pos(velocity.hat, omega_minus, shock.xi_bar, params, tol)
    density = assemble_density(
        hat_neg, kink, tilde, hat_pos, c_minus, c_minus_error, omega0_prime, shock.xi_bar, params
    )
    return density, replace(shock, Omega_minus=omega_minus, Omega_plus=omega_plus)


def perturb_outer(density: DensityProfile, factor: float) -> DensityProfile:
    """Copy with the outer branch scaled by factor, breaking the jump conditions at xi_s."""
    return replace(density, tilde=density.tilde.scaled(factor))
