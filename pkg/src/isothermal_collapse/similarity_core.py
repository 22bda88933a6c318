"""Similarity reduction of the radial isothermal Euler system.

With xi = r/t, u = U(xi) and rho = sgn(t)|t|^beta Omega(xi) the system reduces to

    U' = a^2 (beta + m U/xi) / ((U - xi)^2 - a^2)
    Omega'/Omega = -(U - xi) U' / a^2

This module holds the parameter set, both right-hand sides, the sonic-line
geometry and the critical point P_w with its linearization.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np

from . import numerics_config
from .exceptions import InvalidParameters, OriginIndeterminate, SonicSingularity

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SimilarityParams:
    """Problem parameters: dimension parameter m = n - 1, exponent beta, sound speed a."""

    m: int
    beta: float
    a: float = 1.0

    def __post_init__(self):
        if self.m not in (1, 2):
            raise InvalidParameters(f"m must be 1 or 2, got {self.m}")
        if not self.beta < 0:
            raise InvalidParameters(f"β out of (−m,0): beta={self.beta} is not < 0")
        if not self.beta > -self.m:
            raise InvalidParameters(f"β out of (−m,0): beta={self.beta} is not > -m={-self.m}")
        if not self.a > 0:
            raise InvalidParameters(f"sound speed must be positive, got a={self.a}")
        # both follow from the bounds above; integrability of the collapse profile relies on them
        assert self.beta + self.m > 0 and self.beta + self.n > 0

    @property
    def n(self) -> int:
        return self.m + 1

    @property
    def mu(self) -> float:
        return self.beta / self.m

    def scaled(self, s: float) -> "SimilarityParams":
        """Same flow with the sound speed multiplied by s."""
        return SimilarityParams(m=self.m, beta=self.beta, a=self.a * s)

    def to_dict(self) -> dict:
        return {"m": self.m, "beta": self.beta, "a": self.a}


@dataclass(frozen=True)
class CriticalPointData:
    """The node P_w = l+ ∩ omega and the eigen-data of its linearization."""

    xi_w: float
    U_w: float
    lambda_plus: float
    lambda_minus: float
    radicand: float

    @property
    def dir_plus(self) -> tuple[float, float]:
        return (1.0, 1.0 - self.lambda_plus)

    @property
    def dir_minus(self) -> tuple[float, float]:
        return (1.0, 1.0 - self.lambda_minus)

    @property
    def mirror_point(self) -> tuple[float, float]:
        """The third critical point -P_w."""
        return (-self.xi_w, -self.U_w)

    def to_dict(self) -> dict:
        return {
            "xi_w": self.xi_w,
            "U_w": self.U_w,
            "lambda_plus": self.lambda_plus,
            "lambda_minus": self.lambda_minus,
            "radicand": self.radicand,
            "dir_plus": list(self.dir_plus),
            "dir_minus": list(self.dir_minus),
        }


@dataclass(frozen=True)
class PhasePoint:
    xi: float
    U: float


@dataclass(frozen=True)
class RegionTag:
    """Signs of U - xi - a, U - xi + a and beta + m U/xi at a phase point (0 means on the line)."""

    l_plus: int
    l_minus: int
    omega: int
    in_U_region: bool

    @property
    def on_l_plus(self) -> bool:
        return self.l_plus == 0

    @property
    def on_l_minus(self) -> bool:
        return self.l_minus == 0

    @property
    def on_omega(self) -> bool:
        return self.omega == 0

    @property
    def is_critical(self) -> bool:
        return self.on_omega and (self.on_l_plus or self.on_l_minus)


def critical_points(params: SimilarityParams) -> CriticalPointData:
    """Closed forms for xi_w, U_w and the eigenvalues lambda_+- of the linearization at P_w."""
    m, beta, a = params.m, params.beta, params.a
    mu = params.mu
    xi_w = -a * m / (m + beta)
    U_w = a * beta / (m + beta)

    b = 1.0 + m * (1.0 + mu) / 2.0
    radicand = b * b - 2.0 * m * (1.0 + mu) ** 2
    if radicand <= 0:
        raise InvalidParameters(f"non-positive radicand {radicand} for m={m}, beta={beta}")
    root = math.sqrt(radicand)
    lambda_plus = 0.5 * (b + root)
    # product form avoids cancellation in the smaller root
    lambda_minus = (m * (1.0 + mu) ** 2 / 2.0) / lambda_plus

    logger.debug(f"P_w=({xi_w}, {U_w}), lambda+={lambda_plus}, lambda-={lambda_minus}")
    return CriticalPointData(
        xi_w=xi_w, U_w=U_w, lambda_plus=lambda_plus, lambda_minus=lambda_minus, radicand=radicand
    )


def origin_slope(params: SimilarityParams) -> float:
    """Slope -beta/n of the unique non-trivial solution through (0, 0)."""
    return -params.beta / params.n


def _band(params: SimilarityParams, *values: float, band_tol: float) -> float:
    return band_tol * max(params.a, *(abs(v) for v in values))


def ode_rhs_u(p: PhasePoint, params: SimilarityParams, band_tol: float = numerics_config.BAND_TOL) -> float:
    """dU/dxi at a phase point.

    Returns the limiting slope -beta/n at the origin. Critical points (numerator
    and denominator both within the band) return the slow-direction slope at
    ±P_w.

    Raises:
        OriginIndeterminate: xi = 0 with U != 0.
        SonicSingularity: denominator vanishes away from a critical point.
    """
    xi, U, a = p.xi, p.U, params.a
    band = _band(params, xi, U, band_tol=band_tol)
    if xi == 0.0:
        if abs(U) <= band:
            return origin_slope(params)
        raise OriginIndeterminate(f"U/xi undefined at xi=0, U={U}")

    numerator = a * a * (params.beta + params.m * U / xi)
    denominator = (U - xi) ** 2 - a * a
    if abs(denominator) <= band * a:
        if abs(numerator) <= band * a:
            return 1.0 - critical_points(params).lambda_minus
        raise SonicSingularity(f"sonic line crossed at xi={xi}, U={U}")
    return numerator / denominator


def velocity_rhs(xi, U, params: SimilarityParams):
    """Unchecked, vectorized dU/dxi for integrators and residual checks."""
    a2 = params.a * params.a
    return a2 * (params.beta + params.m * U / xi) / ((U - xi) ** 2 - a2)


def ode_rhs_log_omega(p: PhasePoint, dU: float, params: SimilarityParams) -> float:
    """d(ln|Omega|)/dxi given dU/dxi at the same point."""
    return -(p.U - p.xi) * dU / (params.a * params.a)


def log_omega_rhs(xi, U, dU, params: SimilarityParams):
    """Vectorized counterpart of ode_rhs_log_omega."""
    return -(U - xi) * dU / (params.a * params.a)


def classify_region(
    p: PhasePoint, params: SimilarityParams, band_tol: float = numerics_config.BAND_TOL
) -> RegionTag:
    """Position of a point relative to l+, l- and omega, and membership in {xi < xi_w, U > -mu xi}."""
    xi, U, a = p.xi, p.U, params.a
    band = _band(params, xi, U, band_tol=band_tol)

    def sign(value: float) -> int:
        return 0 if abs(value) <= band else (1 if value > 0 else -1)

    omega = params.beta + params.m * U / xi
    cp = critical_points(params)
    in_region = xi < cp.xi_w - band and U > -params.mu * xi + band
    return RegionTag(
        l_plus=sign(U - xi - a),
        l_minus=sign(U - xi + a),
        omega=sign(omega * max(1.0, abs(xi))),
        in_U_region=in_region,
    )


def mirror(samples: list[PhasePoint]) -> list[PhasePoint]:
    """Point reflection through the origin, a symmetry of the velocity ODE."""
    return [PhasePoint(xi=-s.xi, U=-s.U) for s in samples]


def mirror_arrays(xi: np.ndarray, U: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Array form of mirror, returned in increasing xi."""
    return (-xi)[::-1], (-U)[::-1]
