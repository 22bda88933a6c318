"""Error hierarchy shared by the construction, evaluation and verification modules.

Every error carries the process exit code the CLI uses for it:
2 for invalid input, 3 for a construction or numerical failure.
"""


class SimilarityError(Exception):
    """Base class for all errors raised by this package."""

    exit_code = 3

    def to_dict(self) -> dict:
        """Machine-readable form written to error.json by the CLI."""
        return {"error": type(self).__name__, "message": str(self), "exit_code": self.exit_code}


# --- Invalid input (exit 2) ---


class InvalidInput(SimilarityError):
    exit_code = 2


class InvalidParameters(InvalidInput):
    """Parameters outside m in {1, 2}, -m < beta < 0, a > 0."""


class DomainError(InvalidInput):
    """Argument outside the interval where a function is defined."""


class OriginAtCollapse(InvalidInput):
    """Evaluation requested at the blowup point (t, r) = (0, 0)."""


class OriginIndeterminate(InvalidInput):
    """Velocity ODE evaluated on the axis xi = 0 away from U = 0."""


class ClassViolation(InvalidInput):
    """Momentum weak form requested with a test function not vanishing at r = 0."""


class FVConfigError(InvalidInput):
    """Finite-volume configuration violates its invariants."""


# --- Construction and numerical failures (exit 3) ---


class ConstructionError(SimilarityError):
    exit_code = 3


class SonicSingularity(ConstructionError):
    """Velocity ODE denominator vanishes away from a critical point."""


class NodeNotReached(ConstructionError):
    """Integration from the origin left the wedge between omega and l+ before reaching P_w."""


class ResidualTooLarge(ConstructionError):
    """Stored branch does not satisfy the velocity ODE to the required accuracy."""


class AssumptionViolated(ConstructionError):
    """Collapse speed U* is not negative for these parameters."""

    def __init__(self, message: str, u_star: float | None = None):
        super().__init__(message)
        self.u_star = u_star


class NoSonicCrossing(ConstructionError):
    """Outer branch never meets the sonic line l- in (0, -xi_w)."""


class NoBracket(ConstructionError):
    """Outer branch minus Hugoniot locus does not change sign."""


class EntropyViolation(ConstructionError):
    """Shock found at the intersection fails the 2-shock ordering."""


class SignViolation(ConstructionError):
    """A density branch changed sign."""


class TailDivergence(ConstructionError):
    """Kink density does not approach its power law fast enough."""


class WeakJump(ConstructionError):
    """Shock point does not lie strictly below the sonic line l-."""


class QuadratureFailure(ConstructionError):
    """Panel refinement did not converge."""


class ReachedOrigin(ConstructionError):
    """A traced path reached the centre r = 0."""

    def __init__(self, message: str, trace=None):
        super().__init__(message)
        self.trace = trace


class PositivityLoss(ConstructionError):
    """Finite-volume density became non-positive."""


class CFLViolation(ConstructionError):
    """A fixed time step exceeds the Courant limit."""
