"""Numerical knobs for the similarity construction and its checks.

Change these to trade accuracy for speed without touching the algorithms.
Lengths given as factors are multiplied by |xi_w| (or by the sound speed a
for velocity bands) at run time.
"""

# --- Velocity branches ---

# Integrations leave or stop short of the node P_w at this distance (times |xi_w|).
NODE_OFFSET_FACTOR = 1e-7

# Stored inner-branch samples stop this far from the node (times |xi_w|); the exact
# node value and slow slope close the gap. Samples are graded geometrically toward
# the join with this relative spacing.
NODE_JOIN_FACTOR = 1e-3
NODE_GRADING = 1e-2
NODE_GRADED_ZONE = 0.05

# Kink and outer branches are integrated out to these multiples of |xi_w|.
XI_MIN_FACTOR = 1e3
XI_MAX_FACTOR = 1e3

# The outer branch switches to xi(U) parametrization once it is this close to l- (times a).
SONIC_GUARD = 1e-3

# Sampling density of the stored branches: uniform spacing on the inner branch,
# relative spacing on the half-infinite ones.
HAT_SAMPLES = 4001
RELATIVE_SPACING = 1e-3

# Sign scan of U_tilde - H_hat before root polishing.
HUGONIOT_SCAN_POINTS = 10_000

# Relative band for "on the line" decisions in region classification.
BAND_TOL = 1e-12

# --- Density branches ---

# The C_- tail fit uses the last decade of kink samples.
TAIL_FIT_DECADES = 1.0

# Fitted exponent of |beta/xi - F_k| may exceed -2 by at most this much.
TAIL_EXPONENT_SLACK = 0.25

# Below this magnitude (times |beta|) the tail perturbation is treated as converged.
TAIL_NOISE_FLOOR = 1e-9

# Start of the D-branch integration, as a fraction of x_s = 1/xi_s.
X0_FACTOR = 1e-6

# --- Quadrature ---

GAUSS_ORDER = 10
QUAD_MAX_LEVELS = 8
GRADING_RATIO = 1.5

# --- Verification ---

CONTINUITY_LEVELS = 12
CONTINUITY_RTOL = 1e-5
FLUX_DELTA_EXPONENTS = tuple(range(1, 13))
FLUX_FIT_POINTS = 4
FLUX_SLOPE_RTOL = 0.10
FLUX_XI_CEILING = 1e6
WEAK_LEVELS = (3, 4, 5, 6)
WEAK_GAUSS_ORDER = 8
WEAK_RTOL = 1e-6
SHOCK_STRADDLE_FACTOR = 10.0

# --- Finite volumes ---

FV_R_MIN_FACTOR = 0.05
FV_R_MAX_FACTOR = 4.0
FV_DEFAULT_CELLS = 512
FV_DEFAULT_CFL = 0.45
FV_FRONT_CELLS = 2
FV_MIN_RATE = 0.8

# --- Output ---

SOLUTION_SCHEMA = "isothermal-collapse/solution@1"
REPORT_SCHEMA = "isothermal-collapse/verification@1"
ERROR_SCHEMA = "isothermal-collapse/error@1"
