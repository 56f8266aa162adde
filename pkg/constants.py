WORKLOAD_NAME = "pcsom"
WORKERS_ENV = "PCSOM_WORKERS"

# State validation
HERMITIAN_TOL = 1e-10
TRACE_TOL = 1e-9
POSITIVITY_TOL = 1e-9
NORM_TOL = 1e-12
GENERATOR_HERMITIAN_TOL = 1e-8

# Truncation leakage
LEAKAGE_THRESHOLD = 1e-4
PCS_LEAKAGE_THRESHOLD = 1e-6

# Default cutoffs (a, b1, b2)
EFFECTIVE_CUTOFFS = (4, 14, 14)

# Model checks
RWA_THRESHOLD = 0.1
ADIABATIC_THRESHOLD = 0.2
TRANSFER_DECAY_THRESHOLD = 0.15

# Solvers
EVOLVE_RTOL = 1e-8
EVOLVE_ATOL_RATIO = 1e-2
STEADY_SHIFT = 1e-15
STEADY_MAXITER = 30
STEADY_RESIDUAL_TOL = 1e-9
DEGENERACY_TOL = 1e-8
DEGENERACY_MAX_DIM = 8
DEGENERACY_ITERATIONS = 3

# Phase-space grids
X_EXTENT = 10.0
X_STEP = 0.05
THETA_POINTS = 64
THETA_XATOL = 1e-4
GRID_NORMALIZATION_TOL = 1e-3
DENSITY_FLOOR = 1e-12
WIGNER_COARSE_POINTS = 21
WIGNER_PATTERN_ITERATIONS = 40
WIGNER_SHRINK = 0.5
CAT_GRID_EXTENT = 4.5
CAT_GRID_POINTS = 121

# Sweeps
ZETA_VALUES = tuple(round(0.1 * k, 10) for k in range(21))
T_MAX = 4.0e3
N_TIMES = 201
# Steady engines read the damped state off its plateau at this time, in units of 1/gamma_a
STEADY_TIME_GAMMA_A = 50.0

# Parameter set of the dissipative PCS scheme, frequencies in units of omega_b1
REFERENCE_MODEL = {
    "omega_b1": 1.0,
    "omega_b2": 1.5,
    "g1": 0.045,
    "g2": 0.055,
    "eps_p": 1.58,
    "eps_d": -5.218e-3,
    "Delta": 2.5032,
    "Delta_p": -2.5,
    "gamma_a": 2.5e-3,
    "gamma_b1": 1.0e-6,
    "gamma_b2": 1.5e-6,
    "nbar_b1": 0.0,
    "nbar_b2": 0.0,
}

# Readout cavity for the remote cat, chosen so that exp(-G*tau) ~ 0.018
REFERENCE_TRANSFER = {
    "g_t": 0.015,
    "gamma_t": 0.15,
    "eps_p2": 2.01,
    "Delta_t": 1.5,
    "tau": 1500.0,
}
