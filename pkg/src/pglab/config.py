"""Central numerical configuration: every tolerance, iteration cap and
generator constant used by the package lives here, so experiments are
reproducible from a single place."""

# -- dense kernels ------------------------------------------------------------

MAX_DENSE_DIM = 1024          # desk-scale cap on matrix dimension
HERMITIAN_RTOL = 1e-12        # relative symmetry check ||m - m^H|| <= tol*||m||
EIGVEC_UNITARY_TOL = 1e-10
SVD_RECON_RTOL = 1e-10
CHOLESKY_RTOL = 1e-12
SOLVE_RESIDUAL_RTOL = 1e-10
PIVOT_RTOL = 1e-14            # LU pivot threshold relative to ||m||_F
EIGEN_VERIFY_RTOL = 1e-8      # sigma_min(m - lambda I) <= tol*||m|| per eigenvalue

# -- field of values ----------------------------------------------------------

FOV_MIN_SAMPLES = 16
FOV_BASE_SAMPLES = 720
FOV_SWEEP_SAMPLES = 240       # cheaper grid used inside parameter sweeps
FOV_REFINE_TOL = 1e-8         # stop refining when the origin distance moves less
FOV_REFINE_MAX_ITER = 80
HNORMAL_RTOL = 1e-10          # ||Q Q* - Q* Q|| <= tol * ||Q||^2

# -- Krylov solvers -----------------------------------------------------------

GMRES_REORTH_TOL = 1e-8       # re-orthogonalize when residual basis component exceeds this
GMRES_BREAKDOWN_RTOL = 1e-14  # happy-breakdown threshold on the Arnoldi norm
DEFAULT_SOLVE_TOL = 1e-12

# -- bound verification -------------------------------------------------------

COND_BOUND_ATOL = 1e-8        # absolute slack on condition-number bounds
RATE_BOUND_RTOL = 1e-10       # relative slack on residual-rate bounds
CROSS_NORM_RTOL = 1e-10       # slack on minimal-residual cross-norm checks
# Relative recurrence residuals below this level are rounding noise (the
# Krylov space has numerically saturated); rate inequalities are reported but
# not asserted there.
RATE_VERIFY_FLOOR = 1e-30

# -- deterministic random numbers ----------------------------------------------
# 64-bit linear congruential generator (Knuth's MMIX constants); doubles are
# taken from the top 53 bits.  All randomized constructions in the package
# draw from this generator only.

LCG_MULT = 6364136223846793005
LCG_INC = 1442695040888963407
LCG_MASK = (1 << 64) - 1
LCG_BURN_IN = 13              # draws discarded after seeding to decorrelate streams
