"""
Solver Configuration
====================
Default tolerances, budgets and acceptance bounds shared by the library and the CLI.
"""

# Numerical defaults (CLI flags override per invocation)
SOLVER_DEFAULTS = {
    'tol': 1e-6,                        # relative enclosure width target
    'grid': 512,                        # oracle grid resolution
    'samples': 4096,                    # oracle random samples
    'seed': 0,                          # oracle master seed
    'max_terms': 4096,                  # discretizing sequence length cap
    'eps_rel': 2.0 ** -40,              # head truncation threshold on phi
    'refinement_budget': 2 ** 20,       # max cells per enclosure
    'initial_split': 4,                 # subcells per cell before refinement
    'rounding_slack': 2.0 ** -36,       # relative widening of computed enclosures
    'ascent_sweeps': 3,                 # coordinate ascent passes in the oracle
    'batch_rows': 256,                  # oracle batch size
    'max_workers': 4,                   # thread pool width
}

# Calibrated equivalence bounds for the "≈" relations (implementation values)
EQUIVALENCE_BOUNDS = {
    'K_A1': 8.0,                        # A1 in [A/K, K*A]
    'K_A2': 8.0,                        # A2 in [A/K, K*A]
    'K_ORACLE': 16.0,                   # c_lower in [A/K, K*A]
    'K_DISCRETE': 8.0,                  # discretized supremal norm vs direct norm
    'A_LE_2_A1': 2.0,                   # explicit sufficiency factor
}

# Relative tolerance for the discretizing-sequence conditions (ii)/(iii)
INVARIANT_RTOL = 2.0 ** -40

# Process exit codes of the CLI
EXIT_CODES = {
    'OK': 0,
    'INVALID_SPEC': 1,
    'INEQUALITY_FAILS': 2,
    'NUMERICAL_FAILURE': 3,
}
