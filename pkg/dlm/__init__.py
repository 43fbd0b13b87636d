# Relative tolerance for the symmetry check on scale matrices.
SYMMETRY_TOLERANCE = 1e-12
# A scale matrix whose smallest eigenvalue is below this fraction of its
# trace is treated as degenerate.
DEFINITENESS_TOLERANCE = 1e-12
# Bracket for the MFVB degrees-of-freedom solver.
DOF_SEARCH_START = (0.1, 1000.0)
DOF_SEARCH_LIMITS = (1e-6, 1e8)
DOF_RESIDUAL_TOLERANCE = 1e-10
