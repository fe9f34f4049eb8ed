#  Copyright (c) 2025, The spin_expansion authors
#  MIT License (see CONTRIBUTING.md)
"""Constants for the spin_expansion package.

For more details about this package, please refer to the documentation at
README.md in the repository root.
"""

from typing import Final

# Base package constants
NAME: Final = "Spin Expansion"
DOMAIN: Final = "spin_expansion"
VERSION: Final = "1.0.0"
ISSUE_URL: Final = "https://github.com/spin-expansion/spin_expansion/issues"

STARTUP_MESSAGE: Final = f"""
-------------------------------------------------------------------
{NAME}
Version: {VERSION}
Cluster expansion for weakly-interacting quantum spin systems.
If you have ANY issues with this you need to open an issue here:
{ISSUE_URL}
-------------------------------------------------------------------
"""

# Numerical tolerances
HERMITIAN_TOL: Final = 1e-10
NORM_TOL: Final = 1e-10
HERMITIAN_DETECT_TOL: Final = 1e-12
IMAG_RESIDUE_TOL: Final = 1e-8
TABLE_SUM_TOL: Final = 1e-10

# Caps
MAX_EMBED_DIM: Final = 2**20
MAX_URSELL_VERTICES: Final = 12
MAX_URSELL_EXHAUSTIVE_EDGES: Final = 10
MAX_ORACLE_STATES: Final = 4096
MAX_ORACLE_SPINS: Final = 12
MAX_DIRECT_POLYMERS: Final = 20
MAX_TABLE_STATES: Final = 4096
MAX_ORACLE_EDGES: Final = 10
MAX_SERIES_STATES: Final = 2**18

# Defaults
DEFAULT_TRUNCATION_C0: Final = 3.0
DEFAULT_EXP_REAL_CAP: Final = 700.0
DEFAULT_WORKERS: Final = 1
DEFAULT_MIN_DEGREE: Final = 2
DEFAULT_MIN_RANK: Final = 2
DEFAULT_DECAY_START: Final = 3
DEFAULT_LOG_LEVEL: Final = "WARNING"

# Summation strategies for the cluster sum
SUMMATION_SERIES: Final = "series"
SUMMATION_CLUSTERS: Final = "clusters"
DEFAULT_SUMMATION: Final = SUMMATION_SERIES

# Seeds are 64-bit
SEED_MASK: Final = (1 << 64) - 1

# Environment
ENV_WORKERS: Final = "SPIN_EXPANSION_WORKERS"

# Configuration and options
CONF_BETA: Final = "beta"
CONF_LAMBDA: Final = "lambda"
CONF_EPSILON: Final = "epsilon"
CONF_SEED: Final = "seed"
CONF_MODEL: Final = "model"
CONF_TRUNCATION_C0: Final = "truncation_c0"
CONF_EXP_REAL_CAP: Final = "exp_real_cap"
CONF_WORKERS: Final = "workers"
CONF_VERTEX_ORDER: Final = "vertex_order"
CONF_TRUNCATION_ORDER: Final = "truncation_order"
CONF_MAX_CLUSTER_POLYMERS: Final = "max_cluster_polymers"
CONF_SUMMATION: Final = "summation"

# Model document keys
CONF_LOCAL_DIM: Final = "d"
CONF_N_VERTICES: Final = "n_vertices"
CONF_EDGES: Final = "edges"
CONF_EDGE_ID: Final = "id"
CONF_EDGE_VERTICES: Final = "vertices"
CONF_ON_SITE: Final = "on_site"
CONF_INTERACTIONS: Final = "interactions"

# Report attributes
ATTR_ADMISSIBLE: Final = "admissible"
ATTR_THRESHOLD: Final = "lambda_star"
ATTR_MAX_DEGREE: Final = "max_degree"
ATTR_RANK: Final = "rank"
ATTR_TRUNCATION_ORDER: Final = "truncation_order"
ATTR_CLUSTER_COUNT: Final = "cluster_count"
ATTR_POLYMER_COUNT: Final = "polymer_count"
ATTR_LOG_Z0: Final = "log_z0"
ATTR_CLUSTER_SUM: Final = "cluster_sum"
ATTR_LOG_Z: Final = "log_z"
ATTR_Z: Final = "z"
ATTR_PARTIALS: Final = "partials"
ATTR_DECAY_RATIO: Final = "decay_ratio"
ATTR_KP_MARGIN: Final = "kp_margin"
ATTR_NORMALIZED: Final = "normalized"
ATTR_WARNINGS: Final = "warnings"
ATTR_SAMPLES: Final = "samples"
ATTR_SEED: Final = "seed"
ATTR_QUERIES: Final = "queries"
ATTR_Z_EXACT: Final = "z_exact"
ATTR_REL_ERROR: Final = "relative_error"
ATTR_TV: Final = "tv_distance"
ATTR_EPSILON: Final = "epsilon"
ATTR_PASSED: Final = "passed"
ATTR_VALID: Final = "valid"
ATTR_VIOLATIONS: Final = "violations"

# Exit codes
EXIT_OK: Final = 0
EXIT_VALIDATION: Final = 2
EXIT_NUMERICAL: Final = 3
EXIT_CAP: Final = 4

# Output
FLOAT_DIGITS: Final = 17
