"""
Global configuration for the tree equipartition lab.
"""

import os
from pathlib import Path
from dotenv import load_dotenv

load_dotenv()

# ─── Paths ───────────────────────────────────────────────────────────────────
BASE_DIR = Path(__file__).resolve().parent
RESULTS_DIR = BASE_DIR / "results"

# Ensure directories exist
RESULTS_DIR.mkdir(exist_ok=True)

# ─── Logging ─────────────────────────────────────────────────────────────────
LOG_LEVEL = os.getenv("TREEQUIPART_LOG_LEVEL", "INFO")

# ─── Enumeration Caps ───────────────────────────────────────────────────────
MAX_RADIUS = int(os.getenv("TREEQUIPART_MAX_RADIUS", "12"))          # spheres / balls / flips
MAX_GROUP_LEVEL = int(os.getenv("TREEQUIPART_MAX_GROUP_LEVEL", "12"))  # levels n of G_n

# ─── Exact Evaluation Caps ──────────────────────────────────────────────────
MAX_SPANNING_SITES = int(os.getenv("TREEQUIPART_MAX_SPANNING_SITES", "100000"))
MAX_ENTROPY_ATOMS = int(os.getenv("TREEQUIPART_MAX_ENTROPY_ATOMS", str(2 ** 16)))
MAX_BRUTE_FORCE_ATOMS = int(os.getenv("TREEQUIPART_MAX_BRUTE_FORCE_ATOMS", str(2 ** 20)))

# ─── Boundary Group ─────────────────────────────────────────────────────────
FOLNER_STRICT_ORDER = True        # "larger than xi_{n+1}" read as strict inequality

# ─── Process Models ─────────────────────────────────────────────────────────
PSI_ZERO_ATOM_POLICY = "exclude"  # or "infinite": report psi = inf on zero-probability atoms
BATCH_CHUNK_SIZE = 4096           # configurations per sum-product pass when enumerating atoms

# ─── Experiments ─────────────────────────────────────────────────────────────
DEFAULT_SEED = 0
DEFAULT_REPLICAS = 200
DEFAULT_K_MAX = 6                 # largest distance for psi-decay fits
MC_SIGMA = 3.0                    # Monte Carlo slack in standard errors
BOUNDARY_STREAM = 2 ** 31 - 1     # rng stream id reserved for Patterson-Sullivan draws
PSI_BOUND_RTOL = 1e-9             # relative slack when comparing psi against a fitted bound
PSI_MAX_SPHERE_LEVEL = 2          # largest n for psi between sphere blocks
