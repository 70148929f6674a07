# app/config/settings.py
#
# Process-wide numerical defaults. Everything here can be overridden per call
# by passing a ToleranceConfig; the CLI exposes the same knobs as flags.

import numpy as np

from app.models.verification import ToleranceConfig


MACHINE_EPS = float(np.finfo(np.float64).eps)

# ── Verification thresholds ──────────────────────────────────────────────────
DEFAULT_CHECK_TOL    = 1e-10
FIXTURE_TOL          = 1e-10
RANDOM_SUITE_REL_TOL = 1e-8
RANDOM_RANK_REL_TOL  = 1e-9

# ── SVD phase normalisation ──────────────────────────────────────────────────
# First component of a right singular vector above this magnitude is made real
# and positive, so singular vectors are reproducible across LAPACK builds.
PHASE_PIVOT_THRESHOLD = 1e-8

# ── Harness ──────────────────────────────────────────────────────────────────
DEFAULT_WORKERS = 1
PRINT_SIGNIFICANT_DIGITS = 5
FILE_SIGNIFICANT_DIGITS  = 17


def get_default_tolerance() -> ToleranceConfig:
    return ToleranceConfig(check_tol=DEFAULT_CHECK_TOL)


def get_random_suite_tolerance() -> ToleranceConfig:
    return ToleranceConfig(rank_rel_tol=RANDOM_RANK_REL_TOL, check_tol=RANDOM_SUITE_REL_TOL)
