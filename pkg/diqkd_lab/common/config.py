import math
import os
from pathlib import Path

OUTPUT_DIR = Path(os.environ.get("DIQKD_LAB_OUTPUT_DIR", Path.cwd() / "diqkd-output"))

TIMEZONE = os.environ.get("DIQKD_LAB_TIMEZONE", "UTC")
LOG_LEVEL = os.environ.get("DIQKD_LAB_LOG_LEVEL", "WARNING")

# Physical constants, full float precision
TSIRELSON = 2.0 * math.sqrt(2.0)       # quantum CHSH maximum
LOCAL_BOUND = 2.0                      # classical CHSH maximum
ALGEBRAIC_BOUND = 4.0                  # no-signalling CHSH maximum

# Tolerances
HERMITIAN_TOL = 1e-12
PSD_TOL = 1e-10
TRACE_TOL = 1e-10
PROBABILITY_TOL = 1e-10
TABLE_TOL = 1e-9                       # exact correlation-table normalization
ENTROPY_CLAMP = 1e-15                  # p below this contributes 0·log 0
BINARY_ENTROPY_SLACK = 1e-12
TSIRELSON_SLACK = 1e-9                 # S above 2√2 clamped inside, rejected outside
OBSERVABLE_TOL = 1e-10                 # A² = I check
UNIT_EIGENVALUE_TOL = 1e-8             # ω = ±1 classification for A2·A1
RECONSTRUCTION_TOL = 1e-10
BOUND_SLACK = 1e-9                     # verification slack on χ ≤ F(S)

# Numerics defaults
THRESHOLD_XTOL = 1e-6                  # bisection tolerance in the swept variable
PHI_SCAN_GRID = 10_000
VERIFY_PHI_GRID = 16
CSV_SIG_DIGITS = 12
MAX_REPORTED_VIOLATIONS = 1000

# Protocol defaults
DEFAULT_KEY_FRACTION = 0.5
DEFAULT_BLOCK_SIZE = 65_536            # rounds per counter-based RNG block
SIGMA_MULTIPLIER = 5.0

# CLI exit codes
EXIT_OK = 0
EXIT_USAGE = 2
EXIT_VERIFICATION = 3
EXIT_NUMERIC = 4


class Config:
    """Central access point for all configuration."""

    output_dir = OUTPUT_DIR
    timezone = TIMEZONE
    log_level = LOG_LEVEL

    tsirelson = TSIRELSON
    local_bound = LOCAL_BOUND
    algebraic_bound = ALGEBRAIC_BOUND

    hermitian_tol = HERMITIAN_TOL
    psd_tol = PSD_TOL
    trace_tol = TRACE_TOL
    probability_tol = PROBABILITY_TOL
    table_tol = TABLE_TOL
    entropy_clamp = ENTROPY_CLAMP
    binary_entropy_slack = BINARY_ENTROPY_SLACK
    tsirelson_slack = TSIRELSON_SLACK
    observable_tol = OBSERVABLE_TOL
    unit_eigenvalue_tol = UNIT_EIGENVALUE_TOL
    reconstruction_tol = RECONSTRUCTION_TOL
    bound_slack = BOUND_SLACK

    threshold_xtol = THRESHOLD_XTOL
    phi_scan_grid = PHI_SCAN_GRID
    verify_phi_grid = VERIFY_PHI_GRID
    csv_sig_digits = CSV_SIG_DIGITS
    max_reported_violations = MAX_REPORTED_VIOLATIONS

    default_key_fraction = DEFAULT_KEY_FRACTION
    default_block_size = DEFAULT_BLOCK_SIZE
    sigma_multiplier = SIGMA_MULTIPLIER

    exit_ok = EXIT_OK
    exit_usage = EXIT_USAGE
    exit_verification = EXIT_VERIFICATION
    exit_numeric = EXIT_NUMERIC

    @classmethod
    def ensure_dirs(cls):
        cls.output_dir.mkdir(parents=True, exist_ok=True)
