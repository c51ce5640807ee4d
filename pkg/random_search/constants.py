from dataclasses import dataclass
from pathlib import Path

import numpy as np

# Default locations and experiment shape shared across modules
OUTPUT_DIR = Path("results")
MANIFEST_NAME = "manifest.json"
REPORT_NAME = "report.csv"
PLAN_NAME = "plan.txt"

SYNTHETIC_N = 455
SYNTHETIC_D = 30
SYNTHETIC_SEPARATION = 2.0
# Nearly separable classes, like the real n = 455, d = 30 task
BENCHMARK_SEPARATION = 10.0
DEFAULT_LAMBDA = 1.0
DEFAULT_SEED = 0

BATCH_GRID = (1, 5, 10, 25, 50, 100)
DEFAULT_BATCH = 10
DEFAULT_TRIALS = 20
DEFAULT_BUDGET = 60_000
# Batch sweeps give every panel 2 * b * PANEL_ITERS queries
PANEL_ITERS = 1000
CHECKPOINTS = 100
DEFAULT_EPOCH = 10
DEFAULT_BETA = 1.0
BETA_GRID = (0.1, 0.25, 0.5, 0.75, 1.0)

PILOT_GRID = tuple(float(v) for v in np.geomspace(1e-3, 10.0, 13))
# Share of the measured budget each pilot candidate is scored on
PILOT_FRACTION = 1.0

# RSGF / ZO-CD smoothing radius is this factor times sqrt(d)
MU_FD_FACTOR = 1e-4

DIRECTION_KINDS = ("sphere", "gaussian", "coordinate")
METHODS = (
    "mi2p",
    "exact",
    "vr_mi2p",
    "vr_snap",
    "helper",
    "rsgf",
    "zocd",
    "momentum_heavyball",
    "momentum_mvr",
    "momentum_transport",
)


@dataclass(frozen=True)
class Tolerances:
    """Slack used by every diagnostic check."""

    std_errors: float = 3.0
    variance_slope: float = -1.0
    variance_slope_tol: float = 0.05
    projection_slope: float = -0.5
    projection_slope_tol: float = 0.1
    vr_linear_slope_tol: float = 0.15
    vr_batch_slope_tol: float = 0.1
    vr_cell_fraction: float = 0.95
    helper_slope: float = 0.5
    helper_slope_tol: float = 0.15
    mu_relative_spread: float = 0.10
    min_slope_points: int = 4


TOLERANCES = Tolerances()
