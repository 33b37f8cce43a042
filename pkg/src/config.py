"""Configuration module for LinOptSim.

Manages project-wide constants, paths, numerical tolerances and the default
wiring of the simulated schemes.
"""

import math
import os
from pathlib import Path
from typing import Final

# Project paths
PROJECT_ROOT: Final[Path] = Path(__file__).parent.parent.resolve()
CIRCUITS_DIR: Final[Path] = PROJECT_ROOT / "circuits"

# Numerical tolerances
PRUNE_TOLERANCE: Final[float] = 1e-14
NORMALIZATION_TOLERANCE: Final[float] = 1e-12
PROJECTION_INPUT_TOLERANCE: Final[float] = 1e-9
UNITARITY_TOLERANCE: Final[float] = 1e-12
ORACLE_TOLERANCE: Final[float] = 1e-10
CLONE_FIDELITY_TOLERANCE: Final[float] = 1e-9

# Resource limits
DENSE_MAX_ENTRIES_ENV: Final[str] = "LINOPTSIM_DENSE_MAX_ENTRIES"
DENSE_MAX_ENTRIES: Final[int] = int(os.environ.get(DENSE_MAX_ENTRIES_ENV, 2_000_000))
DENSE_WARN_FRACTION: Final[float] = 0.5
PERMANENT_MAX_SIZE: Final[int] = 20

# Scheme defaults
DEFAULT_THETA: Final[float] = math.pi / 4
DEFAULT_SCAN_START: Final[float] = 0.0
DEFAULT_SCAN_END: Final[float] = math.pi / 2
DEFAULT_SCAN_STEPS: Final[int] = 101
DEFAULT_PAIRS: Final[int] = 2
MAX_PRACTICAL_PAIRS: Final[int] = 4

# Oracle cross-check defaults
DEFAULT_CROSSCHECK_TRIALS: Final[int] = 100
DEFAULT_MAX_MODES: Final[int] = 6
DEFAULT_MAX_PHOTONS: Final[int] = 4
DEFAULT_SEED: Final[int] = 42
RANDOM_STATE_MAX_TERMS: Final[int] = 4

# Beam wiring
POLARIZATIONS: Final[tuple[str, str]] = ("H", "V")
FOUR_PHOTON_BEAMS: Final[tuple[str, str, str, str]] = ("1", "2", "3", "4")
# Beams 1'..4' of the telecloning stage; "5" and "6" are the empty ports.
TELECLONING_OUTPUT_BEAMS: Final[tuple[str, str, str, str]] = ("1", "5", "2", "6")

# CSV output
CSV_FLOAT_FORMAT: Final[str] = "%.17g"
SCAN_CSV_COLUMNS: Final[list[str]] = ["theta", "probability", "fidelity"]

