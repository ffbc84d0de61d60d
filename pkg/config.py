"""
Configuration settings for the Morse-Bott verification engine.

Every tolerance and budget used by the algorithms lives here. Values can be
overridden through ``MBH_<NAME>`` environment variables (a ``.env`` file is
honoured) or per run through a TOML file passed to the CLI.

The algorithm modules read their numerical tolerances from the base ``Config``
at import time, so those follow ``MBH_<NAME>`` only. A profile may override
the names in ``PROFILE_SETTINGS``: the search budget, which reaches the
search through ``SearchParams``, and the settings the engine and CLI read from
the selected profile.
"""

import os
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from pathlib import Path
from typing import Any, Dict

from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    value = os.environ.get(f"MBH_{name}")
    return float(value) if value else default


def _env_int(name: str, default: int) -> int:
    value = os.environ.get(f"MBH_{name}")
    return int(value) if value else default


class Config:
    """Base configuration class."""
    DEBUG = False

    # Geometry
    POINT_TOL = _env_float('POINT_TOL', 1e-10)
    PROJ_TOL = _env_float('PROJ_TOL', 1e-9)
    FD_STEP = _env_float('FD_STEP', 1e-5)
    FD_RICHARDSON_STEPS = (1e-4, 1e-6)
    FD_TOL = _env_float('FD_TOL', 1e-6)
    HESS_STEP = _env_float('HESS_STEP', 1e-4)
    HESS_TOL = _env_float('HESS_TOL', 1e-6)
    HESS_ZERO_TOL = _env_float('HESS_ZERO_TOL', 1e-4)
    CRIT_TOL = _env_float('CRIT_TOL', 1e-6)
    NEWTON_MAX_ITER = _env_int('NEWTON_MAX_ITER', 5)
    CRIT_SEARCH_RADIUS = _env_float('CRIT_SEARCH_RADIUS', 1e-3)

    # Flow integration
    STOP_SPEED = _env_float('STOP_SPEED', 1e-9)
    HORIZON = _env_float('HORIZON', 1e3)
    INITIAL_STEP = 0.01
    MAX_STEP = _env_float('MAX_STEP', 0.1)
    MIN_STEP = 1e-8
    RTOL = _env_float('RTOL', 1e-9)
    ATOL = _env_float('ATOL', 1e-12)
    ESCAPE_RADIUS = _env_float('ESCAPE_RADIUS', 1e3)
    INTEGRATOR_TOL = _env_float('INTEGRATOR_TOL', 1e-9)
    LIMIT_TOL = _env_float('LIMIT_TOL', 1e-4)

    # Exponential decay fit
    FIT_SPEED_CEILING = 1e-2
    FIT_MIN_SAMPLES = _env_int('FIT_MIN_SAMPLES', 20)
    FIT_R2_THRESHOLD = _env_float('FIT_R2_THRESHOLD', 0.98)
    FIT_RATE_TOLERANCE = 0.2

    # Cascade search
    MATCH_TOL = _env_float('MATCH_TOL', 1e-6)
    APPROACH_TOL = _env_float('APPROACH_TOL', 0.5)
    DEDUP_RADIUS = _env_float('DEDUP_RADIUS', 1e-3)
    REFINE_TOL = _env_float('REFINE_TOL', 1e-10)
    MAX_SHOTS = _env_int('MAX_SHOTS', 100000)
    SCAN_POINTS = _env_int('SCAN_POINTS', 48)
    LAUNCH_EPS = _env_float('LAUNCH_EPS', 1e-4)
    METRIC_RETRIES = _env_int('METRIC_RETRIES', 3)
    CONFORMAL_AMPLITUDE = 0.05
    DWELL_RADIUS = _env_float('DWELL_RADIUS', 1e-3)
    DWELL_THRESHOLD = _env_float('DWELL_THRESHOLD', 5.0)
    TIME_GRID_MAX = 20.0
    TIME_GRID_POINTS = 24
    H_FLOW_HORIZON = 200.0

    # Path-space involutions
    OP_TOL = _env_float('OP_TOL', 1e-9)
    SPECTRUM_TOL = 1e-8
    EIGEN_DEDUP_RTOL = 1e-7
    KMAX = _env_int('KMAX', 4)
    GRID = _env_int('GRID', 64)
    COMPLEX_DIM = _env_int('COMPLEX_DIM', 1)

    # Novikov field
    NOVIKOV_DEPTH = _env_float('NOVIKOV_DEPTH', 20.0)
    EXPONENT_BOUND = _env_int('EXPONENT_BOUND', 10 ** 6)
    ENERGY_TOL = 1e-9

    # Moment maps
    MOMENT_FD_STEP = 1e-5
    MOMENT_RESIDUAL_TOL = 1e-6
    MOMENT_NEWTON_TOL = 1e-10
    MOMENT_NEWTON_MAX_ITER = 50
    STABILIZER_GRID = 1000
    FREE_TOL = 1e-6
    H2_SAMPLES = _env_int('H2_SAMPLES', 8)

    # Runs and reports
    DEFAULT_SEED = _env_int('DEFAULT_SEED', 7)
    REPORT_SCHEMA = "1"
    LOG_DIR = os.environ.get('MBH_LOG_DIR') or 'logs'
    OUTPUT_DIR = os.environ.get('MBH_OUTPUT_DIR') or 'reports'


class DevelopmentConfig(Config):
    """Development configuration."""
    DEBUG = True


class ProductionConfig(Config):
    """Production configuration."""
    DEBUG = False


class TestingConfig(Config):
    """Testing configuration."""
    DEBUG = False
    SCAN_POINTS = 32
    H2_SAMPLES = 4


# Settings read from the selected profile rather than from the base class
PROFILE_SETTINGS = frozenset({
    'DEBUG', 'DEFAULT_SEED', 'LOG_DIR', 'OUTPUT_DIR', 'REPORT_SCHEMA',
    'KMAX', 'GRID', 'COMPLEX_DIM', 'H2_SAMPLES', 'FIT_RATE_TOLERANCE',
    'SCAN_POINTS', 'LAUNCH_EPS', 'MATCH_TOL', 'APPROACH_TOL', 'DEDUP_RADIUS',
    'REFINE_TOL', 'MAX_SHOTS', 'METRIC_RETRIES', 'CONFORMAL_AMPLITUDE', 'DWELL_RADIUS',
    'DWELL_THRESHOLD', 'TIME_GRID_MAX', 'TIME_GRID_POINTS', 'STOP_SPEED', 'HORIZON',
    'MAX_STEP', 'H_FLOW_HORIZON'
})


# Configuration mapping
config = {
    'development': DevelopmentConfig,
    'production': ProductionConfig,
    'testing': TestingConfig,
    'default': DevelopmentConfig
}


def get_config(name: str = None):
    """Return the configuration class selected by name or ``MBH_ENV``."""
    name = name or os.environ.get('MBH_ENV') or 'default'
    return config.get(name, config['default'])


def load_run_file(path) -> Dict[str, Any]:
    """Read a declarative TOML run file into a plain dictionary."""
    return tomllib.loads(Path(path).read_text(encoding="utf-8"))
