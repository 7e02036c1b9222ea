"""
RingSplit Configuration
All paths and solver settings are centralized here.
"""
import os
import secrets


def get_base_dir():
    """
    Automatically detect and configure the base directory.

    Priority:
    1. RINGSPLIT_BASE_DIR environment variable
    2. User config file (~/.ringsplit/config)
    3. Project directory's ringsplit_data folder
    """
    # Priority 1: Environment variable
    if os.environ.get('RINGSPLIT_BASE_DIR'):
        return os.environ['RINGSPLIT_BASE_DIR']

    # Priority 2: User configuration file
    user_config = os.path.expanduser('~/.ringsplit/config')
    if os.path.exists(user_config):
        try:
            with open(user_config, 'r', encoding='utf-8') as f:
                base_dir = f.read().strip()
                if base_dir and os.path.isabs(base_dir):
                    return base_dir
        except (IOError, OSError):
            pass

    # Priority 3: Default to ringsplit_data in project directory
    project_dir = os.path.dirname(os.path.abspath(__file__))
    return os.path.join(project_dir, 'ringsplit_data')


def get_seed_override():
    """Return the RINGSPLIT_SEED value as an int, or None when unset or malformed."""
    raw = os.environ.get('RINGSPLIT_SEED', '').strip()
    if not raw:
        return None
    try:
        return int(raw)
    except ValueError:
        return None


# Base directory - automatically detected
BASE_DIR = get_base_dir()

RESULTS_DIR = os.path.join(BASE_DIR, "results")
PROBLEMS_DIR = os.path.join(BASE_DIR, "problems")
LOGS_DIR = os.path.join(BASE_DIR, "logs")

LOG_LEVEL = os.environ.get('RINGSPLIT_LOG_LEVEL', 'INFO').upper()

# Solver defaults. The residual is ||z^{k+1} - z^k||^2, so 1e-18 means a step norm of 1e-9.
DEFAULT_TOL_RESIDUAL_SQ = float(os.environ.get('RINGSPLIT_TOL', 1e-18))
DEFAULT_MAX_ITERS = int(os.environ.get('RINGSPLIT_MAX_ITERS', 10**6))
DEFAULT_CHECK_PERIOD = int(os.environ.get('RINGSPLIT_CHECK_PERIOD', 1))
DEFAULT_SEED = 0

# Fraction of the admissible gamma interval used when the caller gives no gamma.
DEFAULT_GAMMA_FRACTION = 0.9

# Sampling used by the operator property checks.
PROPERTY_SAMPLES = 1000
PROPERTY_TOLERANCE = 1e-10

# Grid-search oracle: largest grid it will scan, and default spacing per dimension.
GRID_MAX_POINTS = int(os.environ.get('RINGSPLIT_GRID_MAX_POINTS', 2 * 10**6))
GRID_DEFAULT_STEP = {1: 1e-3, 2: 1e-2}

# Certificate residual accepted by build_fixed_point.
CERTIFICATE_TOLERANCE = 1e-9

# CSV/summary formatting
CSV_FLOAT_FORMAT = '%.17g'
SUMMARY_MAX_COORDS = 8

# Flask configuration. Set RINGSPLIT_SECRET_KEY explicitly on persistent deployments.
SECRET_KEY = os.environ.get('RINGSPLIT_SECRET_KEY', secrets.token_hex(32))

# Request size limit for posted problem files (default 10MB).
MAX_CONTENT_LENGTH = int(float(os.environ.get('RINGSPLIT_MAX_CONTENT_MB', 10)) * 1024 * 1024)

# HTTP service
HOST = os.environ.get('RINGSPLIT_HOST', '127.0.0.1')
PORT = int(os.environ.get('RINGSPLIT_PORT', 5000))
DEBUG = os.environ.get('RINGSPLIT_DEBUG', 'false').lower() == 'true'
# Iteration cap for solves requested over HTTP
SERVICE_MAX_ITERS = int(os.environ.get('RINGSPLIT_SERVICE_MAX_ITERS', 10**5))

# Ensure directories exist (skip in test environments or when path doesn't exist)
try:
    for dir_path in [RESULTS_DIR, PROBLEMS_DIR, LOGS_DIR]:
        os.makedirs(dir_path, exist_ok=True)
except (PermissionError, OSError):
    # Running in a read-only environment
    pass
