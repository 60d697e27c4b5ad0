# Configuration keys
CONFIG_PATH_KEY = "config"
PRESET_KEY = "preset"
PRESET_CONFIG_PATH_KEY = "preset_config_path"
LOG_FILE_KEY = "log_file"
QUIET_KEY = "quiet"
COMMAND_KEY = "command"
OUT_DIR_KEY = "out"

# Model parameters
RHO_KEY = "rho"
SIGMA_KEY = "sigma"
A0_KEY = "a0"
A1_KEY = "a1"
EPS_KEY = "eps"
VALIDATION_KEY = "validation"
PARAMETER_KEYS = (RHO_KEY, SIGMA_KEY, A0_KEY, A1_KEY, EPS_KEY)

# Discretization and run control
GRID_KEY = "grid"
DT_KEY = "dt"
T_KEY = "T"
SCHEME_KEY = "scheme_v"
INIT_KEY = "init"
SNAPSHOT_EVERY_KEY = "snapshot_every"
FIELD_TIMES_KEY = "field_times"
STOP_THRESHOLD_KEY = "stop_threshold"
STOP_TARGET_KEY = "stop_target"
FIT_WINDOW_KEY = "fit_window"
CG_RTOL_KEY = "cg_rtol"
CG_MAXITER_KEY = "cg_maxiter"
HYPOTHESIS_CHECK_KEY = "hypothesis_check"

# stationary
SWEEP_KEY = "sweep"
PROFILE_KEY = "profile"

# picard
N_MAX_KEY = "n_max"
TOL_KEY = "tol"
CERTIFICATE_STRIDE_KEY = "certificate_stride"

# verify
QUICK_KEY = "quick"
PERTURB_LAPLACIAN_KEY = "perturb_laplacian"
SEED_KEY = "seed"

# Subcommand names
STATIONARY_COMMAND = "stationary"
EVOLVE_COMMAND = "evolve"
PICARD_COMMAND = "picard"
VERIFY_COMMAND = "verify"
COMMANDS = (STATIONARY_COMMAND, EVOLVE_COMMAND, PICARD_COMMAND, VERIFY_COMMAND)
MODEL_COMMANDS = (STATIONARY_COMMAND, EVOLVE_COMMAND, PICARD_COMMAND)
TIME_COMMANDS = (EVOLVE_COMMAND, PICARD_COMMAND)

# Accepted values
VALIDATION_MODES = ("strict", "lenient")
V_SCHEMES = ("riccati-exact", "explicit-euler")
HYPOTHESIS_POLICIES = ("warn", "error", "off")
INIT_SINE_MODE = "sine-mode"
INIT_STATIONARY = "stationary"
INIT_CONSTANT_PREFIX = "constant:"
INIT_ALIASES = {"paper-fig2": INIT_SINE_MODE}

# Environment
ENV_PREFIX = "CADHERIN_"

# Default values
DEFAULT_CONFIG_PATH = "config/config.json"
DEFAULT_PRESET_CONFIG_PATH = "config/presets.yaml"
DEFAULT_LOG_FILE_NAME = "cadherin.log"
DEFAULT_OUT_DIR = "output"
DEFAULT_RHO = 0.7
DEFAULT_SIGMA = 0.5
DEFAULT_A0 = 0.25
DEFAULT_A1 = 0.5
DEFAULT_EPS = 0.35
DEFAULT_VALIDATION = "strict"
DEFAULT_GRID = "64x64"
DEFAULT_T = 1.0
DEFAULT_SCHEME = "riccati-exact"
DEFAULT_INIT = INIT_SINE_MODE
DEFAULT_SNAPSHOT_EVERY = 100
DEFAULT_FIELD_TIMES = "1"
DEFAULT_CG_RTOL = 1e-10
DEFAULT_CG_MAXITER = 2000
DEFAULT_HYPOTHESIS_CHECK = "warn"
DEFAULT_N_MAX = 20
DEFAULT_TOL = 1e-6
DEFAULT_CERTIFICATE_STRIDE = 1
DEFAULT_SEED = 0
DEFAULT_PROFILE_POINTS = 401
