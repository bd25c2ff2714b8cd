from bubbleflow import REPO_DIR

LOCAL_OUTPUT_DIR = REPO_DIR / "runs"  # default parent for run/verify/scan output folders

FILE_TRAJECTORY = "trajectory.csv"
FILE_REPORT = "report.json"
FILE_SUMMARY = "summary.json"
FILE_FAILURE = "failure.json"
FILE_CONFIG = "config.yaml"
DIR_SNAPSHOTS = "snapshots"

CSV_SCHEMA_VERSION = "bubbleflow-trajectory/1"
TRAJECTORY_COLUMNS = (
    "t",
    "t_physical",
    "xi_x",
    "xi_y",
    "xi_z",
    "energy",
    "area",
    "u_norm",
    "u_odd_norm",
    "I1",
    "I2",
    "dissipation",
)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_NUMERICAL_ABORT = 3

# Resolution defaults
DEFAULT_L_MAX = 16
DEFAULT_N_THETA = 40
DEFAULT_N_PHI = 80
# Trace modes reach degree trace_order + 3 <= l_max; the default trace order is l_max - 3.
TRACE_ORDER_GAP = 3
MIN_L_MAX = 4

# Radius scale is never allowed above this, even on a plane host.
LAMBDA_CAP = 0.5
# Largest |x| of a hemisphere node (with graph height) that must stay inside the chart at scale lambda.
CHART_FOOTPRINT = 1.5

# Solver defaults
BOUNDARY_TOL = 1e-8
CONSTRAINT_TOL = 1e-10
MAX_NEWTON = 25
FIRST_DAMPING = 0.5
STOP_TOL = 1e-9
GRAPH_FACTOR_MIN = 0.5
SMALL_GRAPH_NORM = 0.3

# Finite-difference steps
FD_LOG_STEP = 1e-5
FD_EQUATOR_STEP = 1e-4
FD_PATH_STEP = 1e-4
FD_JACOBIAN_STEP = 1e-7
