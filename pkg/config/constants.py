"""
Global constants for the flow map laboratory.
"""

# Application Info
APP_NAME = "Flow Map Lab"
APP_VERSION = "1.0.0"

# Exit codes
EXIT_OK = 0
EXIT_INTERNAL = 1
EXIT_CONFIG = 2
EXIT_NUMERIC = 3
EXIT_ACCEPTANCE = 4

# Checkerboard geometry: 4x4 cells of side 2 tiling [-4, 4]^2
BOARD_CELLS = 4
BOARD_HALF_WIDTH = 4.0

# Gaussian task defaults
GAUSSIAN_MEAN = (1.5, -0.5)
GAUSSIAN_STD = (0.7, 1.3)

# Variance-exploding horizon
VE_HORIZON = 80.0

# Network defaults (desk scale)
HIDDEN_WIDTHS = (128, 128, 128)
PAPER_HIDDEN_WIDTHS = (512, 512, 512, 512, 512, 512)
ACTIVATION = "gelu"
TIME_FREQUENCIES = 8

# Optimizer defaults
ADAM_LR = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
LR_DECAY = 0.992
LR_DECAY_EVERY = 1000

# Training defaults
BATCH_SIZE = 256
TRAIN_STEPS = 20000
PAPER_TRAIN_STEPS = 50000
LOG_EVERY = 100

# Sampling defaults
ODE_STEPS = 80
ODE_BASELINE_RK4_STEPS = 200
STYLE_S_PRIME = 0.3
STYLE_LEG_STEPS = 8

# Metric defaults
KL_BINS = 64
KL_RANGE = (-4.5, 4.5)
KL_SAMPLES = 200000
W2_SUBSAMPLE = 512
W2_REPEATS = 8
MISMATCH_THRESHOLD = 1.0
SCATTER_PIXELS = 800

# Oracle numerics
ORACLE_RK4_STEPS = 1000
DERIVATIVE_CHECK_STEP = 1e-5
DERIVATIVE_CHECK_RTOL = 1e-6

# Checkpoint format
CHECKPOINT_FORMAT_VERSION = 1

# File Extensions
EXT_CSV = ".csv"
EXT_PNG = ".png"
EXT_CKPT = ".ckpt"
EXT_LOG = ".log"
