"""
Constants for zitd_gnn: model sizes, optimiser settings and numeric guards.
"""

# Encoder sizes
DEFAULT_HIDDEN = 42          # F, GRU hidden width
DEFAULT_SPATIAL_HIDDEN = 42  # F', GAT hidden width
DEFAULT_HEADS = 3            # M
LEAKY_SLOPE = 0.2

# Windows
DEFAULT_HISTORY = 14         # t
DEFAULT_HORIZON = 14         # p
SPLIT_RATIO = (8, 2, 2)
MIN_SERIES_LENGTH = 12

# Crash severity weights (minor, serious, fatal)
SEVERITY_WEIGHTS = (1.0, 2.0, 3.0)

# Decoder / loss
EPSILON = 1e-5
MAX_EPSILON = 1e-3
RELU_HEAD_BIAS = 2.0     # initial bias of the mu and phi heads; keeps both ReLUs active at start
DEFAULT_ETA = 0.0
PI_GUARD = 1e-12           # keeps log(pi) and log(1 - pi) finite in the training loss

# Optimiser
LEARNING_RATE = 0.01
WEIGHT_DECAY = 0.01
EPOCHS = 20
PATIENCE = 10
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8
GRAD_CLIP_NORM = 5.0

# Tweedie series
RHO_GUARD = 1e-9
RHO_MIN = 1.0 + RHO_GUARD
RHO_MAX = 2.0 - RHO_GUARD
SERIES_TOLERANCE = 1e-12
SERIES_MAX_TERMS = 10_000

# Intervals and metrics
LOWER_QUANTILE = 0.05
UPPER_QUANTILE = 0.95
INTERVAL_SAMPLES = 2000
ZERO_THRESHOLD = 0.5
HIT_RATE_FRACTION = 0.2

# Gradient checking
GRADCHECK_STEP = 1e-5
GRADCHECK_TOLERANCE = 1e-4

# Checkpoints
CHECKPOINT_FORMAT_VERSION = 1

DEFAULT_SEED = 0
