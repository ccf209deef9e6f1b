"""
Defaults, enums and file-format constants used across the package.
"""

from __future__ import annotations

from enum import Enum


# Network architecture defaults (five Fourier layers, 96 hidden channels, 20x20 modes).
DEFAULT_IN_CHANNELS = 2
DEFAULT_OUT_CHANNELS = 1
DEFAULT_WIDTH = 96
DEFAULT_MODES = (20, 20)
DEFAULT_LAYERS = 5

# Optimization defaults.
DEFAULT_LR = 5e-4
DEFAULT_WEIGHT_DECAY = 1e-4
DEFAULT_BETA1 = 0.9
DEFAULT_BETA2 = 0.999
DEFAULT_ADAM_EPS = 1e-8
DEFAULT_EPOCHS = 100
DEFAULT_BATCH_SIZE = 32
DEFAULT_SPLIT_FRACTION = 0.9

# Interface transform defaults.
DEFAULT_RDF_EPSILON = 1.0
DEFAULT_RDF_DELTA = 1e-6
GRADIENT_NORM_FLOOR = 1e-12
INTERFACE_BAND_GRADIENT = 0.5
FRACTION_SLACK = 1e-9

# Layer normalization denominator offset.
NORM_EPS = 1e-5

# Smallest grid accepted by simulations and datasets.
MIN_SIMULATION_CELLS = 4

# Blob placement attempts before giving up.
MAX_PLACEMENT_ATTEMPTS = 1000

# Binary formats (little-endian).
DATASET_MAGIC = b"FNDS"
DATASET_VERSION = 1
CHECKPOINT_MAGIC = b"FNCK"
CHECKPOINT_VERSION = 1
OPTIMIZER_BLOCK_MAGIC = b"ADMW"

# Worker pool size override.
THREADS_ENV_VAR = "FNO_THREADS"


class FlowKind(Enum):
    """
    Prescribed analytic velocity fields used by the data generator.
    """

    RIGID_ROTATION = "rotation"
    SINGLE_VORTEX = "vortex"
    STAGNATION_COLLAPSE = "stagnation"
    UNIFORM_FALL = "fall"


class InitKind(Enum):
    """
    Initial interface shapes.
    """

    COLUMN = "column"
    RANDOM_BLOBS = "random_blobs"


class SplitMode(Enum):
    """
    How a dataset is partitioned into training and validation samples.
    """

    TEMPORAL = "temporal"
    RANDOM = "random"


class MetricSpace(Enum):
    """
    Field space in which validation metrics are computed.
    """

    RDF = "rdf"
    ALPHA = "alpha"


class Interpolation(Enum):
    """
    Departure-point interpolation used by semi-Lagrangian advection.
    """

    LINEAR = "linear"
    CUBIC = "cubic"


class LrSchedule(Enum):
    """
    Learning-rate schedules supported by the optimizer.
    """

    CONSTANT = "constant"
    COSINE = "cosine"
