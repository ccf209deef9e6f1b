"""
Interface FNO package exports.
"""

__version__ = "0.1.0"

from .checkpoint import load_checkpoint, load_model, save_model
from .constants import FlowKind, InitKind, LrSchedule, MetricSpace, SplitMode
from .datagen import (
    Dataset,
    FlowSpec,
    Frame,
    InitSpec,
    SimConfig,
    advect,
    build_forecast_dataset,
    build_pairs_dataset,
    generate_blob_simulations,
    init_blobs,
    init_column,
    redistance,
    simulate,
    velocity_at,
)
from .dataset_io import (
    export_grid_text,
    import_grid_text,
    import_grid_xlsx,
    read_dataset,
    read_field_text,
    write_dataset,
)
from .errors import (
    CheckpointError,
    ConfigError,
    DataFormatError,
    DivergenceError,
    FormatError,
    InterfaceFnoError,
    NumericalError,
    ParseError,
    ShapeError,
    ValidationError,
)
from .field_fft import fft2_real, ifft2_real, truncate_modes
from .fields import FieldBatch, Grid2D, HalfSpectrum, ScalarField2D
from .interface import (
    PhaseProps,
    RdfParams,
    alpha_to_rdf,
    binarize,
    curvature,
    mixture_property,
    rdf_to_alpha,
    surface_tension_force,
)
from .metrics import MetricsReport, error_map, mae, mse, r2, l2_error, relative_error
from .model import (
    FnoConfig,
    FnoModel,
    GradientStore,
    SpectralLayer,
    count_parameters,
    forward,
    init_model,
    layer_forward,
    lift,
    loss_and_grad,
    spectral_conv,
)
from .optim import AdamWState, OptimConfig, step
from .pipeline import (
    BenchResult,
    TrainConfig,
    TrainHistory,
    bench_inference,
    evaluate,
    mean_evolution,
    split_dataset,
    train,
)

__all__ = [
    "__version__",
    "load_checkpoint",
    "load_model",
    "save_model",
    "FlowKind",
    "InitKind",
    "LrSchedule",
    "MetricSpace",
    "SplitMode",
    "Dataset",
    "FlowSpec",
    "Frame",
    "InitSpec",
    "SimConfig",
    "advect",
    "build_forecast_dataset",
    "build_pairs_dataset",
    "generate_blob_simulations",
    "init_blobs",
    "init_column",
    "redistance",
    "simulate",
    "velocity_at",
    "export_grid_text",
    "import_grid_text",
    "import_grid_xlsx",
    "read_dataset",
    "read_field_text",
    "write_dataset",
    "CheckpointError",
    "ConfigError",
    "DataFormatError",
    "DivergenceError",
    "FormatError",
    "InterfaceFnoError",
    "NumericalError",
    "ParseError",
    "ShapeError",
    "ValidationError",
    "fft2_real",
    "ifft2_real",
    "truncate_modes",
    "FieldBatch",
    "Grid2D",
    "HalfSpectrum",
    "ScalarField2D",
    "PhaseProps",
    "RdfParams",
    "alpha_to_rdf",
    "binarize",
    "curvature",
    "mixture_property",
    "rdf_to_alpha",
    "surface_tension_force",
    "MetricsReport",
    "error_map",
    "mae",
    "mse",
    "r2",
    "l2_error",
    "relative_error",
    "FnoConfig",
    "FnoModel",
    "GradientStore",
    "SpectralLayer",
    "count_parameters",
    "forward",
    "init_model",
    "layer_forward",
    "lift",
    "loss_and_grad",
    "spectral_conv",
    "AdamWState",
    "OptimConfig",
    "step",
    "BenchResult",
    "TrainConfig",
    "TrainHistory",
    "bench_inference",
    "evaluate",
    "mean_evolution",
    "split_dataset",
    "train",
]
