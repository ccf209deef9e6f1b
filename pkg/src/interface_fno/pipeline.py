"""
Dataset splitting, the training loop, evaluation and the inference benchmark.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np
import polars as pl

from . import optim
from .constants import (
    DEFAULT_BATCH_SIZE,
    DEFAULT_EPOCHS,
    DEFAULT_SPLIT_FRACTION,
    MetricSpace,
    SplitMode,
)
from .datagen import Dataset
from .errors import ConfigError, DivergenceError, ShapeError, SplitError
from .fields import Grid2D, ScalarField2D
from .interface import RdfParams, alpha_to_rdf, binarize, rdf_to_alpha
from .metrics import MetricsReport, build_report
from .model import FnoModel, count_parameters, forward_array, loss_and_grad, relative_loss
from .optim import AdamWState, OptimConfig

logger = logging.getLogger(__name__)

# Samples per forward call during evaluation.
EVAL_CHUNK = 16


@dataclass(frozen=True)
class TrainConfig:
    """
    Training-loop settings.

    Args:
        epochs: Passes over the training partition.
        batch_size: Samples per optimizer step.
        split_fraction: Share of samples used for training.
        split_mode: TEMPORAL (first fraction by time) or RANDOM (seeded shuffle).
        seed: Seed for the split and per-epoch shuffles.
        optim: AdamW hyperparameters.
        loss_log_path: Optional per-epoch loss log destination.
        workers: Thread count for per-sample gradients; FNO_THREADS or CPU count when None.
    """

    epochs: int = DEFAULT_EPOCHS
    batch_size: int = DEFAULT_BATCH_SIZE
    split_fraction: float = DEFAULT_SPLIT_FRACTION
    split_mode: SplitMode = SplitMode.RANDOM
    seed: int = 0
    optim: OptimConfig = field(default_factory=OptimConfig)
    loss_log_path: Optional[Path] = None
    workers: Optional[int] = None

    def __post_init__(self) -> None:
        if self.epochs < 1:
            raise ConfigError(f"epochs must be at least 1, got {self.epochs}.")
        if self.batch_size < 1:
            raise ConfigError(f"batch_size must be at least 1, got {self.batch_size}.")
        if not 0.0 < self.split_fraction < 1.0:
            raise ConfigError(f"split_fraction must lie in (0, 1), got {self.split_fraction}.")
        if not isinstance(self.split_mode, SplitMode):
            raise ConfigError(f"split_mode must be a SplitMode, got {self.split_mode!r}.")


@dataclass
class TrainHistory:
    """Per-epoch losses and wall-clock seconds."""

    train_loss: List[float] = field(default_factory=list)
    val_loss: List[float] = field(default_factory=list)
    seconds: List[float] = field(default_factory=list)

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "epoch": list(range(1, len(self.train_loss) + 1)),
                "train_loss": self.train_loss,
                "val_loss": self.val_loss,
                "seconds": self.seconds,
            },
            schema={"epoch": pl.Int64, "train_loss": pl.Float64, "val_loss": pl.Float64, "seconds": pl.Float64},
        )


def write_loss_log(history: TrainHistory, path: Union[str, Path]) -> Path:
    """One line per epoch: `epoch train_loss val_loss seconds`."""
    path = Path(path)
    history.to_frame().write_csv(path, separator=" ", include_header=False)
    return path


def split_indices(dataset: Dataset, config: TrainConfig) -> Tuple[np.ndarray, np.ndarray]:
    """
    Disjoint, exhaustive (train, validation) index arrays.

    Raises:
        SplitError: When either partition would be empty.
    """

    n = dataset.n
    n_train = int(math.floor(n * config.split_fraction + 1e-9))
    if n < 2 or n_train < 1 or n_train >= n:
        raise SplitError(
            f"Splitting {n} samples at fraction {config.split_fraction} leaves an empty partition."
        )
    if config.split_mode == SplitMode.TEMPORAL:
        order = np.argsort(dataset.times, kind="stable")
        return order[:n_train], order[n_train:]
    order = np.random.default_rng(config.seed).permutation(n)
    return np.sort(order[:n_train]), np.sort(order[n_train:])


def split_dataset(dataset: Dataset, config: TrainConfig) -> Tuple[Dataset, Dataset]:
    """Split into (train, validation) datasets."""
    train_idx, val_idx = split_indices(dataset, config)
    return dataset.subset(train_idx), dataset.subset(val_idx)


def _check_grid(model: FnoModel, grid: Grid2D) -> None:
    min_h, min_w = model.config.min_grid
    if grid.height < min_h or grid.width < min_w:
        raise ShapeError(
            f"Dataset grid {grid.height}x{grid.width} is smaller than the {min_h}x{min_w} "
            f"required by modes ({model.config.k_x}, {model.config.k_y})."
        )


def train(
    model: FnoModel,
    dataset: Dataset,
    config: TrainConfig,
    state: Optional[AdamWState] = None,
) -> Tuple[FnoModel, TrainHistory]:
    """
    Minibatch AdamW training on the training partition of dataset.

    Every epoch reshuffles the training samples with a generator seeded once
    from config.seed; validation loss is computed after the epoch's last step.

    Args:
        model: Model to train (parameters updated in place).
        dataset: Full dataset; split with split_dataset(config).
        config: Loop settings.
        state: Optimizer state to resume from; advanced in place.

    Returns:
        Tuple (model, history).

    Raises:
        DivergenceError: When a batch loss is non-finite.
        ShapeError: When the dataset grid is too small for the model's modes.
    """

    _check_grid(model, dataset.grid)
    train_set, val_set = split_dataset(dataset, config)
    params = model.parameters()
    no_decay = model.no_decay()
    state = state or AdamWState.zeros_like(params)
    rng = np.random.default_rng(config.seed)
    steps_per_epoch = math.ceil(train_set.n / config.batch_size)
    total_steps = state.step + steps_per_epoch * config.epochs
    history = TrainHistory()
    logger.info(
        "Training on %d samples, validating on %d, for %d epochs (%d steps/epoch).",
        train_set.n,
        val_set.n,
        config.epochs,
        steps_per_epoch,
    )

    for epoch in range(1, config.epochs + 1):
        started = time.perf_counter()
        order = rng.permutation(train_set.n)
        weighted = 0.0
        for batch_index, start in enumerate(range(0, train_set.n, config.batch_size), start=1):
            idx = order[start : start + config.batch_size]
            loss, grads = loss_and_grad(model, train_set.inputs[idx], train_set.targets[idx], config.workers)
            if not math.isfinite(loss):
                raise DivergenceError(epoch, batch_index)
            lr = optim.lr_at(config.optim, state.step, total_steps)
            optim.step(params, grads.grads, state, config.optim, no_decay=no_decay, lr=lr)
            weighted += loss * len(idx)
            logger.debug("epoch %d batch %d loss %.6g lr %.3g", epoch, batch_index, loss, lr)
        val_loss = relative_loss(model, val_set.inputs, val_set.targets)
        if not math.isfinite(val_loss):
            raise DivergenceError(epoch, steps_per_epoch)
        history.train_loss.append(weighted / train_set.n)
        history.val_loss.append(val_loss)
        history.seconds.append(time.perf_counter() - started)
        logger.info(
            "epoch %d/%d train_loss=%.6g val_loss=%.6g (%.2fs)",
            epoch,
            config.epochs,
            history.train_loss[-1],
            val_loss,
            history.seconds[-1],
        )

    if config.loss_log_path is not None:
        write_loss_log(history, config.loss_log_path)
    return model, history


def predict_dataset(model: FnoModel, dataset: Dataset) -> np.ndarray:
    """Model outputs [n, c_out, H, W] for every sample."""
    _check_grid(model, dataset.grid)
    chunks = [
        forward_array(model, dataset.inputs[start : start + EVAL_CHUNK])
        for start in range(0, dataset.n, EVAL_CHUNK)
    ]
    return np.concatenate(chunks).astype(np.float64)


def to_interface_space(zeta: np.ndarray, params: RdfParams) -> np.ndarray:
    """Binary liquid indicator through rdf_to_alpha, alpha_to_rdf and binarize."""
    frames = zeta.reshape(-1, *zeta.shape[-2:])
    grid = Grid2D(*frames.shape[-2:])
    out = np.empty_like(frames)
    for index, values in enumerate(frames):
        alpha = rdf_to_alpha(ScalarField2D(grid, values), params)
        out[index] = binarize(alpha_to_rdf(alpha, params)).values
    return out.reshape(zeta.shape)


def evaluate(
    model: FnoModel,
    dataset: Dataset,
    space: MetricSpace = MetricSpace.RDF,
    params: Optional[RdfParams] = None,
) -> MetricsReport:
    """
    Metrics of model predictions against dataset targets.

    Args:
        model: Trained model (not modified).
        dataset: Non-empty evaluation set.
        space: RDF compares ζ directly; ALPHA compares binarized volume fractions.
        params: RDF parameters for the ALPHA space; defaults to the dataset's epsilon.

    Raises:
        ShapeError: On an empty dataset.
    """

    if dataset.n == 0:
        raise ShapeError("Cannot evaluate an empty dataset.")
    pred = predict_dataset(model, dataset)
    truth = dataset.targets
    if space == MetricSpace.ALPHA:
        params = params or RdfParams(epsilon=dataset.epsilon)
        pred, truth = to_interface_space(pred, params), to_interface_space(truth, params)
    return build_report(pred, truth, dataset.times, space.value)


def mean_evolution(model: FnoModel, dataset: Dataset) -> pl.DataFrame:
    """Per-sample time, predicted spatial mean of ζ and true spatial mean of ζ."""
    pred = predict_dataset(model, dataset)
    return pl.DataFrame(
        {
            "time": dataset.times,
            "predicted_mean": pred.mean(axis=(1, 2, 3)),
            "true_mean": dataset.targets.mean(axis=(1, 2, 3)),
        }
    ).sort("time", maintain_order=True)


@dataclass(frozen=True)
class BenchResult:
    """Forward latency statistics in milliseconds."""

    timings_ms: Tuple[float, ...]
    n_params: int
    grid: Tuple[int, int]

    @property
    def min_ms(self) -> float:
        return float(np.min(self.timings_ms))

    @property
    def median_ms(self) -> float:
        return float(np.median(self.timings_ms))

    @property
    def p95_ms(self) -> float:
        return float(np.percentile(self.timings_ms, 95))


def bench_inference(
    model: FnoModel, grid: Grid2D, iters: int = 50, warmup: int = 3, seed: int = 0
) -> BenchResult:
    """
    Time forward passes on a single random sample.

    Args:
        model: Model to time, in its own precision.
        grid: Evaluation grid.
        iters: Timed calls (at least 10).
        warmup: Untimed calls before timing.
        seed: Seed for the random input.

    Raises:
        ConfigError: When iters < 10.
    """

    if iters < 10:
        raise ConfigError(f"Benchmark needs at least 10 iterations, got {iters}.")
    _check_grid(model, grid)
    x = np.random.default_rng(seed).standard_normal((1, model.config.c_in) + grid.shape)
    x = x.astype(model.lift_weight.dtype)
    for _ in range(warmup):
        forward_array(model, x)
    timings = []
    for _ in range(iters):
        started = time.perf_counter()
        forward_array(model, x)
        timings.append((time.perf_counter() - started) * 1000.0)
    result = BenchResult(tuple(timings), count_parameters(model), grid.shape)
    logger.info(
        "Inference on %dx%d: min %.2f ms, median %.2f ms, p95 %.2f ms (%d parameters).",
        grid.height,
        grid.width,
        result.min_ms,
        result.median_ms,
        result.p95_ms,
        result.n_params,
    )
    return result
