"""
Desk-scale reproductions of the two learning experiments and the timing checks.

Deselected by default; run with `pytest -m slow`.
"""

from __future__ import annotations

import time

import numpy as np
import pytest

from interface_fno.cli import FORECAST_COLUMN, FORECAST_FLOW, FORECAST_FRAMES, FORECAST_T_FINAL, parse_flow
from interface_fno.constants import MetricSpace, SplitMode
from interface_fno.datagen import (
    InitSpec,
    SimConfig,
    build_forecast_dataset,
    build_pairs_dataset,
    generate_blob_simulations,
    plan_time_steps,
    simulate,
)
from interface_fno.fields import FieldBatch, Grid2D
from interface_fno.model import FnoConfig, init_model, layer_forward
from interface_fno.optim import OptimConfig
from interface_fno.pipeline import TrainConfig, bench_inference, evaluate, split_dataset, train

pytestmark = pytest.mark.slow

REDUCED = FnoConfig(d_v=32, k_x=12, k_y=12, n_layers=4)


def _unit(size: int) -> Grid2D:
    return Grid2D(size, size, dx=1.0 / size, dy=1.0 / size)


def _smoothed(values, window: int = 10) -> np.ndarray:
    return np.convolve(values, np.ones(window) / window, mode="valid")


def test_random_blob_pairs() -> None:
    grid = _unit(64)
    simulations = generate_blob_simulations(200, grid, (0.0, 0.25, 0.5), seed=7)
    dataset = build_pairs_dataset(simulations, epsilon=1.0)
    assert dataset.n == 400
    config = TrainConfig(
        epochs=50,
        batch_size=32,
        split_fraction=0.9,
        split_mode=SplitMode.RANDOM,
        seed=7,
        optim=OptimConfig(lr=5e-4, weight_decay=1e-4),
    )
    model, history = train(init_model(REDUCED, seed=7), dataset, config)
    _, validation = split_dataset(dataset, config)
    report = evaluate(model, validation, MetricSpace.RDF)
    assert report.r2 >= 0.90
    assert report.relative_error <= 0.15
    trend = _smoothed(history.train_loss)
    assert np.all(np.diff(trend) <= 0.02 * trend[:-1])


def test_column_forecast_extrapolates_in_time() -> None:
    grid = _unit(64)
    flow = parse_flow(FORECAST_FLOW, grid)
    snapshots = tuple(np.linspace(0.0, FORECAST_T_FINAL, FORECAST_FRAMES))
    dt, n_steps = plan_time_steps(flow, grid, FORECAST_T_FINAL, snapshots)
    frames = simulate(InitSpec.column(*FORECAST_COLUMN), flow, SimConfig(grid, dt, n_steps, snapshots))
    dataset = build_forecast_dataset(frames, epsilon=1.0)
    config = TrainConfig(
        epochs=200,
        batch_size=32,
        split_fraction=0.6,
        split_mode=SplitMode.TEMPORAL,
        seed=1,
        optim=OptimConfig(lr=5e-4, weight_decay=1e-4),
    )
    model, _ = train(init_model(REDUCED, seed=1), dataset, config)
    train_set, held_out = split_dataset(dataset, config)
    assert train_set.times.max() < held_out.times.min()
    report = evaluate(model, held_out, MetricSpace.RDF)
    assert report.mean_relative_error <= 0.20
    assert report.r2 >= 0.85


def test_full_size_inference_latency(monkeypatch) -> None:
    monkeypatch.setenv("FNO_THREADS", "1")
    model = init_model(FnoConfig(), seed=0)
    result = bench_inference(model, Grid2D(84, 84), iters=10, warmup=2)
    print(f"median forward latency at 84x84: {result.median_ms:.2f} ms")
    assert result.median_ms <= 100.0


def test_layer_cost_grows_near_linearly_with_cells() -> None:
    layer = init_model(REDUCED, seed=0).layers[0]

    def median_seconds(size: int) -> float:
        v = FieldBatch(Grid2D(size, size), np.random.default_rng(size).standard_normal((1, REDUCED.d_v, size, size)))
        layer_forward(layer, v)
        timings = []
        for _ in range(15):
            started = time.perf_counter()
            layer_forward(layer, v)
            timings.append(time.perf_counter() - started)
        return float(np.median(timings))

    assert median_seconds(128) / median_seconds(64) <= 4.8
