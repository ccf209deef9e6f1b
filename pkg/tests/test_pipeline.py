"""
Unit tests for splitting, training, evaluation and benchmarking.
"""

from __future__ import annotations

import hashlib

import numpy as np
import pytest

from interface_fno import pipeline
from interface_fno.constants import LrSchedule, MetricSpace, SplitMode
from interface_fno.datagen import Dataset
from interface_fno.errors import ConfigError, DivergenceError, ShapeError, SplitError
from interface_fno.fields import Grid2D
from interface_fno.interface import RdfParams
from interface_fno.model import FnoConfig, GradientStore, init_model
from interface_fno.optim import AdamWState, OptimConfig
from interface_fno.pipeline import (
    EVAL_CHUNK,
    TrainConfig,
    bench_inference,
    evaluate,
    mean_evolution,
    predict_dataset,
    split_dataset,
    split_indices,
    to_interface_space,
    train,
)


TINY = FnoConfig(c_in=2, c_out=1, d_v=6, k_x=3, k_y=3, n_layers=2, use_norm=False)


def _dataset(n: int = 10, size: int = 12, seed: int = 0, shuffle_times: bool = False) -> Dataset:
    rng = np.random.default_rng(seed)
    i = np.arange(size)[:, np.newaxis] / size
    j = np.arange(size)[np.newaxis, :] / size
    times = np.linspace(0.0, 1.0, n)
    if shuffle_times:
        times = rng.permutation(times)
    inputs = np.empty((n, 2, size, size))
    targets = np.empty((n, 1, size, size))
    for k in range(n):
        a, b, c = rng.uniform(-1.0, 1.0, 3)
        zeta0 = a * np.cos(2 * np.pi * i) + b * np.sin(2 * np.pi * j) + c * np.cos(2 * np.pi * (i + j))
        inputs[k, 0] = zeta0
        inputs[k, 1] = times[k]
        targets[k, 0] = 0.8 * zeta0 + 0.5 * times[k] + 0.3
    return Dataset(Grid2D(size, size), inputs, targets, epsilon=1.0, provenance="synthetic")


def _fingerprint(model) -> str:
    digest = hashlib.sha256()
    for _, array in model.named_parameters():
        digest.update(np.ascontiguousarray(array).tobytes())
    return digest.hexdigest()


def test_train_config_validation() -> None:
    with pytest.raises(ConfigError):
        TrainConfig(split_fraction=1.0)
    with pytest.raises(ConfigError):
        TrainConfig(batch_size=0)
    with pytest.raises(ConfigError):
        TrainConfig(epochs=0)


def test_random_split_sizes() -> None:
    train_idx, val_idx = split_indices(_dataset(n=10), TrainConfig(split_fraction=0.9, seed=3))
    assert (len(train_idx), len(val_idx)) == (9, 1)
    assert sorted(np.concatenate([train_idx, val_idx]).tolist()) == list(range(10))


def test_temporal_split_orders_by_time() -> None:
    dataset = _dataset(n=50, shuffle_times=True)
    train_set, val_set = split_dataset(dataset, TrainConfig(split_fraction=0.6, split_mode=SplitMode.TEMPORAL))
    assert (train_set.n, val_set.n) == (30, 20)
    assert train_set.times.max() <= val_set.times.min()


def test_split_is_seeded() -> None:
    dataset = _dataset(n=20)
    first = split_indices(dataset, TrainConfig(split_fraction=0.5, seed=9))
    second = split_indices(dataset, TrainConfig(split_fraction=0.5, seed=9))
    other = split_indices(dataset, TrainConfig(split_fraction=0.5, seed=10))
    assert np.array_equal(first[0], second[0]) and np.array_equal(first[1], second[1])
    assert not np.array_equal(first[0], other[0])


def test_empty_partition_is_an_error() -> None:
    with pytest.raises(SplitError):
        split_indices(_dataset(n=2), TrainConfig(split_fraction=0.3))
    with pytest.raises(SplitError):
        split_indices(_dataset(n=4), TrainConfig(split_fraction=0.1))


def test_single_epoch_full_batch_is_one_step(tmp_path) -> None:
    model = init_model(TINY, seed=0)
    state = AdamWState.zeros_like(model.parameters())
    log = tmp_path / "loss.txt"
    config = TrainConfig(epochs=1, batch_size=64, split_fraction=0.8, loss_log_path=log, workers=1)
    _, history = train(model, _dataset(), config, state=state)
    assert state.step == 1
    assert len(history.train_loss) == len(history.val_loss) == len(history.seconds) == 1
    fields = log.read_text(encoding="utf-8").split()
    assert len(fields) == 4
    assert fields[0] == "1"
    assert float(fields[1]) == pytest.approx(history.train_loss[0])


def test_resumed_state_keeps_counting() -> None:
    model = init_model(TINY, seed=0)
    state = AdamWState.zeros_like(model.parameters())
    config = TrainConfig(epochs=2, batch_size=3, split_fraction=0.8, workers=1)
    train(model, _dataset(), config, state=state)
    assert state.step == 6
    train(model, _dataset(), config, state=state)
    assert state.step == 12


def test_training_is_deterministic() -> None:
    config = TrainConfig(
        epochs=3,
        batch_size=4,
        split_fraction=0.8,
        seed=5,
        optim=OptimConfig(lr=1e-2, schedule=LrSchedule.COSINE),
        workers=2,
    )
    first, history_a = train(init_model(TINY, seed=1), _dataset(), config)
    second, history_b = train(init_model(TINY, seed=1), _dataset(), config)
    assert history_a.train_loss == history_b.train_loss
    assert history_a.val_loss == history_b.val_loss
    assert _fingerprint(first) == _fingerprint(second)


def test_divergence_reports_epoch_and_batch(monkeypatch) -> None:
    model = init_model(TINY, seed=0)

    def exploding(model, batch, targets, workers=None):
        return float("nan"), GradientStore.zeros_like(model)

    monkeypatch.setattr(pipeline, "loss_and_grad", exploding)
    with pytest.raises(DivergenceError) as excinfo:
        train(model, _dataset(), TrainConfig(epochs=2, batch_size=2, split_fraction=0.8))
    assert (excinfo.value.epoch, excinfo.value.batch) == (1, 1)


def test_grid_too_small_for_modes() -> None:
    model = init_model(FnoConfig(k_x=4, k_y=4, d_v=4, n_layers=1), seed=0)
    with pytest.raises(ShapeError):
        train(model, _dataset(size=6), TrainConfig(epochs=1, split_fraction=0.5))


def test_memorizes_five_samples() -> None:
    dataset = _dataset(n=6, size=12, seed=4)
    model = init_model(TINY, seed=2)
    config = TrainConfig(
        epochs=500, batch_size=5, split_fraction=0.84, optim=OptimConfig(lr=1e-2, weight_decay=0.0), workers=1
    )
    _, history = train(model, dataset, config)
    assert history.train_loss[-1] < 1e-2
    assert history.train_loss[-1] < history.train_loss[0]


def test_evaluate_does_not_touch_parameters() -> None:
    model = init_model(TINY, seed=3)
    before = _fingerprint(model)
    report = evaluate(model, _dataset())
    assert _fingerprint(model) == before
    assert report.n_samples == 10
    for name in ("mse", "mae", "r2", "l2_error", "relative_error"):
        assert np.isfinite(getattr(report, name))


def test_perfect_predictions_score_zero_in_both_spaces(monkeypatch) -> None:
    dataset = _dataset(n=5)
    signed = Dataset(dataset.grid, dataset.inputs, dataset.inputs[:, :1] - 0.1, dataset.epsilon)
    monkeypatch.setattr(pipeline, "predict_dataset", lambda model, data: data.targets.copy())
    model = init_model(TINY, seed=3)
    assert evaluate(model, signed, MetricSpace.RDF).mse == 0.0
    alpha = evaluate(model, signed, MetricSpace.ALPHA)
    assert alpha.space == "alpha"
    assert alpha.mse == 0.0
    assert alpha.r2 == 1.0


def test_predictions_cover_every_sample() -> None:
    dataset = _dataset(n=EVAL_CHUNK + 3)
    pred = predict_dataset(init_model(TINY, seed=3), dataset)
    assert pred.shape == dataset.targets.shape
    assert pred.dtype == np.float64


def test_evaluate_empty_dataset() -> None:
    empty = Dataset(Grid2D(12, 12), np.zeros((0, 2, 12, 12)), np.zeros((0, 1, 12, 12)))
    with pytest.raises(ShapeError):
        evaluate(init_model(TINY), empty)


def test_interface_space_is_binary() -> None:
    zeta = np.linspace(-3.0, 3.0, 2 * 12 * 12).reshape(2, 1, 12, 12)
    indicator = to_interface_space(zeta, RdfParams(epsilon=1.0))
    assert set(np.unique(indicator)) <= {0.0, 1.0}
    assert np.array_equal(indicator, (zeta < 0).astype(float))


def test_mean_evolution_is_sorted_by_time() -> None:
    dataset = _dataset(n=8, shuffle_times=True)
    frame = mean_evolution(init_model(TINY, seed=0), dataset)
    assert frame.columns == ["time", "predicted_mean", "true_mean"]
    times = frame.get_column("time").to_list()
    assert times == sorted(times)
    assert frame.height == 8


def test_bench_records_requested_iterations() -> None:
    model = init_model(TINY, seed=0)
    result = bench_inference(model, Grid2D(16, 16), iters=10, warmup=2)
    assert len(result.timings_ms) == 10
    assert result.grid == (16, 16)
    assert result.min_ms <= result.median_ms <= result.p95_ms
    assert result.n_params > 0
    with pytest.raises(ConfigError):
        bench_inference(model, Grid2D(16, 16), iters=9)
