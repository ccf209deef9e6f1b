"""
End-to-end tests of the interface-fno command line.
"""

from __future__ import annotations

import json
import struct

import numpy as np
import pytest

from interface_fno import __version__
from interface_fno.checkpoint import load_model, save_model
from interface_fno.cli import (
    EXIT_DATA,
    EXIT_NUMERICAL,
    EXIT_OK,
    EXIT_USAGE,
    UsageError,
    main,
    manifest_path,
    parse_flow,
)
from interface_fno.constants import FlowKind
from interface_fno.datagen import Dataset
from interface_fno.dataset_io import parse_grid_text, read_dataset, read_field_text, write_dataset
from interface_fno.fields import Grid2D
from interface_fno.model import FnoConfig, init_model

TRAIN_FLAGS = ["--epochs", "2", "--batch", "4", "--split", "0.75", "--modes", "3", "3", "--width", "4", "--layers", "2"]


@pytest.fixture(scope="module")
def workdir(tmp_path_factory):
    root = tmp_path_factory.mktemp("cli")
    data = root / "blobs.fnds"
    assert main(["-q", "gen", "--grid", "16", "16", "--n", "4", "--seed", "3", "--out", str(data)]) == EXIT_OK
    model = root / "model.fnck"
    log = root / "loss.txt"
    assert main(["-q", "train", "--data", str(data), *TRAIN_FLAGS, "--out", str(model), "--log", str(log)]) == EXIT_OK
    return root


def test_gen_writes_dataset_and_manifest(workdir) -> None:
    data = workdir / "blobs.fnds"
    dataset = read_dataset(data)
    assert dataset.n == 8
    assert dataset.grid.shape == (16, 16)
    manifest = json.loads(manifest_path(data).read_text(encoding="utf-8"))
    assert manifest["command"] == "gen"
    assert manifest["seeds"] == {"seed": 3}
    assert manifest["version"] == __version__
    assert manifest["flags"]["grid"] == [16, 16]
    assert str(data) in manifest["checksums"]


def test_gen_is_reproducible(tmp_path) -> None:
    first, second = tmp_path / "a.fnds", tmp_path / "b.fnds"
    for out in (first, second):
        assert main(["-q", "gen", "--grid", "16", "16", "--n", "2", "--seed", "8", "--out", str(out)]) == EXIT_OK
    assert first.read_bytes() == second.read_bytes()


def test_full_run_is_bit_identical(tmp_path) -> None:
    artifacts = []
    for run in ("a", "b"):
        folder = tmp_path / run
        folder.mkdir()
        data, model, report = folder / "d.fnds", folder / "m.fnck", folder / "r.txt"
        assert main(["-q", "gen", "--grid", "16", "16", "--n", "3", "--seed", "4", "--out", str(data)]) == EXIT_OK
        assert main(["-q", "train", "--data", str(data), *TRAIN_FLAGS, "--seed", "4", "--out", str(model)]) == EXIT_OK
        assert main(["-q", "eval", "--model", str(model), "--data", str(data), "--report", str(report)]) == EXIT_OK
        artifacts.append([path.read_bytes() for path in (data, model, report)])
    assert artifacts[0] == artifacts[1]


def test_gen_forecast_case(tmp_path) -> None:
    out = tmp_path / "forecast.fnds"
    code = main(["-q", "gen", "--case", "forecast", "--grid", "16", "16", "--n", "5", "--out", str(out)])
    assert code == EXIT_OK
    dataset = read_dataset(out)
    assert dataset.n == 5
    assert dataset.times.tolist() == pytest.approx([0.0, 0.25, 0.5, 0.75, 1.0])
    assert np.array_equal(dataset.inputs[0, 0], dataset.targets[0, 0])


def test_train_writes_checkpoint_log_and_manifest(workdir) -> None:
    model = load_model(workdir / "model.fnck")
    assert model.config == FnoConfig(d_v=4, k_x=3, k_y=3, n_layers=2)
    lines = (workdir / "loss.txt").read_text(encoding="utf-8").splitlines()
    assert len(lines) == 2
    assert len(lines[1].split()) == 4
    manifest = json.loads(manifest_path(workdir / "model.fnck").read_text(encoding="utf-8"))
    assert manifest["command"] == "train"
    assert str(workdir / "blobs.fnds") in manifest["inputs"]


def test_train_resume(workdir, tmp_path) -> None:
    out = tmp_path / "resumed.fnck"
    args = ["-q", "train", "--data", str(workdir / "blobs.fnds"), "--epochs", "1", "--batch", "4"]
    code = main(args + ["--split", "0.75", "--resume", str(workdir / "model.fnck"), "--out", str(out)])
    assert code == EXIT_OK
    assert load_model(out).config == load_model(workdir / "model.fnck").config


def test_eval_prints_report(workdir, capsys) -> None:
    code = main(["-q", "eval", "--model", str(workdir / "model.fnck"), "--data", str(workdir / "blobs.fnds")])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("space = rdf\nn_samples = 8\n")
    for name in ("mse", "mae", "r2", "l2_error", "relative_error"):
        assert f"\n{name} = " in out


def test_eval_alpha_split_report(workdir, tmp_path) -> None:
    report = tmp_path / "report.txt"
    code = main(
        [
            "-q",
            "eval",
            "--model",
            str(workdir / "model.fnck"),
            "--data",
            str(workdir / "blobs.fnds"),
            "--space",
            "alpha",
            "--split",
            "0.75",
            "--report",
            str(report),
        ]
    )
    assert code == EXIT_OK
    text = report.read_text(encoding="utf-8")
    assert "space = alpha" in text
    assert "n_samples = 2" in text
    assert manifest_path(report).is_file()


def test_predict_writes_grid(workdir, tmp_path) -> None:
    source = tmp_path / "alpha.txt"
    alpha = np.zeros((16, 16))
    alpha[4:10, 5:11] = 1.0
    source.write_text("16 16\n" + "\n".join(" ".join(map(str, row)) for row in alpha) + "\n", encoding="utf-8")
    out = tmp_path / "pred.txt"
    args = ["-q", "predict", "--model", str(workdir / "model.fnck"), "--input", str(source), "--t", "0.25"]
    assert main(args + ["--out", str(out)]) == EXIT_OK
    assert read_field_text(out).grid.shape == (16, 16)
    alpha_out = tmp_path / "pred_alpha.txt"
    assert main(args + ["--output-space", "alpha", "--out", str(alpha_out)]) == EXIT_OK
    values = parse_grid_text(alpha_out.read_text(encoding="utf-8"))
    assert np.all((values >= 0.0) & (values <= 1.0))


def test_bench(workdir, capsys) -> None:
    code = main(["-q", "bench", "--model", str(workdir / "model.fnck"), "--grid", "16", "16", "--iters", "10"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert "grid=16x16" in out
    assert "median_ms=" in out


def test_bench_float32(workdir, capsys) -> None:
    args = ["-q", "bench", "--model", str(workdir / "model.fnck"), "--grid", "24", "24", "--iters", "10"]
    assert main(args + ["--warmup", "1", "--float32"]) == EXIT_OK
    assert "p95_ms=" in capsys.readouterr().out


def test_usage_errors(tmp_path) -> None:
    assert main([]) == EXIT_USAGE
    assert main(["gen", "--bogus"]) == EXIT_USAGE
    assert main(["gen", "--flow", "spin:1", "--out", str(tmp_path / "x.fnds")]) == EXIT_USAGE
    assert main(["gen", "--snapshots", "0", "0.5", "--out", str(tmp_path / "x.fnds")]) == EXIT_USAGE
    assert main(["bench", "--grid", "24", "24", "--iters", "5"]) == EXIT_USAGE


def test_config_error_is_usage(workdir, tmp_path) -> None:
    args = ["train", "--data", str(workdir / "blobs.fnds"), "--split", "1.5", "--out", str(tmp_path / "m.fnck")]
    assert main(args) == EXIT_USAGE


def test_version(capsys) -> None:
    assert main(["--version"]) == EXIT_OK
    assert __version__ in capsys.readouterr().out


def test_data_errors(workdir, tmp_path) -> None:
    missing = tmp_path / "missing.fnds"
    assert main(["eval", "--model", str(workdir / "model.fnck"), "--data", str(missing)]) == EXIT_DATA
    garbage = tmp_path / "garbage.fnds"
    garbage.write_bytes(b"not a dataset")
    assert main(["eval", "--model", str(workdir / "model.fnck"), "--data", str(garbage)]) == EXIT_DATA
    bad_alpha = tmp_path / "bad.txt"
    bad_alpha.write_text("2 2\n0.5 0.5\n0.5 7\n", encoding="utf-8")
    args = ["predict", "--model", str(workdir / "model.fnck"), "--input", str(bad_alpha), "--t", "0"]
    assert main(args + ["--out", str(tmp_path / "o.txt")]) == EXIT_DATA
    empty = tmp_path / "empty.fnds"
    empty.write_bytes(struct.pack("<4sIQIIIId", b"FNDS", 1, 0, 2, 1, 16, 16, 1.0) + struct.pack("<I", 0))
    assert main(["train", "--data", str(empty), "--out", str(tmp_path / "e.fnck")]) == EXIT_DATA


def test_numerical_failure_exit_code(tmp_path) -> None:
    grid = Grid2D(8, 8)
    inputs = np.zeros((2, 2, 8, 8))
    inputs[1, 1] = 1.0
    data = write_dataset(Dataset(grid, inputs, np.zeros((2, 1, 8, 8))), tmp_path / "flat.fnds")
    model = save_model(init_model(FnoConfig(d_v=2, k_x=2, k_y=2, n_layers=1)), tmp_path / "m.fnck")
    assert main(["eval", "--model", str(model), "--data", str(data)]) == EXIT_NUMERICAL


def test_parse_flow() -> None:
    grid = Grid2D(16, 16, dx=1 / 16, dy=1 / 16)
    assert parse_flow("mixed", grid) is None
    flow = parse_flow("rotation:6.283:0.5:0.5", grid)
    assert flow.kind == FlowKind.RIGID_ROTATION
    assert flow.center == (0.5, 0.5)
    assert parse_flow("fall:0.2", grid).kind == FlowKind.UNIFORM_FALL
    with pytest.raises(UsageError):
        parse_flow("vortex:abc", grid)
    with pytest.raises(UsageError):
        parse_flow("fall:1:2", grid)
