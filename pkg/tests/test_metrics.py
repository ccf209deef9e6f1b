"""
Unit tests for the validation metrics and report writers.
"""

from __future__ import annotations

import math

import numpy as np
import polars as pl
import pytest
from openpyxl import load_workbook

from interface_fno.errors import DegenerateNormError, DegenerateVarianceError, ShapeError
from interface_fno.fields import Grid2D, ScalarField2D
from interface_fno.metrics import (
    METRIC_NAMES,
    build_report,
    error_map,
    format_report,
    l2_error,
    mae,
    mse,
    r2,
    relative_error,
    write_report,
    write_report_xlsx,
)


@pytest.fixture
def truth() -> np.ndarray:
    return np.random.default_rng(21).standard_normal((6, 5))


def test_identical_fields(truth) -> None:
    assert mse(truth, truth) == 0.0
    assert mae(truth, truth) == 0.0
    assert r2(truth, truth) == 1.0
    assert l2_error(truth, truth) == 0.0
    assert relative_error(truth, truth) == 0.0


def test_constant_offset(truth) -> None:
    assert mse(truth + 2.0, truth) == pytest.approx(4.0)
    assert mae(truth + 2.0, truth) == pytest.approx(2.0)
    assert l2_error(truth + 2.0, truth) == pytest.approx(2.0 * math.sqrt(truth.size))


def test_alternating_offset_mae() -> None:
    truth = np.zeros((4, 4))
    signs = np.where((np.add.outer(np.arange(4), np.arange(4)) % 2) == 0, 1.0, -1.0)
    assert mae(truth + signs, truth) == 1.0


def test_r2_examples(truth) -> None:
    assert r2(np.array([2.0, 2.0, 2.0]), np.array([1.0, 2.0, 3.0])) == pytest.approx(0.0)
    assert r2(np.full_like(truth, truth.mean()), truth) == pytest.approx(0.0, abs=1e-12)
    with pytest.raises(DegenerateVarianceError):
        r2(truth, np.ones_like(truth))


def test_l2_single_cell() -> None:
    pred = np.zeros((3, 3))
    pred[1, 2] = 3.0
    assert l2_error(pred, np.zeros((3, 3))) == 3.0


def test_relative_error_examples(truth) -> None:
    assert relative_error(np.zeros_like(truth), truth) == pytest.approx(1.0)
    assert relative_error(2.0 * truth, truth) == pytest.approx(1.0)
    with pytest.raises(DegenerateNormError):
        relative_error(truth, np.zeros_like(truth))


def test_metric_identities(truth) -> None:
    pred = truth + np.random.default_rng(3).normal(0.0, 0.1, truth.shape)
    assert mse(pred, truth) == pytest.approx(l2_error(pred, truth) ** 2 / truth.size, rel=1e-12)
    perm = np.random.default_rng(4).permutation(truth.size)
    shuffled_pred, shuffled_truth = pred.ravel()[perm], truth.ravel()[perm]
    for metric in (mse, mae, r2, l2_error, relative_error):
        assert metric(shuffled_pred, shuffled_truth) == pytest.approx(metric(pred, truth), rel=1e-12)
    assert relative_error(-3.0 * pred, -3.0 * truth) == pytest.approx(relative_error(pred, truth), rel=1e-12)


def test_shape_mismatch_and_fields(truth) -> None:
    with pytest.raises(ShapeError):
        mse(truth, truth[:, :4])
    grid = Grid2D(6, 5)
    errors = error_map(ScalarField2D(grid, truth + 1.5), ScalarField2D(grid, truth))
    assert np.allclose(errors.values, 1.5)
    assert mse(ScalarField2D(grid, truth), ScalarField2D(grid, truth)) == 0.0


def test_report_groups_by_time() -> None:
    rng = np.random.default_rng(8)
    truth = rng.standard_normal((4, 1, 6, 6))
    pred = truth.copy()
    pred[2:] *= 1.5
    times = np.array([0.5, 0.25, 0.5, 0.25])
    report = build_report(pred, truth, times, "rdf")
    assert report.n_samples == 4
    assert [row.time for row in report.per_time] == [0.25, 0.5]
    assert [row.count for row in report.per_time] == [2, 2]
    assert report.mean_relative_error == pytest.approx(np.mean([r.relative_error for r in report.per_time]))
    frame = report.per_time_frame()
    assert frame.columns == ["time", "count", *METRIC_NAMES]
    assert frame.get_column("count").to_list() == [2, 2]
    assert frame.schema["time"] == pl.Float64


def test_text_report(tmp_path) -> None:
    truth = np.random.default_rng(2).standard_normal((2, 1, 4, 4))
    report = build_report(truth * 0.9, truth, np.array([0.0, 1.0]), "alpha")
    text = format_report(report)
    assert text.startswith("space = alpha\nn_samples = 2\n")
    assert f"mse = {report.mse!r}" in text
    assert "per_time.1.time = 1.0" in text
    path = write_report(report, tmp_path / "report.txt")
    assert path.read_text(encoding="utf-8") == text


def test_xlsx_report(tmp_path) -> None:
    truth = np.random.default_rng(2).standard_normal((3, 1, 4, 4))
    report = build_report(truth + 0.1, truth, np.array([0.0, 0.0, 1.0]), "rdf")
    path = write_report_xlsx(report, tmp_path / "report.xlsx")
    workbook = load_workbook(path)
    summary = {row[0]: row[1] for row in workbook["summary"].iter_rows(min_row=2, values_only=True)}
    assert summary["space"] == "rdf"
    assert summary["mse"] == pytest.approx(report.mse)
    rows = list(workbook["per_time"].iter_rows(values_only=True))
    assert rows[0] == ("time", "count", *METRIC_NAMES)
    assert len(rows) == 3
    assert rows[1][1] == 2
