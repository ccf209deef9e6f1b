"""
Validation metrics: MSE, MAE, R², L2 error and relative error.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Tuple, Union

import numpy as np
import polars as pl
from openpyxl import Workbook

from .errors import DegenerateNormError, DegenerateVarianceError, ShapeError
from .fields import ScalarField2D

logger = logging.getLogger(__name__)

FieldLike = Union[np.ndarray, ScalarField2D]
METRIC_NAMES = ("mse", "mae", "r2", "l2_error", "relative_error")


def _pair(pred: FieldLike, truth: FieldLike) -> Tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred.values if isinstance(pred, ScalarField2D) else pred, dtype=np.float64)
    t = np.asarray(truth.values if isinstance(truth, ScalarField2D) else truth, dtype=np.float64)
    if p.shape != t.shape:
        raise ShapeError(f"Prediction shape {p.shape} does not match truth shape {t.shape}.")
    if p.size == 0:
        raise ShapeError("Metrics need at least one value.")
    return p, t


def mse(pred: FieldLike, truth: FieldLike) -> float:
    """Mean squared difference."""
    p, t = _pair(pred, truth)
    return float(np.mean((p - t) ** 2))


def mae(pred: FieldLike, truth: FieldLike) -> float:
    """Mean absolute difference."""
    p, t = _pair(pred, truth)
    return float(np.mean(np.abs(p - t)))


def r2(pred: FieldLike, truth: FieldLike) -> float:
    """
    Coefficient of determination about the mean of truth.

    Raises:
        DegenerateVarianceError: When truth is constant.
    """

    p, t = _pair(pred, truth)
    ss_tot = float(np.sum((t - t.mean()) ** 2))
    if ss_tot == 0.0:
        raise DegenerateVarianceError("Truth field has zero variance; R² is undefined.")
    return 1.0 - float(np.sum((p - t) ** 2)) / ss_tot


def l2_error(pred: FieldLike, truth: FieldLike) -> float:
    """Euclidean norm of the pointwise difference."""
    p, t = _pair(pred, truth)
    return float(np.sqrt(np.sum((p - t) ** 2)))


def relative_error(pred: FieldLike, truth: FieldLike) -> float:
    """
    ‖pred − truth‖₂ / ‖truth‖₂.

    Raises:
        DegenerateNormError: When truth is identically zero.
    """

    p, t = _pair(pred, truth)
    norm = float(np.sqrt(np.sum(t**2)))
    if norm == 0.0:
        raise DegenerateNormError("Truth field has zero norm; relative error is undefined.")
    return float(np.sqrt(np.sum((p - t) ** 2))) / norm


def error_map(pred: ScalarField2D, truth: ScalarField2D) -> ScalarField2D:
    """Pointwise absolute error."""
    p, t = _pair(pred, truth)
    return ScalarField2D(truth.grid, np.abs(p - t))


@dataclass(frozen=True)
class TimeMetrics:
    """The five metrics for all samples sharing one time value."""

    time: float
    count: int
    mse: float
    mae: float
    r2: float
    l2_error: float
    relative_error: float


@dataclass(frozen=True)
class MetricsReport:
    """
    Aggregate metrics over an evaluation set, optionally per time value.
    """

    space: str
    n_samples: int
    mse: float
    mae: float
    r2: float
    l2_error: float
    relative_error: float
    per_time: List[TimeMetrics] = field(default_factory=list)

    @property
    def mean_relative_error(self) -> float:
        """Relative error averaged over time groups (equals relative_error without groups)."""
        if not self.per_time:
            return self.relative_error
        return float(np.mean([row.relative_error for row in self.per_time]))

    def per_time_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            [
                {
                    "time": row.time,
                    "count": row.count,
                    **{name: getattr(row, name) for name in METRIC_NAMES},
                }
                for row in self.per_time
            ],
            schema={"time": pl.Float64, "count": pl.Int64, **{name: pl.Float64 for name in METRIC_NAMES}},
        )


def compute_metrics(pred: np.ndarray, truth: np.ndarray) -> Tuple[float, float, float, float, float]:
    """All five metrics in METRIC_NAMES order."""
    return (mse(pred, truth), mae(pred, truth), r2(pred, truth), l2_error(pred, truth), relative_error(pred, truth))


def build_report(pred: np.ndarray, truth: np.ndarray, times: np.ndarray, space: str) -> MetricsReport:
    """
    Pool metrics over every sample and again per distinct time value.

    Args:
        pred: Predictions [n, ...].
        truth: Truth [n, ...].
        times: Time value of each sample [n].
        space: Label of the field space ("rdf" or "alpha").
    """

    per_time = []
    for value in np.unique(times):
        mask = times == value
        per_time.append(TimeMetrics(float(value), int(mask.sum()), *compute_metrics(pred[mask], truth[mask])))
    return MetricsReport(space, int(pred.shape[0]), *compute_metrics(pred, truth), per_time=per_time)


def format_report(report: MetricsReport) -> str:
    """Structured `key = value` text with full float precision."""
    lines = [f"space = {report.space}", f"n_samples = {report.n_samples}"]
    lines.extend(f"{name} = {getattr(report, name)!r}" for name in METRIC_NAMES)
    lines.append(f"mean_relative_error = {report.mean_relative_error!r}")
    for index, row in enumerate(report.per_time):
        lines.append(f"per_time.{index}.time = {row.time!r}")
        lines.append(f"per_time.{index}.count = {row.count}")
        lines.extend(f"per_time.{index}.{name} = {getattr(row, name)!r}" for name in METRIC_NAMES)
    return "\n".join(lines) + "\n"


def write_report(report: MetricsReport, path: Union[str, Path]) -> Path:
    path = Path(path)
    path.write_text(format_report(report), encoding="utf-8")
    return path


def write_report_xlsx(report: MetricsReport, path: Union[str, Path]) -> Path:
    """Workbook with a `summary` sheet and a `per_time` sheet."""
    path = Path(path)
    workbook = Workbook()
    summary = workbook.active
    summary.title = "summary"
    summary.append(["metric", "value"])
    summary.append(["space", report.space])
    summary.append(["n_samples", report.n_samples])
    for name in METRIC_NAMES + ("mean_relative_error",):
        summary.append([name, getattr(report, name)])
    per_time = workbook.create_sheet("per_time")
    frame = report.per_time_frame()
    per_time.append(frame.columns)
    for row in frame.iter_rows():
        per_time.append(list(row))
    workbook.save(path)
    logger.info("Wrote metrics workbook to %s.", path)
    return path
