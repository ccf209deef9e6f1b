"""
Field containers on uniform two-dimensional grids.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .constants import MIN_SIMULATION_CELLS
from .errors import ConfigError, InvalidFieldError, ShapeError


@dataclass(frozen=True)
class Grid2D:
    """
    Uniform cell-centred grid.

    Cell (i, j) has its centre at x = (j + 0.5) * dx, y = (i + 0.5) * dy,
    so the row index grows with y.

    Args:
        height: Number of rows (cells along y).
        width: Number of columns (cells along x).
        dx: Spacing along x in length units.
        dy: Spacing along y in length units.

    Raises:
        ShapeError: When either cell count is below 2.
        ConfigError: When a spacing is not positive.
    """

    height: int
    width: int
    dx: float = 1.0
    dy: float = 1.0

    def __post_init__(self) -> None:
        if self.height < 2 or self.width < 2:
            raise ShapeError(f"Grid must be at least 2x2, got {self.height}x{self.width}.")
        if not (self.dx > 0 and self.dy > 0):
            raise ConfigError(f"Grid spacing must be positive, got dx={self.dx}, dy={self.dy}.")

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.height, self.width)

    @property
    def n_cells(self) -> int:
        return self.height * self.width

    @property
    def extent(self) -> Tuple[float, float]:
        """Domain lengths (Lx, Ly)."""
        return (self.width * self.dx, self.height * self.dy)

    @property
    def min_spacing(self) -> float:
        return min(self.dx, self.dy)

    def cell_centers(self) -> Tuple[np.ndarray, np.ndarray]:
        """
        Cell-centre coordinates.

        Returns:
            Tuple (x, y) of [height, width] arrays.
        """

        x = (np.arange(self.width, dtype=np.float64) + 0.5) * self.dx
        y = (np.arange(self.height, dtype=np.float64) + 0.5) * self.dy
        xx, yy = np.meshgrid(x, y, indexing="xy")
        return xx, yy

    def unit(self) -> "Grid2D":
        """Same cell counts with unit spacing."""
        return Grid2D(self.height, self.width)

    def require_min_cells(self, minimum: int = MIN_SIMULATION_CELLS) -> None:
        """
        Raises:
            ShapeError: When either cell count is below minimum.
        """

        if self.height < minimum or self.width < minimum:
            raise ShapeError(
                f"Grid must be at least {minimum}x{minimum}, got {self.height}x{self.width}."
            )


@dataclass(frozen=True, eq=False)
class ScalarField2D:
    """
    Real scalar field (α, ζ or an error map) on a grid.

    Args:
        grid: Grid the values live on.
        values: Float64 array of shape [height, width], row-major.

    Raises:
        ShapeError: When the value shape does not match the grid.
        InvalidFieldError: When any value is not finite.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim == 1 and values.size == self.grid.n_cells:
            values = values.reshape(self.grid.shape)
        if values.shape != self.grid.shape:
            raise ShapeError(f"Field shape {values.shape} does not match grid {self.grid.shape}.")
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError("Field contains non-finite values.")
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: Grid2D, value: float) -> "ScalarField2D":
        return cls(grid, np.full(grid.shape, float(value)))

    def with_values(self, values: np.ndarray) -> "ScalarField2D":
        return ScalarField2D(self.grid, values)

    @property
    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)


@dataclass(frozen=True, eq=False)
class FieldBatch:
    """
    Stack of multi-channel fields, shape [n, c, height, width].

    Args:
        grid: Grid shared by every sample and channel.
        values: Real array [n, c, height, width].

    Raises:
        ShapeError: When the array is not 4-D or disagrees with the grid.
        InvalidFieldError: When any value is not finite.
    """

    grid: Grid2D
    values: np.ndarray

    def __post_init__(self) -> None:
        values = np.asarray(self.values)
        if values.dtype.kind != "f":
            values = values.astype(np.float64)
        if values.ndim != 4:
            raise ShapeError(f"FieldBatch expects a 4-D array, got {values.ndim}-D.")
        if values.shape[2:] != self.grid.shape:
            raise ShapeError(
                f"FieldBatch spatial shape {values.shape[2:]} does not match grid {self.grid.shape}."
            )
        if not np.all(np.isfinite(values)):
            raise InvalidFieldError("FieldBatch contains non-finite values.")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_fields(cls, fields: "list[list[ScalarField2D]]") -> "FieldBatch":
        """
        Stack nested per-sample, per-channel fields.

        Args:
            fields: fields[sample][channel].

        Returns:
            FieldBatch with n = len(fields).
        """

        grid = fields[0][0].grid
        values = np.stack([np.stack([f.values for f in sample]) for sample in fields])
        return cls(grid, values)

    @property
    def n(self) -> int:
        return int(self.values.shape[0])

    @property
    def c(self) -> int:
        return int(self.values.shape[1])

    def field(self, sample: int, channel: int = 0) -> ScalarField2D:
        return ScalarField2D(self.grid, self.values[sample, channel].astype(np.float64))


@dataclass(frozen=True, eq=False)
class HalfSpectrum:
    """
    Fourier coefficients of a real multi-channel field, Hermitian half stored.

    Args:
        coefficients: Complex array [c, height, width // 2 + 1].
        height: Spatial height of the originating field.
        width: Spatial width of the originating field.
    """

    coefficients: np.ndarray
    height: int
    width: int

    def __post_init__(self) -> None:
        coefficients = np.asarray(self.coefficients, dtype=np.complex128)
        if coefficients.ndim != 3:
            raise ShapeError(f"HalfSpectrum expects [c, kx, ky], got {coefficients.ndim}-D.")
        if coefficients.shape[1:] != (self.height, self.width // 2 + 1):
            raise ShapeError(
                f"Spectrum extents {coefficients.shape[1:]} do not match a "
                f"{self.height}x{self.width} field."
            )
        object.__setattr__(self, "coefficients", coefficients)

    @property
    def c(self) -> int:
        return int(self.coefficients.shape[0])

    @property
    def kx_len(self) -> int:
        return self.height

    @property
    def ky_len(self) -> int:
        return self.width // 2 + 1
