"""
Real-input 2D discrete Fourier transforms with corner-block mode truncation.

Convention: unnormalized forward transform, 1/(H*W) on the inverse.
"""

from __future__ import annotations

from typing import List

import numpy as np

from .errors import InvalidFieldError, ModeRangeError, ShapeError
from .fields import FieldBatch, Grid2D, HalfSpectrum


def fft2_real(batch: FieldBatch) -> List[HalfSpectrum]:
    """
    Forward transform of every sample over the two spatial axes.

    Args:
        batch: Real fields [n, c, H, W].

    Returns:
        One HalfSpectrum of shape [c, H, W // 2 + 1] per sample.

    Raises:
        InvalidFieldError: When the batch holds non-finite values.
    """

    if not np.all(np.isfinite(batch.values)):
        raise InvalidFieldError("Cannot transform a field with non-finite values.")
    coefficients = np.fft.rfft2(batch.values.astype(np.float64), axes=(-2, -1))
    height, width = batch.grid.shape
    return [HalfSpectrum(coefficients[i], height, width) for i in range(batch.n)]


def ifft2_real(spectrum: HalfSpectrum, grid: Grid2D) -> FieldBatch:
    """
    Inverse transform back to a real field on grid.

    Args:
        spectrum: Half spectrum [c, H, W // 2 + 1].
        grid: Target grid; must match the spectrum's originating extents.

    Returns:
        FieldBatch with a single sample and spectrum.c channels.

    Raises:
        ShapeError: When the spectrum does not belong to a field on grid.
    """

    if (spectrum.height, spectrum.width) != grid.shape:
        raise ShapeError(
            f"Spectrum of a {spectrum.height}x{spectrum.width} field cannot be "
            f"inverted onto a {grid.height}x{grid.width} grid."
        )
    values = np.fft.irfft2(spectrum.coefficients, s=grid.shape, axes=(-2, -1))
    return FieldBatch(grid, values[np.newaxis])


def retained_rows(height: int, k_x: int) -> np.ndarray:
    """Row indices of the positive and negative k_x corner blocks."""
    return np.concatenate([np.arange(k_x), np.arange(height - k_x, height)])


def mode_mask(height: int, width: int, k_x: int, k_y: int) -> np.ndarray:
    """
    Boolean [H, W // 2 + 1] mask of retained modes.

    Raises:
        ModeRangeError: When a mode count exceeds the spectrum extents.
    """

    ky_len = width // 2 + 1
    if k_x < 0 or k_y < 0 or k_x > (height + 1) // 2 or k_y > ky_len:
        raise ModeRangeError(
            f"Modes ({k_x}, {k_y}) exceed spectrum extents for a {height}x{width} field."
        )
    mask = np.zeros((height, ky_len), dtype=bool)
    mask[retained_rows(height, k_x)[:, np.newaxis], np.arange(k_y)] = True
    return mask


def truncate_modes(spectrum: HalfSpectrum, k_x: int, k_y: int) -> HalfSpectrum:
    """
    Keep the two low-frequency corner blocks and zero every other mode.

    Args:
        spectrum: Input half spectrum.
        k_x: Rows kept at each end of the k_x axis.
        k_y: Leading columns kept on the k_y axis.

    Returns:
        Truncated copy of the spectrum.

    Raises:
        ModeRangeError: When k_x > ceil(H/2) or k_y > W // 2 + 1.
    """

    mask = mode_mask(spectrum.height, spectrum.width, k_x, k_y)
    return HalfSpectrum(
        np.where(mask, spectrum.coefficients, 0.0), spectrum.height, spectrum.width
    )
