"""
Volume fraction and reconstructed distance function transforms, plus
interface geometry diagnostics.

Sign convention: ζ < 0 in the liquid (α > 0.5), ζ > 0 in the gas.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np

from .constants import (
    DEFAULT_RDF_DELTA,
    DEFAULT_RDF_EPSILON,
    FRACTION_SLACK,
    GRADIENT_NORM_FLOOR,
    INTERFACE_BAND_GRADIENT,
)
from .errors import ConfigError, InvalidFractionError
from .fields import ScalarField2D


@dataclass(frozen=True)
class RdfParams:
    """
    Parameters of the regularised inverse Heaviside mapping.

    Args:
        epsilon: Smoothing length in grid-spacing units.
        delta: Clamp margin keeping α away from 0 and 1.
    """

    epsilon: float = DEFAULT_RDF_EPSILON
    delta: float = DEFAULT_RDF_DELTA

    def __post_init__(self) -> None:
        if not self.epsilon > 0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}.")
        if not 0 < self.delta < 0.5:
            raise ConfigError(f"delta must lie in (0, 0.5), got {self.delta}.")


@dataclass(frozen=True)
class PhaseProps:
    """
    Pure-phase values of a transport property.

    Args:
        xi_liquid: Value in the liquid (α = 1).
        xi_gas: Value in the gas (α = 0).
    """

    xi_liquid: float
    xi_gas: float

    def __post_init__(self) -> None:
        if not (np.isfinite(self.xi_liquid) and np.isfinite(self.xi_gas)):
            raise ConfigError("Phase properties must be finite.")


def _check_fraction(values: np.ndarray) -> None:
    if values.size and (values.min() < -FRACTION_SLACK or values.max() > 1.0 + FRACTION_SLACK):
        raise InvalidFractionError(
            f"Volume fraction outside [0, 1]: range [{values.min()}, {values.max()}]."
        )


def alpha_to_rdf(alpha: ScalarField2D, params: RdfParams = RdfParams()) -> ScalarField2D:
    """
    Map a volume fraction to ζ = ε·atanh(1 − 2·clamp(α, δ, 1 − δ)).

    Args:
        alpha: Volume fraction field.
        params: Smoothing length and clamp margin.

    Returns:
        The reconstructed distance function, finite everywhere.

    Raises:
        InvalidFractionError: When α leaves [0, 1] by more than 1e-9.
    """

    _check_fraction(alpha.values)
    clamped = np.clip(alpha.values, params.delta, 1.0 - params.delta)
    return alpha.with_values(params.epsilon * np.arctanh(1.0 - 2.0 * clamped))


def rdf_to_alpha(zeta: ScalarField2D, params: RdfParams = RdfParams()) -> ScalarField2D:
    """Inverse mapping α = (1 − tanh(ζ/ε)) / 2."""
    return zeta.with_values(0.5 * (1.0 - np.tanh(zeta.values / params.epsilon)))


def binarize(zeta: ScalarField2D) -> ScalarField2D:
    """Binary volume fraction: 1 where ζ < 0 (liquid), 0 elsewhere."""
    return zeta.with_values((zeta.values < 0.0).astype(np.float64))


def _unit_normal(zeta: ScalarField2D) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    grid = zeta.grid
    # np.gradient: central differences inside, one-sided at the edges.
    dz_dy, dz_dx = np.gradient(zeta.values, grid.dy, grid.dx)
    norm = np.maximum(np.hypot(dz_dx, dz_dy), GRADIENT_NORM_FLOOR)
    return dz_dx / norm, dz_dy / norm, norm


def curvature(zeta: ScalarField2D) -> ScalarField2D:
    """
    Interface curvature q = −∇·n with n the unit normal pointing into the liquid.

    ζ decreases into the liquid, so n = −∇ζ/|∇ζ| and q = ∇·(∇ζ/|∇ζ|); a liquid
    drop of radius R has q = 1/R. Values are computed everywhere; only cells in
    reliable_curvature_mask are meaningful.

    Args:
        zeta: Reconstructed distance function.

    Returns:
        Curvature field in inverse length units.
    """

    grid = zeta.grid
    gx, gy, _ = _unit_normal(zeta)
    div = np.gradient(gx, grid.dx, axis=1) + np.gradient(gy, grid.dy, axis=0)
    return zeta.with_values(div)


def reliable_curvature_mask(zeta: ScalarField2D) -> np.ndarray:
    """Cells where |∇ζ| exceeds 0.5 and curvature is trusted."""
    _, _, norm = _unit_normal(zeta)
    return norm > INTERFACE_BAND_GRADIENT


def interface_band(zeta: ScalarField2D, half_width: float = 2.0) -> np.ndarray:
    """
    Cells within half_width grid spacings of the zero level set that also
    pass reliable_curvature_mask.
    """

    return (np.abs(zeta.values) <= half_width * zeta.grid.min_spacing) & reliable_curvature_mask(zeta)


def surface_tension_force(zeta: ScalarField2D, sigma: float) -> np.ndarray:
    """
    Continuum surface force f = σ·q·n.

    n points into the liquid, so the force on a drop points to its centre.

    Args:
        zeta: Reconstructed distance function.
        sigma: Surface-tension coefficient.

    Returns:
        Array [2, H, W] holding the x and y components.

    Raises:
        ConfigError: When sigma is negative.
    """

    if sigma < 0:
        raise ConfigError(f"Surface-tension coefficient must be non-negative, got {sigma}.")
    gx, gy, _ = _unit_normal(zeta)
    q = curvature(zeta).values
    return np.stack([sigma * q * -gx, sigma * q * -gy])


def mixture_property(alpha: ScalarField2D, props: PhaseProps) -> ScalarField2D:
    """
    Linear mixture ξ = α·ξ_liquid + (1 − α)·ξ_gas.

    Raises:
        InvalidFractionError: When α leaves [0, 1].
    """

    _check_fraction(alpha.values)
    a = np.clip(alpha.values, 0.0, 1.0)
    return alpha.with_values(a * props.xi_liquid + (1.0 - a) * props.xi_gas)
