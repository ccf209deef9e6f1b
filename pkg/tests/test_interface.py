"""
Unit tests for the α/ζ transforms and geometric diagnostics.
"""

from __future__ import annotations

import math

import numpy as np
import pytest

from interface_fno.datagen import circle_sdf
from interface_fno.errors import ConfigError, InvalidFractionError
from interface_fno.fields import Grid2D, ScalarField2D
from interface_fno.interface import (
    PhaseProps,
    RdfParams,
    alpha_to_rdf,
    binarize,
    curvature,
    interface_band,
    mixture_property,
    rdf_to_alpha,
    surface_tension_force,
)


GRID = Grid2D(8, 8)


def _field(value) -> ScalarField2D:
    return ScalarField2D(GRID, np.broadcast_to(np.asarray(value, dtype=np.float64), GRID.shape).copy())


def _drop(size: int = 164, radius: float = 20.0):
    grid = Grid2D(size, size)
    center = (size / 2, size / 2)
    zeta = circle_sdf(grid, center, radius)
    x, y = grid.cell_centers()
    return zeta, x - center[0], y - center[1]


def test_rdf_params_validation() -> None:
    with pytest.raises(ConfigError):
        RdfParams(epsilon=0.0)
    with pytest.raises(ConfigError):
        RdfParams(delta=0.5)


def test_half_fraction_maps_to_zero() -> None:
    assert np.all(alpha_to_rdf(_field(0.5)).values == 0.0)
    assert np.all(rdf_to_alpha(_field(0.0)).values == 0.5)


def test_closed_form_value() -> None:
    alpha = (1.0 - math.tanh(2.0)) / 2.0
    assert alpha_to_rdf(_field(alpha)).values[0, 0] == pytest.approx(2.0, abs=1e-9)


def test_full_liquid_is_clamped_and_finite() -> None:
    zeta = alpha_to_rdf(_field(1.0), RdfParams(epsilon=1.0, delta=1e-6)).values
    assert np.all(np.isfinite(zeta))
    assert zeta[0, 0] == pytest.approx(math.atanh(-1.0 + 2e-6))


def test_sign_convention() -> None:
    assert alpha_to_rdf(_field(0.9)).values[0, 0] < 0
    assert alpha_to_rdf(_field(0.1)).values[0, 0] > 0


def test_fraction_range_is_enforced() -> None:
    with pytest.raises(InvalidFractionError):
        alpha_to_rdf(_field(1.1))
    with pytest.raises(InvalidFractionError):
        alpha_to_rdf(_field(-0.01))
    assert np.all(np.isfinite(alpha_to_rdf(_field(1.0 + 5e-10)).values))


def test_round_trip_on_interior_fractions() -> None:
    alpha = np.linspace(1e-3, 1 - 1e-3, 64).reshape(8, 8)
    params = RdfParams(epsilon=1.5)
    back = rdf_to_alpha(alpha_to_rdf(ScalarField2D(GRID, alpha), params), params).values
    assert np.max(np.abs(back - alpha)) <= 1e-9


def test_large_distance_saturates_to_gas() -> None:
    alpha = rdf_to_alpha(_field(50.0)).values
    assert np.all(alpha < 1e-20)


def test_binarize_uniform_fields() -> None:
    assert np.all(binarize(_field(-3.0)).values == 1.0)
    assert np.all(binarize(_field(3.0)).values == 0.0)
    assert np.all(binarize(_field(0.0)).values == 0.0)


def test_binarized_disk_area() -> None:
    zeta, _, _ = _drop(size=64, radius=20.0)
    area = binarize(zeta).values.sum()
    assert abs(area - math.pi * 20.0**2) / (math.pi * 20.0**2) <= 0.02


def test_planar_interface_has_zero_curvature() -> None:
    grid = Grid2D(32, 32)
    _, y = grid.cell_centers()
    q = curvature(ScalarField2D(grid, y - 16.0)).values
    assert np.max(np.abs(q[1:-1, 1:-1])) <= 1e-8


def test_circle_curvature_on_band() -> None:
    zeta, dx, dy = _drop()
    band = interface_band(zeta)
    q = curvature(zeta).values[band]
    r = np.hypot(dx, dy)[band]
    assert band.sum() > 100
    assert np.all(q > 0)
    assert np.max(np.abs(q * r - 1.0)) <= 0.05
    assert abs(q.mean() * 20.0 - 1.0) <= 0.05


def test_surface_tension_points_into_the_drop() -> None:
    zeta, dx, dy = _drop()
    band = interface_band(zeta)
    force = surface_tension_force(zeta, sigma=1.0)
    fx, fy = force[0][band], force[1][band]
    r = np.hypot(dx, dy)[band]
    assert np.max(np.abs(np.hypot(fx, fy) * 20.0 - 1.0)) <= 0.15
    inward = -np.stack([dx[band], dy[band]]) / r
    cosine = (fx * inward[0] + fy * inward[1]) / np.hypot(fx, fy)
    assert np.all(cosine >= math.cos(math.radians(5.0)))


def test_surface_tension_trivial_cases() -> None:
    zeta, _, _ = _drop(size=32, radius=8.0)
    assert np.all(surface_tension_force(zeta, sigma=0.0) == 0.0)
    grid = Grid2D(16, 16)
    _, y = grid.cell_centers()
    planar = surface_tension_force(ScalarField2D(grid, y - 8.0), sigma=2.0)
    assert np.max(np.abs(planar[:, 1:-1, 1:-1])) <= 1e-8
    with pytest.raises(ConfigError):
        surface_tension_force(zeta, sigma=-1.0)


def test_mixture_property() -> None:
    props = PhaseProps(xi_liquid=1000.0, xi_gas=1.0)
    assert mixture_property(_field(1.0), props).values[0, 0] == 1000.0
    assert mixture_property(_field(0.0), props).values[0, 0] == 1.0
    assert mixture_property(_field(0.5), props).values[0, 0] == pytest.approx(500.5)
    with pytest.raises(InvalidFractionError):
        mixture_property(_field(2.0), props)
    with pytest.raises(ConfigError):
        PhaseProps(xi_liquid=float("nan"), xi_gas=1.0)


def test_rdf_is_strictly_decreasing_in_alpha() -> None:
    grid = Grid2D(20, 25)
    alpha = np.linspace(1e-4, 1.0 - 1e-4, grid.height * grid.width)
    zeta = alpha_to_rdf(ScalarField2D(grid, alpha.reshape(grid.shape))).values.reshape(-1)
    assert np.all(np.diff(zeta) < 0.0)


def test_binarized_rdf_matches_half_threshold() -> None:
    grid = Grid2D(6, 6)
    alpha = np.random.default_rng(8).random(grid.shape)
    alpha.flat[:4] = [0.0, 0.5, 1.0, 0.5000001]
    field = ScalarField2D(grid, alpha)
    assert np.array_equal(binarize(alpha_to_rdf(field)).values, (alpha > 0.5).astype(np.float64))


def test_curvature_converges_with_refinement() -> None:
    errors = []
    for size in (32, 64, 128):
        grid = Grid2D(size, size, dx=1.0 / size, dy=1.0 / size)
        zeta = circle_sdf(grid, (0.5, 0.5), 0.3)
        x, y = grid.cell_centers()
        band = interface_band(zeta)
        q = curvature(zeta).values[band]
        errors.append(np.mean(np.abs(q - 1.0 / np.hypot(x - 0.5, y - 0.5)[band])))
    orders = np.log2(np.array(errors[:-1]) / np.array(errors[1:]))
    assert np.all(orders >= 1.0)
