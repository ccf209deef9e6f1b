"""
Ground-truth interface dynamics: initial shapes, prescribed velocity fields,
semi-Lagrangian level-set advection and dataset assembly.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, replace
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .constants import MAX_PLACEMENT_ATTEMPTS, FlowKind, InitKind, Interpolation
from .errors import (
    ConfigError,
    GenerationError,
    GeometryError,
    InsufficientDataError,
    MalformedSimulationError,
    ShapeError,
    StabilityError,
    ValidationError,
)
from .fields import Grid2D, ScalarField2D
from .interface import RdfParams, alpha_to_rdf, rdf_to_alpha
from .parallel import ordered_map

logger = logging.getLogger(__name__)

CFL_TOLERANCE = 1e-12


@dataclass(frozen=True)
class FlowSpec:
    """
    Prescribed analytic velocity field.

    Args:
        kind: Which flow to evaluate.
        omega: Angular velocity of rigid rotation (1/s).
        period: Single-vortex reversal period T (s).
        amplitude: Single-vortex strength A (1/s).
        gamma: Stagnation-flow strain rate (1/s).
        speed: Uniform fall speed (length/s).
        center: Rotation or stagnation centre; domain centre when None.
        extent: Domain lengths (Lx, Ly) for the single vortex; bound from the grid when None.
    """

    kind: FlowKind
    omega: float = 0.0
    period: float = 1.0
    amplitude: float = 1.0
    gamma: float = 0.0
    speed: float = 0.0
    center: Optional[Tuple[float, float]] = None
    extent: Optional[Tuple[float, float]] = None

    def __post_init__(self) -> None:
        if not isinstance(self.kind, FlowKind):
            raise ConfigError(f"Unknown flow kind {self.kind!r}.")
        if self.kind == FlowKind.SINGLE_VORTEX and not self.period > 0:
            raise ConfigError(f"Vortex period must be positive, got {self.period}.")

    @classmethod
    def rigid_rotation(cls, omega: float, center: Optional[Tuple[float, float]] = None) -> "FlowSpec":
        return cls(FlowKind.RIGID_ROTATION, omega=omega, center=center)

    @classmethod
    def single_vortex(cls, period: float, amplitude: float = 1.0) -> "FlowSpec":
        return cls(FlowKind.SINGLE_VORTEX, period=period, amplitude=amplitude)

    @classmethod
    def stagnation_collapse(cls, gamma: float, center: Optional[Tuple[float, float]] = None) -> "FlowSpec":
        return cls(FlowKind.STAGNATION_COLLAPSE, gamma=gamma, center=center)

    @classmethod
    def uniform_fall(cls, speed: float) -> "FlowSpec":
        return cls(FlowKind.UNIFORM_FALL, speed=speed)

    def bind(self, grid: Grid2D) -> "FlowSpec":
        """Fill a missing centre and extent from grid."""
        lx, ly = grid.extent
        return replace(
            self,
            center=self.center if self.center is not None else (0.5 * lx, 0.5 * ly),
            extent=self.extent if self.extent is not None else (lx, ly),
        )

    def describe(self) -> str:
        if self.kind == FlowKind.RIGID_ROTATION:
            return f"rotation(omega={self.omega}, center={self.center})"
        if self.kind == FlowKind.SINGLE_VORTEX:
            return f"vortex(period={self.period}, amplitude={self.amplitude})"
        if self.kind == FlowKind.STAGNATION_COLLAPSE:
            return f"stagnation(gamma={self.gamma}, center={self.center})"
        return f"fall(speed={self.speed})"


@dataclass(frozen=True)
class InitSpec:
    """
    Initial interface shape.

    Args:
        kind: COLUMN or RANDOM_BLOBS.
        seed: RNG seed for random shapes.
        rect: Column rectangle (x0, y0, w, h) in length units, lower-left corner first.
        count_range: Inclusive range of blob counts.
        radius_range: Range of blob radii in length units.
        margin: Minimum gap in cells between blobs and the domain boundary.
        allow_overlap: Whether blobs may intersect.
    """

    kind: InitKind
    seed: int = 0
    rect: Tuple[float, float, float, float] = (0.0, 0.0, 1.0, 1.0)
    count_range: Tuple[int, int] = (1, 3)
    radius_range: Tuple[float, float] = (0.08, 0.16)
    margin: float = 2.0
    allow_overlap: bool = True

    def __post_init__(self) -> None:
        lo, hi = self.count_range
        if self.kind == InitKind.RANDOM_BLOBS:
            if lo < 1 or hi < lo:
                raise ConfigError(f"Invalid blob count range {self.count_range}.")
            rlo, rhi = self.radius_range
            if not (0 < rlo <= rhi):
                raise ConfigError(f"Invalid blob radius range {self.radius_range}.")
            if self.margin < 0:
                raise ConfigError(f"Margin must be non-negative, got {self.margin}.")
        if self.kind == InitKind.COLUMN and not (self.rect[2] > 0 and self.rect[3] > 0):
            raise ConfigError(f"Column width and height must be positive, got {self.rect}.")

    @classmethod
    def column(cls, x0: float, y0: float, w: float, h: float) -> "InitSpec":
        return cls(InitKind.COLUMN, rect=(x0, y0, w, h))

    @classmethod
    def random_blobs(
        cls,
        seed: int,
        count_range: Tuple[int, int] = (1, 3),
        radius_range: Tuple[float, float] = (0.08, 0.16),
        margin: float = 2.0,
        allow_overlap: bool = True,
    ) -> "InitSpec":
        return cls(
            InitKind.RANDOM_BLOBS,
            seed=seed,
            count_range=count_range,
            radius_range=radius_range,
            margin=margin,
            allow_overlap=allow_overlap,
        )


@dataclass(frozen=True)
class SimConfig:
    """
    Time-stepping configuration.

    Args:
        grid: Simulation grid (physical spacing).
        dt: Time step (s).
        n_steps: Number of advection steps.
        snapshot_times: Times (s) at which frames are captured.
        reinit_every: Steps between redistancing passes, 0 disables.
        interpolation: Departure-point interpolation, bilinear by default.
    """

    grid: Grid2D
    dt: float
    n_steps: int
    snapshot_times: Tuple[float, ...] = (0.0,)
    reinit_every: int = 0
    interpolation: Interpolation = Interpolation.LINEAR

    def __post_init__(self) -> None:
        self.grid.require_min_cells()
        if not self.dt > 0:
            raise ConfigError(f"dt must be positive, got {self.dt}.")
        if self.n_steps < 0:
            raise ConfigError(f"n_steps must be non-negative, got {self.n_steps}.")
        if self.reinit_every < 0:
            raise ConfigError(f"reinit_every must be non-negative, got {self.reinit_every}.")
        t_end = self.n_steps * self.dt
        for t in self.snapshot_times:
            if t < 0 or t > t_end + 1e-9 * max(1.0, t_end):
                raise ConfigError(f"Snapshot time {t} lies outside [0, {t_end}].")


@dataclass(frozen=True, eq=False)
class Frame:
    """One captured snapshot of a simulation."""

    time: float
    zeta: ScalarField2D


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Supervised samples for the operator learner.

    Args:
        grid: Unit-spacing grid of every sample.
        inputs: [n, 2, H, W]; channel 0 the initial ζ, channel 1 the time broadcast.
        targets: [n, 1, H, W] ζ at the requested time.
        epsilon: RDF smoothing length the ζ values are expressed with.
        provenance: Free-form description of how the samples were produced.
    """

    grid: Grid2D
    inputs: np.ndarray
    targets: np.ndarray
    epsilon: float = 1.0
    provenance: str = ""

    def __post_init__(self) -> None:
        self.grid.require_min_cells()
        inputs = np.asarray(self.inputs, dtype=np.float64)
        targets = np.asarray(self.targets, dtype=np.float64)
        height, width = self.grid.shape
        if inputs.ndim != 4 or inputs.shape[1:] != (2, height, width):
            raise ShapeError(f"Dataset inputs must be [n, 2, {height}, {width}], got {inputs.shape}.")
        if targets.shape != (inputs.shape[0], 1, height, width):
            raise ShapeError(f"Dataset targets must be [n, 1, {height}, {width}], got {targets.shape}.")
        time_channel = inputs[:, 1].reshape(inputs.shape[0], height * width)
        if time_channel.size and np.any(time_channel != time_channel[:, :1]):
            raise ValidationError("Time channel must be spatially constant for every sample.")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    @property
    def n(self) -> int:
        return int(self.inputs.shape[0])

    @property
    def times(self) -> np.ndarray:
        """Time-channel value of every sample."""
        return self.inputs[:, 1, 0, 0].copy()

    def subset(self, indices: Sequence[int]) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(self.grid, self.inputs[idx], self.targets[idx], self.epsilon, self.provenance)


def _require_bound(flow: FlowSpec) -> Tuple[Tuple[float, float], Tuple[float, float]]:
    if flow.center is None or flow.extent is None:
        raise ConfigError("Flow has no centre/extent; call FlowSpec.bind(grid) first.")
    return flow.center, flow.extent


def velocity_at(flow: FlowSpec, x, y, t: float) -> Tuple[np.ndarray, np.ndarray]:
    """
    Evaluate the prescribed velocity at points (x, y) and time t.

    Args:
        flow: Bound flow specification.
        x: x coordinates (scalar or array).
        y: y coordinates, same shape as x.
        t: Time (s).

    Returns:
        Tuple (u, v) with the shape of x.

    Raises:
        ConfigError: When a centre-dependent flow is not bound to a grid.
    """

    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if flow.kind == FlowKind.UNIFORM_FALL:
        return np.zeros_like(x), np.full_like(y, -flow.speed)
    (xc, yc), (lx, ly) = _require_bound(flow)
    if flow.kind == FlowKind.RIGID_ROTATION:
        return -flow.omega * (y - yc), flow.omega * (x - xc)
    if flow.kind == FlowKind.STAGNATION_COLLAPSE:
        return flow.gamma * (x - xc), -flow.gamma * (y - yc)
    # Reversing single vortex, stream function A*sin²(πX)sin²(πY)/π scaled to the domain.
    modulation = flow.amplitude * math.cos(math.pi * t / flow.period)
    sx, sy = np.pi * x / lx, np.pi * y / ly
    u = -modulation * lx * np.sin(sx) ** 2 * np.sin(2.0 * sy)
    v = modulation * ly * np.sin(sy) ** 2 * np.sin(2.0 * sx)
    return u, v


def max_speed(flow: FlowSpec, grid: Grid2D, t: float) -> float:
    """Largest velocity magnitude over the cell centres at time t."""
    x, y = grid.cell_centers()
    u, v = velocity_at(flow.bind(grid), x, y, t)
    return float(np.max(np.hypot(u, v)))


def circle_sdf(grid: Grid2D, center: Tuple[float, float], radius: float) -> ScalarField2D:
    """Signed distance to a circle, negative inside."""
    x, y = grid.cell_centers()
    return ScalarField2D(grid, np.hypot(x - center[0], y - center[1]) - radius)


def init_column(grid: Grid2D, spec: InitSpec) -> ScalarField2D:
    """
    Exact signed distance to a rectangular liquid column.

    Raises:
        GeometryError: When the rectangle leaves the domain.
    """

    x0, y0, w, h = spec.rect
    lx, ly = grid.extent
    if x0 < 0 or y0 < 0 or x0 + w > lx or y0 + h > ly:
        raise GeometryError(f"Column {spec.rect} does not fit inside the {lx}x{ly} domain.")
    x, y = grid.cell_centers()
    qx = np.abs(x - (x0 + 0.5 * w)) - 0.5 * w
    qy = np.abs(y - (y0 + 0.5 * h)) - 0.5 * h
    outside = np.hypot(np.maximum(qx, 0.0), np.maximum(qy, 0.0))
    inside = np.minimum(np.maximum(qx, qy), 0.0)
    return ScalarField2D(grid, outside + inside)


def place_blobs(grid: Grid2D, spec: InitSpec) -> List[Tuple[float, float, float]]:
    """
    Draw blob centres and radii by rejection sampling.

    Returns:
        List of (cx, cy, radius).

    Raises:
        GenerationError: When a blob cannot be placed in 1000 attempts.
    """

    rng = np.random.default_rng(spec.seed)
    lx, ly = grid.extent
    gap_x, gap_y = spec.margin * grid.dx, spec.margin * grid.dy
    lo, hi = spec.count_range
    count = int(rng.integers(lo, hi, endpoint=True))
    blobs: List[Tuple[float, float, float]] = []
    for index in range(count):
        radius = float(rng.uniform(*spec.radius_range))
        for attempt in range(MAX_PLACEMENT_ATTEMPTS):
            cx, cy = float(rng.uniform(0.0, lx)), float(rng.uniform(0.0, ly))
            inside = gap_x + radius <= cx <= lx - gap_x - radius and gap_y + radius <= cy <= ly - gap_y - radius
            if inside and (spec.allow_overlap or _clear_of(blobs, cx, cy, radius, grid.min_spacing * spec.margin)):
                blobs.append((cx, cy, radius))
                logger.debug("Placed blob %d after %d attempts.", index, attempt + 1)
                break
        else:
            raise GenerationError(
                f"Could not place blob {index} of radius {radius:.4g} after "
                f"{MAX_PLACEMENT_ATTEMPTS} attempts."
            )
    return blobs


def _clear_of(blobs, cx: float, cy: float, radius: float, gap: float) -> bool:
    return all(math.hypot(cx - bx, cy - by) >= radius + br + gap for bx, by, br in blobs)


def init_blobs(grid: Grid2D, spec: InitSpec) -> ScalarField2D:
    """Union of randomly placed disks as the minimum of their signed distances."""
    x, y = grid.cell_centers()
    zeta = np.full(grid.shape, np.inf)
    for cx, cy, radius in place_blobs(grid, spec):
        zeta = np.minimum(zeta, np.hypot(x - cx, y - cy) - radius)
    return ScalarField2D(grid, zeta)


def initial_field(grid: Grid2D, spec: InitSpec) -> ScalarField2D:
    if spec.kind == InitKind.COLUMN:
        return init_column(grid, spec)
    return init_blobs(grid, spec)


def _bilinear(values: np.ndarray, fi: np.ndarray, fj: np.ndarray) -> np.ndarray:
    height, width = values.shape
    fi = np.clip(fi, 0.0, height - 1)
    fj = np.clip(fj, 0.0, width - 1)
    i0 = np.minimum(np.floor(fi).astype(np.int64), height - 2)
    j0 = np.minimum(np.floor(fj).astype(np.int64), width - 2)
    wi = fi - i0
    wj = fj - j0
    top = (1.0 - wj) * values[i0, j0] + wj * values[i0, j0 + 1]
    bottom = (1.0 - wj) * values[i0 + 1, j0] + wj * values[i0 + 1, j0 + 1]
    return (1.0 - wi) * top + wi * bottom


def _catmull_rom_weights(t: np.ndarray) -> Tuple[np.ndarray, ...]:
    t2, t3 = t * t, t * t * t
    return (
        0.5 * (-t3 + 2.0 * t2 - t),
        0.5 * (3.0 * t3 - 5.0 * t2 + 2.0),
        0.5 * (-3.0 * t3 + 4.0 * t2 + t),
        0.5 * (t3 - t2),
    )


def _bicubic(values: np.ndarray, fi: np.ndarray, fj: np.ndarray) -> np.ndarray:
    """Catmull-Rom interpolation; stencil indices clamp to the domain."""
    height, width = values.shape
    fi = np.clip(fi, 0.0, height - 1)
    fj = np.clip(fj, 0.0, width - 1)
    i0 = np.floor(fi).astype(np.int64)
    j0 = np.floor(fj).astype(np.int64)
    wi = _catmull_rom_weights(fi - i0)
    wj = _catmull_rom_weights(fj - j0)
    out = np.zeros(fi.shape)
    for a in range(4):
        rows = np.clip(i0 + a - 1, 0, height - 1)
        line = np.zeros(fi.shape)
        for b in range(4):
            line += wj[b] * values[rows, np.clip(j0 + b - 1, 0, width - 1)]
        out += wi[a] * line
    return out


def check_cfl(flow: FlowSpec, grid: Grid2D, t: float, dt: float) -> float:
    """
    Courant number of a step from t to t + dt.

    Raises:
        StabilityError: When the Courant number exceeds 1.
    """

    courant = max(max_speed(flow, grid, t), max_speed(flow, grid, t + dt)) * dt / grid.min_spacing
    if courant > 1.0 + CFL_TOLERANCE:
        raise StabilityError(f"CFL number {courant:.4g} exceeds 1 (t={t:.4g}, dt={dt:.4g}).")
    return courant


def advect(
    zeta: ScalarField2D,
    flow: FlowSpec,
    t: float,
    dt: float,
    interpolation: Interpolation = Interpolation.LINEAR,
) -> ScalarField2D:
    """
    One semi-Lagrangian step from t to t + dt.

    Each cell centre is traced back with a midpoint (RK2) step and ζ is
    interpolated at the departure point (bilinear, or Catmull-Rom bicubic for
    long transports); departures outside the domain take the nearest
    boundary value.

    Raises:
        StabilityError: When the step violates CFL ≤ 1.
    """

    grid = zeta.grid
    flow = flow.bind(grid)
    check_cfl(flow, grid, t, dt)
    x, y = grid.cell_centers()
    u1, v1 = velocity_at(flow, x, y, t + dt)
    u2, v2 = velocity_at(flow, x - 0.5 * dt * u1, y - 0.5 * dt * v1, t + 0.5 * dt)
    rows, cols = np.indices(grid.shape, dtype=np.float64)
    fi = rows - dt * v2 / grid.dy
    fj = cols - dt * u2 / grid.dx
    interpolate = _bicubic if interpolation == Interpolation.CUBIC else _bilinear
    return zeta.with_values(interpolate(zeta.values, fi, fj))


def redistance(zeta: ScalarField2D, sweeps: int = 2) -> ScalarField2D:
    """
    Rebuild a signed distance from the zero level set by fast sweeping.

    Cells next to a sign change keep a linearly interpolated distance; the
    rest solve |∇φ| = 1 with four alternating Gauss-Seidel orderings.

    Args:
        zeta: Level-set function.
        sweeps: Number of four-ordering passes.

    Returns:
        Signed distance with the sign of zeta; unchanged when no interface exists.
    """

    grid = zeta.grid
    phi = zeta.values
    height, width = grid.shape
    dx, dy = grid.dx, grid.dy
    sign = np.where(phi < 0.0, -1.0, 1.0)
    dist = np.full(grid.shape, np.inf)

    for axis, step in ((0, dy), (1, dx)):
        a = phi
        b = np.roll(phi, -1, axis=axis)
        crossing = (a * b <= 0.0) & ((a != 0.0) | (b != 0.0))
        if axis == 0:
            crossing[-1, :] = False
        else:
            crossing[:, -1] = False
        denom = np.where(crossing, np.abs(a - b), 1.0)
        da = np.where(crossing, step * np.abs(a) / denom, np.inf)
        db = np.where(crossing, step * np.abs(b) / denom, np.inf)
        dist = np.minimum(dist, da)
        dist = np.minimum(dist, np.roll(db, 1, axis=axis))
    frozen = np.isfinite(dist)
    if not frozen.any():
        return zeta

    orders = (
        (range(height), range(width)),
        (range(height), range(width - 1, -1, -1)),
        (range(height - 1, -1, -1), range(width)),
        (range(height - 1, -1, -1), range(width - 1, -1, -1)),
    )
    inv_dx2, inv_dy2 = 1.0 / dx**2, 1.0 / dy**2
    for _ in range(sweeps):
        for row_order, col_order in orders:
            for i in row_order:
                for j in col_order:
                    if frozen[i, j]:
                        continue
                    a = min(dist[i - 1, j] if i > 0 else np.inf, dist[i + 1, j] if i < height - 1 else np.inf)
                    b = min(dist[i, j - 1] if j > 0 else np.inf, dist[i, j + 1] if j < width - 1 else np.inf)
                    if a + dy <= b:
                        candidate = a + dy
                    elif b + dx <= a:
                        candidate = b + dx
                    else:
                        qa = inv_dx2 + inv_dy2
                        qb = -2.0 * (a * inv_dy2 + b * inv_dx2)
                        qc = a * a * inv_dy2 + b * b * inv_dx2 - 1.0
                        candidate = (-qb + math.sqrt(max(qb * qb - 4.0 * qa * qc, 0.0))) / (2.0 * qa)
                    if candidate < dist[i, j]:
                        dist[i, j] = candidate
    return zeta.with_values(sign * dist)


def simulate(init: InitSpec, flow: FlowSpec, config: SimConfig) -> List[Frame]:
    """
    Advect the initial interface and capture frames at the snapshot times.

    Each snapshot time maps to its nearest step; steps requested twice are
    emitted once.

    Returns:
        Frames in increasing time order.

    Raises:
        StabilityError: When a step violates the CFL limit.
    """

    grid = config.grid
    flow = flow.bind(grid)
    zeta = initial_field(grid, init)
    requested = {}
    for t in sorted(config.snapshot_times):
        requested.setdefault(int(round(t / config.dt)), t)

    frames: List[Frame] = []
    for step in range(config.n_steps + 1):
        if step > 0:
            zeta = advect(zeta, flow, (step - 1) * config.dt, config.dt, config.interpolation)
            if config.reinit_every and step % config.reinit_every == 0:
                zeta = redistance(zeta)
        if step in requested:
            t = requested[step]
            exact = step * config.dt
            frames.append(Frame(t if abs(t - exact) <= 1e-9 * max(1.0, t) else exact, zeta))
    logger.debug("Simulated %d steps of %s, captured %d frames.", config.n_steps, flow.describe(), len(frames))
    return frames


def plan_time_steps(
    flow: FlowSpec, grid: Grid2D, t_final: float, snapshot_times: Sequence[float] = (), cfl: float = 0.5
) -> Tuple[float, int]:
    """
    Pick (dt, n_steps) reaching t_final with Courant number at most cfl.

    The step count is raised, when cheaply possible, so every snapshot time
    falls exactly on a step.
    """

    if t_final <= 0:
        return 1.0, 0
    bound = flow.bind(grid)
    speed = max(max_speed(bound, grid, t) for t in np.linspace(0.0, t_final, 5))
    n_min = 1 if speed == 0 else max(1, math.ceil(t_final * speed / (cfl * grid.min_spacing)))
    for n_steps in range(n_min, 64 * n_min + 1):
        if all(abs(t * n_steps / t_final - round(t * n_steps / t_final)) < 1e-9 for t in snapshot_times):
            return t_final / n_steps, n_steps
    return t_final / n_min, n_min


def random_flow(rng: np.random.Generator, grid: Grid2D) -> FlowSpec:
    """Draw a reversing vortex or a uniform fall for one blob simulation."""
    _, ly = grid.extent
    if rng.random() < 0.5:
        return FlowSpec.single_vortex(period=1.0, amplitude=float(rng.uniform(0.3, 0.6))).bind(grid)
    return FlowSpec.uniform_fall(float(rng.uniform(0.15, 0.35)) * ly)


def generate_blob_simulations(
    n: int,
    grid: Grid2D,
    snapshot_times: Sequence[float] = (0.0, 0.25, 0.5),
    seed: int = 0,
    flow: Optional[FlowSpec] = None,
    init: Optional[InitSpec] = None,
    cfl: float = 0.5,
    workers: Optional[int] = None,
    interpolation: Interpolation = Interpolation.LINEAR,
) -> List[List[Frame]]:
    """
    Run n independent random-blob simulations.

    Args:
        n: Number of simulations.
        grid: Simulation grid.
        snapshot_times: Times captured by each simulation.
        seed: Master seed; per-simulation seeds are spawned from it.
        flow: Flow shared by all simulations; mixed vortex/fall when None.
        init: Template for blob geometry; its seed is replaced per simulation.
        cfl: Target Courant number.
        workers: Thread count; defaults to FNO_THREADS or CPU count.
        interpolation: Departure-point interpolation for every simulation.

    Returns:
        Frame sequences in simulation order.
    """

    template = init or InitSpec.random_blobs(seed=0)
    children = np.random.SeedSequence(seed).spawn(n)

    def _run(child: np.random.SeedSequence) -> List[Frame]:
        rng = np.random.default_rng(child)
        sim_init = replace(template, seed=int(rng.integers(2**63)))
        sim_flow = flow.bind(grid) if flow is not None else random_flow(rng, grid)
        dt, n_steps = plan_time_steps(sim_flow, grid, max(snapshot_times), snapshot_times, cfl)
        config = SimConfig(grid, dt, n_steps, tuple(snapshot_times), interpolation=interpolation)
        return simulate(sim_init, sim_flow, config)

    simulations = ordered_map(_run, children, workers)
    logger.info("Generated %d blob simulations on a %dx%d grid.", n, grid.height, grid.width)
    return simulations


def _rdf_cells(frame: Frame, params: RdfParams) -> np.ndarray:
    # Cell-unit distance pushed through α and back, so stored ζ matches imported α grids.
    cells = ScalarField2D(frame.zeta.grid.unit(), frame.zeta.values / frame.zeta.grid.min_spacing)
    return alpha_to_rdf(rdf_to_alpha(cells, params), params).values


def build_forecast_dataset(frames: Sequence[Frame], epsilon: float = 1.0, provenance: str = "") -> Dataset:
    """
    Pair the initial field with every frame time: (ζ₀, t) → ζ_t.

    ζ is the RDF of the simulated fraction with ε in grid cells; times are
    normalised by the last frame time.

    Raises:
        InsufficientDataError: With fewer than three frames or a zero final time.
    """

    params = RdfParams(epsilon=epsilon)
    if len(frames) < 3:
        raise InsufficientDataError(f"Forecast dataset needs at least 3 frames, got {len(frames)}.")
    t_final = frames[-1].time
    if not t_final > 0:
        raise InsufficientDataError("Final frame time must be positive to normalise the time channel.")
    grid = frames[0].zeta.grid
    zeta0 = _rdf_cells(frames[0], params)
    n = len(frames)
    inputs = np.empty((n, 2) + grid.shape)
    targets = np.empty((n, 1) + grid.shape)
    for index, frame in enumerate(frames):
        inputs[index, 0] = zeta0
        inputs[index, 1] = frame.time / t_final
        targets[index, 0] = _rdf_cells(frame, params)
    return Dataset(grid.unit(), inputs, targets, epsilon, provenance or f"forecast frames={n} t_final={t_final}")


def build_pairs_dataset(
    simulations: Sequence[Sequence[Frame]], epsilon: float = 1.0, provenance: str = ""
) -> Dataset:
    """
    Emit (ζ₀, t₁) → ζ_{t₁} and (ζ₀, t₂) → ζ_{t₂} for each three-frame simulation.

    Raises:
        MalformedSimulationError: When a simulation does not hold exactly three
            frames with increasing times.
    """

    if not simulations:
        raise InsufficientDataError("No simulations supplied.")
    params = RdfParams(epsilon=epsilon)
    grid = simulations[0][0].zeta.grid
    inputs = np.empty((2 * len(simulations), 2) + grid.shape)
    targets = np.empty((2 * len(simulations), 1) + grid.shape)
    for index, frames in enumerate(simulations):
        if len(frames) != 3:
            raise MalformedSimulationError(f"Simulation {index} has {len(frames)} frames, expected 3.")
        times = [frame.time for frame in frames]
        if not times[0] < times[1] < times[2]:
            raise MalformedSimulationError(f"Simulation {index} frame times {times} are not increasing.")
        if any(frame.zeta.grid != grid for frame in frames):
            raise MalformedSimulationError(f"Simulation {index} uses a different grid.")
        zeta0 = _rdf_cells(frames[0], params)
        for offset, frame in enumerate(frames[1:]):
            row = 2 * index + offset
            inputs[row, 0] = zeta0
            inputs[row, 1] = frame.time
            targets[row, 0] = _rdf_cells(frame, params)
    return Dataset(
        grid.unit(), inputs, targets, epsilon, provenance or f"pairs simulations={len(simulations)}"
    )
