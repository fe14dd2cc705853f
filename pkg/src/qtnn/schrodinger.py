"""2D time-dependent Schrodinger solver for wave-packet tunnelling.

Nondimensionalisation: hbar = 1, 2m = 1, so the equation reads
``i dpsi/dt = -laplacian(psi) + V psi`` (the same convention as the
activation module's barrier formulas).  One time step is

    psi <- exp(-i V dt/2) . K(dt) . exp(-i V dt/2) psi

where K is a Peaceman-Rachford ADI pass over the kinetic term: an
x-implicit Crank-Nicolson half-step followed by a y-implicit one, each
a row of tridiagonal solves.  On a rectangle with hard walls the two
kinetic factors commute, so every factor of the step is unitary and the
discrete norm is conserved to roundoff.  The box boundary is pinned to
zero (hard walls).
"""

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels as _kernels
from .kernels import prepare_tridiag

__all__ = [
    "GridSpec",
    "BarrierKind",
    "BarrierGeometry",
    "WaveField",
    "build_potential",
    "init_gaussian_packet",
    "step",
    "Propagator",
    "probability_density",
    "field_norm",
    "region_probabilities",
    "Snapshot",
    "SimulationResult",
    "run_simulation",
]


@dataclass(frozen=True)
class GridSpec:
    nx: int = 256
    ny: int = 256
    dx: float = 0.1
    dy: float = 0.1
    dt: float = 0.005
    n_steps: int = 1000
    snapshot_stride: int = 250

    def __post_init__(self):
        if self.nx < 16 or self.ny < 16:
            raise ValueError("grid must be at least 16x16")
        if not (self.dx > 0.0 and self.dy > 0.0):
            raise ValueError("grid spacings must be positive")
        # dt < 0 is allowed so a run can be stepped backwards in time.
        if self.dt == 0.0:
            raise ValueError("dt must be nonzero")
        if self.n_steps < 0:
            raise ValueError("n_steps cannot be negative")
        if self.snapshot_stride < 1:
            raise ValueError("snapshot_stride must be >= 1")

    @property
    def x(self) -> np.ndarray:
        return np.arange(self.nx) * self.dx

    @property
    def y(self) -> np.ndarray:
        return np.arange(self.ny) * self.dy


class BarrierKind(enum.Enum):
    NONE = "none"
    RECTANGULAR = "rectangular"
    DOUBLE_SLIT = "double-slit"


@dataclass(frozen=True)
class BarrierGeometry:
    """Finite-height potential patch spanning x in [x_start, x_end].

    With ``kind`` NONE no potential is raised but the x-extent still
    divides the box into the reflected/barrier/transmitted regions.
    """

    kind: BarrierKind = BarrierKind.RECTANGULAR
    height: float = 2.0
    x_start: float = 12.25
    x_end: float = 13.25
    slit_width: float = 1.0
    slit_separation: float = 3.0
    slit_center_y: float = 12.75

    def __post_init__(self):
        if not self.x_start < self.x_end:
            raise ValueError("barrier needs x_start < x_end")
        if not self.height > 0.0:
            raise ValueError("barrier height must be positive")
        if self.kind is BarrierKind.DOUBLE_SLIT:
            if not (self.slit_width > 0.0 and self.slit_separation > 0.0):
                raise ValueError("slit width and separation must be positive")
            if self.slit_separation < self.slit_width:
                raise ValueError("slits overlap: separation smaller than width")

    @property
    def thickness(self) -> float:
        return self.x_end - self.x_start


@dataclass
class WaveField:
    psi: np.ndarray        # (nx, ny) complex
    potential: np.ndarray  # (nx, ny) real
    time: float = 0.0


def build_potential(grid: GridSpec, barrier: BarrierGeometry) -> np.ndarray:
    """Rasterise the barrier onto the grid."""
    v = np.zeros((grid.nx, grid.ny))
    if barrier.kind is BarrierKind.NONE:
        return v
    xmax = (grid.nx - 1) * grid.dx
    if barrier.x_start < 0.0 or barrier.x_end > xmax:
        raise ValueError(f"barrier x-extent [{barrier.x_start}, {barrier.x_end}] leaves the grid [0, {xmax}]")
    in_x = (grid.x >= barrier.x_start) & (grid.x <= barrier.x_end)
    v[in_x, :] = barrier.height
    if barrier.kind is BarrierKind.DOUBLE_SLIT:
        ymax = (grid.ny - 1) * grid.dy
        centers = (
            barrier.slit_center_y - 0.5 * barrier.slit_separation,
            barrier.slit_center_y + 0.5 * barrier.slit_separation,
        )
        for cy in centers:
            if cy - 0.5 * barrier.slit_width < 0.0 or cy + 0.5 * barrier.slit_width > ymax:
                raise ValueError(f"slit at y = {cy} leaves the grid [0, {ymax}]")
            open_y = np.abs(grid.y - cy) <= 0.5 * barrier.slit_width
            v[np.ix_(in_x, open_y)] = 0.0
    return v


def init_gaussian_packet(grid: GridSpec, center, sigma: float, momentum, potential=None) -> WaveField:
    """Normalised Gaussian envelope with a plane-wave momentum phase.

    psi ~ exp(-((x-x0)^2 + (y-y0)^2) / (4 sigma^2)) * exp(i (kx x + ky y)),
    zeroed on the boundary ring and normalised so sum |psi|^2 dx dy = 1.
    """
    x0, y0 = (float(center[0]), float(center[1]))
    kx, ky = (float(momentum[0]), float(momentum[1]))
    if not sigma > 2.0 * max(grid.dx, grid.dy):
        raise ValueError(f"sigma = {sigma} under-resolves the grid (need > {2.0 * max(grid.dx, grid.dy)})")
    xmax = (grid.nx - 1) * grid.dx
    ymax = (grid.ny - 1) * grid.dy
    margin = 4.0 * sigma
    if min(x0, xmax - x0) < margin or min(y0, ymax - y0) < margin:
        raise ValueError(f"packet center ({x0}, {y0}) is closer than 4 sigma = {margin} to a wall")

    xx = grid.x[:, None] - x0
    yy = grid.y[None, :] - y0
    envelope = np.exp(-(xx * xx + yy * yy) / (4.0 * sigma * sigma))
    phase = np.exp(1j * (kx * grid.x[:, None] + ky * grid.y[None, :]))
    psi = envelope * phase
    psi[0, :] = psi[-1, :] = 0.0
    psi[:, 0] = psi[:, -1] = 0.0
    psi /= math.sqrt(np.sum(np.abs(psi) ** 2) * grid.dx * grid.dy)
    if potential is None:
        potential = np.zeros((grid.nx, grid.ny))
    else:
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (grid.nx, grid.ny):
            raise ValueError("potential shape does not match the grid")
    return WaveField(psi=psi, potential=potential, time=0.0)


class Propagator:
    """Precomputed phase factors and tridiagonal LU factors for one grid."""

    def __init__(self, grid: GridSpec, potential):
        self.grid = grid
        potential = np.asarray(potential, dtype=float)
        if potential.shape != (grid.nx, grid.ny):
            raise ValueError("potential shape does not match the grid")
        self.half_phase = np.exp(-0.5j * grid.dt * potential)
        self.rx = grid.dt / (2.0 * grid.dx * grid.dx)
        self.ry = grid.dt / (2.0 * grid.dy * grid.dy)
        self.cpx, self.invdx = prepare_tridiag(grid.nx - 2, self.rx)
        self.cpy, self.invdy = prepare_tridiag(grid.ny - 2, self.ry)

    def advance(self, field: WaveField) -> WaveField:
        psi = self.half_phase * field.psi
        # resolved through the module so tests/benchmarks can swap backends
        psi = _kernels.kinetic_step(psi, self.rx, self.ry, self.cpx, self.invdx, self.cpy, self.invdy)
        psi *= self.half_phase
        if not np.all(np.isfinite(psi)):
            raise RuntimeError(
                f"non-finite field after the step ending at t = {field.time + self.grid.dt:.6g}; "
                "the integration has gone unstable"
            )
        return WaveField(psi=psi, potential=field.potential, time=field.time + self.grid.dt)


def step(field: WaveField, grid: GridSpec) -> WaveField:
    """Advance the field by one time step (builds throwaway coefficients;
    use :class:`Propagator` directly for long loops)."""
    return Propagator(grid, field.potential).advance(field)


def probability_density(field: WaveField) -> np.ndarray:
    return np.abs(field.psi) ** 2


def field_norm(field: WaveField, grid: GridSpec) -> float:
    return float(np.sum(np.abs(field.psi) ** 2) * grid.dx * grid.dy)


def region_probabilities(density, grid: GridSpec, barrier: BarrierGeometry):
    """Probability mass left of, inside, and right of the barrier extent."""
    density = np.asarray(density)
    cell = grid.dx * grid.dy
    x = grid.x
    left = x < barrier.x_start
    inside = (x >= barrier.x_start) & (x <= barrier.x_end)
    right = x > barrier.x_end
    p_left = float(density[left, :].sum() * cell)
    p_barrier = float(density[inside, :].sum() * cell)
    p_right = float(density[right, :].sum() * cell)
    return p_left, p_barrier, p_right


@dataclass
class Snapshot:
    step_index: int
    time: float
    density: np.ndarray
    p_reflected: float
    p_barrier: float
    p_transmitted: float


@dataclass
class SimulationResult:
    grid: GridSpec
    barrier: BarrierGeometry
    center: tuple
    sigma: float
    momentum: tuple
    snapshots: list = field(default_factory=list)
    final_field: WaveField | None = None


def run_simulation(grid: GridSpec, barrier: BarrierGeometry, center, sigma, momentum) -> SimulationResult:
    """Propagate a Gaussian packet against the barrier.

    Density snapshots (with reflected/barrier/transmitted probabilities)
    are captured at t = 0, every ``snapshot_stride`` steps, and after the
    final step.
    """
    potential = build_potential(grid, barrier)
    fld = init_gaussian_packet(grid, center, sigma, momentum, potential)
    prop = Propagator(grid, potential)
    result = SimulationResult(
        grid=grid, barrier=barrier, center=tuple(center), sigma=float(sigma), momentum=tuple(momentum)
    )

    def capture(step_index, f):
        density = probability_density(f)
        p_l, p_b, p_r = region_probabilities(density, grid, barrier)
        result.snapshots.append(
            Snapshot(
                step_index=step_index,
                time=f.time,
                density=density,
                p_reflected=p_l,
                p_barrier=p_b,
                p_transmitted=p_r,
            )
        )

    capture(0, fld)
    for k in range(1, grid.n_steps + 1):
        fld = prop.advance(fld)
        if k % grid.snapshot_stride == 0 or k == grid.n_steps:
            capture(k, fld)
    result.final_field = fld
    return result
