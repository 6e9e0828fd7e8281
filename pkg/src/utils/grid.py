"""
Uniform spatial grids and sampled wavefunctions

UniformGrid describes a periodic axis x_j = x_min + j dx (j = 0..count-1).
GridState is a sampled 1D wavefunction at a time stamp, GridStateND its tensor
counterpart. Derivatives and momentum-space quadratures are spectral; the
band-limited resampler evaluates the trigonometric interpolant of a GridState
at arbitrary points.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import GRID, TOLERANCES
from src.core.scales import PhysicalScales, delta
from src.validation.errors import DomainError, GridMismatchError, ResolutionError

logger = logging.getLogger(__name__)

FREE_FRAME = "free"
OSCILLATOR_FRAME = "oscillator"

# Rows of the interpolation matrix built per chunk by resample()
RESAMPLE_CHUNK = 512


@dataclass(frozen=True)
class UniformGrid:
    """Periodic uniform axis"""

    x_min: float
    dx: float
    count: int

    def __post_init__(self):
        if self.count < 0:
            raise DomainError(f"grid point count must be non-negative, got {self.count}")
        if not (math.isfinite(self.x_min) and math.isfinite(self.dx)) or self.dx <= 0.0:
            raise DomainError(f"grid spacing must be positive and finite, got dx={self.dx!r}")

    @classmethod
    def centered(cls, half_width: float, points: int, center: float = 0.0) -> "UniformGrid":
        """Window [center - half_width, center + half_width) sampled with `points` nodes"""
        if half_width <= 0.0:
            raise DomainError(f"half_width must be positive, got {half_width!r}")
        points = int(points)
        dx = 2.0 * half_width / points if points > 0 else 2.0 * half_width
        return cls(x_min=center - half_width, dx=dx, count=points)

    @classmethod
    def for_packet(
        cls,
        scales: PhysicalScales,
        n: int = 0,
        a: complex = 0j,
        r: float = 0.0,
        times: Iterable[float] = (0.0,),
        margin: Optional[float] = None,
        min_points: Optional[int] = None,
        power_of_two: bool = True,
    ) -> "UniformGrid":
        """
        Grid adapted to a squeezed-displaced number packet over a set of times

        The window covers center(t) +/- sqrt(2) L_eff(t) q_max for every t with
        L_eff = L e^{-r} |delta_r(t)| and q_max = sqrt(2n+1) + margin/sqrt(2);
        the spacing resolves |k - p0/hbar| <= e^{r} q_max / (sqrt(2) L).
        Point counts are rounded up to a power of two unless power_of_two is
        False, in which case they are rounded up to an even number.

        Raises:
            ResolutionError: if more than GRID.max_points nodes would be needed
        """
        margin = GRID.decay_margin if margin is None else margin
        L = scales.length
        x0 = 2.0 * L * complex(a).real
        p0 = scales.hbar * complex(a).imag / L
        v0 = p0 / scales.mass
        q_max = math.sqrt(2 * n + 1) + margin / math.sqrt(2.0)

        lo, hi = math.inf, -math.inf
        for t in times:
            width = math.sqrt(2.0) * L * math.exp(-r) * delta(scales, t, r).modulus * q_max
            center = x0 + v0 * t
            lo = min(lo, center - width)
            hi = max(hi, center + width)

        k_edge = abs(p0) / scales.hbar + math.exp(r) * q_max / (math.sqrt(2.0) * L)
        span = hi - lo
        needed = int(math.ceil(span * k_edge / math.pi))
        floor = GRID.min_points if min_points is None else min_points
        if power_of_two:
            points = max(floor, 1 << max(needed - 1, 1).bit_length())
        else:
            points = max(floor, needed + needed % 2)
        if points > GRID.max_points:
            raise ResolutionError(
                f"packet (n={n}, |a|={abs(a):.3g}, r={r:.3g}) needs {points} grid points, "
                f"limit is {GRID.max_points}"
            )
        return cls(x_min=lo, dx=span / points, count=points)

    @property
    def x(self) -> np.ndarray:
        return self.x_min + self.dx * np.arange(self.count)

    @property
    def k(self) -> np.ndarray:
        """Angular wavenumbers in numpy FFT order"""
        return 2.0 * np.pi * np.fft.fftfreq(self.count, d=self.dx)

    @property
    def length(self) -> float:
        return self.count * self.dx

    @property
    def x_max(self) -> float:
        return self.x_min + (self.count - 1) * self.dx

    def contains(self, points: np.ndarray) -> np.ndarray:
        """Mask of points inside the periodic window [x_min, x_min + length)"""
        points = np.asarray(points, dtype=float)
        return (points >= self.x_min) & (points < self.x_min + self.length)

    def scaled(self, factor: float) -> "UniformGrid":
        """Grid with every node multiplied by factor (> 0)"""
        if factor <= 0.0:
            raise DomainError(f"grid scale factor must be positive, got {factor!r}")
        return UniformGrid(x_min=self.x_min * factor, dx=self.dx * factor, count=self.count)

    def matches(self, other: "UniformGrid") -> bool:
        scale = max(abs(self.x_min), self.length, 1.0)
        return (
            self.count == other.count
            and abs(self.x_min - other.x_min) <= 1e-12 * scale
            and abs(self.dx - other.dx) <= 1e-12 * self.dx
        )

    def to_dict(self) -> dict:
        return {"x_min": self.x_min, "dx": self.dx, "count": self.count}


def grid_from_block(block, scales: PhysicalScales, stretch: float = 1.0) -> UniformGrid:
    """Grid of a RunConfig grid block (half_width and center in units of L), widened by stretch"""
    L = scales.length
    return UniformGrid.centered(block.half_width * L * stretch, block.points, block.center * L)


def require_same_grid(first: UniformGrid, second: UniformGrid) -> None:
    if not first.matches(second):
        raise GridMismatchError(f"grids differ: {first.to_dict()} vs {second.to_dict()}")


# ---------------------------------------------------------------------------
# N-dimensional quadratures shared by GridState and GridStateND
# ---------------------------------------------------------------------------

def _axis_vectors(grids: Sequence[UniformGrid], values_of) -> List[np.ndarray]:
    vectors = []
    for axis, grid in enumerate(grids):
        shape = [1] * len(grids)
        shape[axis] = grid.count
        vectors.append(values_of(grid).reshape(shape))
    return vectors


def position_moments(samples: np.ndarray, grids: Sequence[UniformGrid]) -> Tuple[np.ndarray, np.ndarray]:
    """Per-axis <x_i> and Var(x_i) of |psi|^2 (normalized by the sampled norm)"""
    density = np.abs(samples) ** 2
    total = density.sum()
    means, variances = [], []
    for xi in _axis_vectors(grids, lambda g: g.x):
        mean = float((density * xi).sum() / total)
        means.append(mean)
        variances.append(float((density * (xi - mean) ** 2).sum() / total))
    return np.array(means), np.array(variances)


def momentum_moments(
    samples: np.ndarray, grids: Sequence[UniformGrid], hbar: float
) -> Tuple[np.ndarray, np.ndarray]:
    """Per-axis <p_i> and Var(p_i) by Fourier-space quadrature"""
    spectral = np.abs(np.fft.fftn(samples)) ** 2
    total = spectral.sum()
    means, variances = [], []
    for ki in _axis_vectors(grids, lambda g: g.k):
        pi = hbar * ki
        mean = float((spectral * pi).sum() / total)
        means.append(mean)
        variances.append(float((spectral * (pi - mean) ** 2).sum() / total))
    return np.array(means), np.array(variances)


@dataclass
class GridState:
    """Sampled complex wavefunction on a uniform grid at time t"""

    samples: np.ndarray
    grid: UniformGrid
    t: float
    scales: PhysicalScales
    frame: str = FREE_FRAME

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        if self.samples.shape != (self.grid.count,):
            raise GridMismatchError(
                f"samples shape {self.samples.shape} does not match grid of {self.grid.count} points"
            )
        if self.frame not in (FREE_FRAME, OSCILLATOR_FRAME):
            raise DomainError(f"unknown frame {self.frame!r}")

    @property
    def x(self) -> np.ndarray:
        return self.grid.x

    def density(self) -> np.ndarray:
        return np.abs(self.samples) ** 2

    def norm(self) -> float:
        """Squared L2 norm (trapezoid rule on the periodic grid)"""
        return float(self.density().sum() * self.grid.dx)

    def inner(self, other: "GridState") -> complex:
        """<self, other>, conjugate-linear in self"""
        require_same_grid(self.grid, other.grid)
        return complex(np.vdot(self.samples, other.samples) * self.grid.dx)

    def with_samples(self, samples: np.ndarray, t: Optional[float] = None) -> "GridState":
        return GridState(
            samples=samples,
            grid=self.grid,
            t=self.t if t is None else t,
            scales=self.scales,
            frame=self.frame,
        )

    def normalized(self) -> "GridState":
        norm = self.norm()
        if norm <= 0.0:
            raise DomainError("cannot normalize a zero state")
        return self.with_samples(self.samples / math.sqrt(norm))

    def derivative(self, order: int = 1) -> np.ndarray:
        """Spectral d^order/dx^order; the Nyquist mode is dropped for odd orders"""
        return spectral_derivative(self.samples, self.grid, order)

    def edge_amplitude(self) -> float:
        """Largest end-point amplitude relative to the peak amplitude"""
        peak = np.max(np.abs(self.samples)) if self.grid.count else 0.0
        if peak == 0.0:
            return 0.0
        return float(max(abs(self.samples[0]), abs(self.samples[-1])) / peak)

    def require_resolved(self, tolerance: Optional[float] = None) -> None:
        """
        Raise ResolutionError when the state touches the window edges

        Spectral operators assume periodic wraparound is negligible.
        """
        tolerance = TOLERANCES.boundary_amplitude if tolerance is None else tolerance
        edge = self.edge_amplitude()
        if edge > tolerance:
            raise ResolutionError(
                f"edge amplitude {edge:.3e} exceeds {tolerance:.1e}: widen the grid window",
                deviation=edge,
                tolerance=tolerance,
            )

    def edge_density(self, cells: int = 2) -> float:
        """Largest density in the outermost cells relative to the peak density"""
        density = self.density()
        peak = density.max() if density.size else 0.0
        if peak == 0.0:
            return 0.0
        return float(max(density[:cells].max(), density[-cells:].max()) / peak)

    def occupied_band(self, threshold: float) -> float:
        """Largest |k| whose spectral density exceeds threshold * peak"""
        spectral = np.abs(np.fft.fft(self.samples)) ** 2
        peak = spectral.max()
        if peak == 0.0:
            return 0.0
        return float(np.max(np.abs(self.grid.k[spectral > threshold * peak])))

    def occupied_region(self, threshold: float) -> np.ndarray:
        """Mask of nodes whose density exceeds threshold * peak"""
        density = self.density()
        return density > threshold * density.max()


@dataclass
class GridStateND:
    """Sampled wavefunction on a tensor product of uniform grids"""

    samples: np.ndarray
    grids: Tuple[UniformGrid, ...]
    t: float
    scales: PhysicalScales
    labels: Tuple[str, ...] = field(default=())

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=complex)
        self.grids = tuple(self.grids)
        expected = tuple(grid.count for grid in self.grids)
        if self.samples.shape != expected:
            raise GridMismatchError(f"samples shape {self.samples.shape} does not match grids {expected}")
        if not self.labels:
            self.labels = tuple("xyz"[i] if i < 3 else f"x{i}" for i in range(len(self.grids)))

    @property
    def dimension(self) -> int:
        return len(self.grids)

    @property
    def cell_volume(self) -> float:
        return float(np.prod([grid.dx for grid in self.grids]))

    def mesh(self) -> List[np.ndarray]:
        return np.meshgrid(*[grid.x for grid in self.grids], indexing="ij")

    def norm(self) -> float:
        return float((np.abs(self.samples) ** 2).sum() * self.cell_volume)

    def inner(self, other: "GridStateND") -> complex:
        if len(self.grids) != len(other.grids):
            raise GridMismatchError("states have different dimensions")
        for mine, theirs in zip(self.grids, other.grids):
            require_same_grid(mine, theirs)
        return complex(np.vdot(self.samples, other.samples) * self.cell_volume)


def spectral_derivative(samples: np.ndarray, grid: UniformGrid, order: int = 1) -> np.ndarray:
    if order < 0:
        raise DomainError(f"derivative order must be non-negative, got {order}")
    if order == 0:
        return np.array(samples, dtype=complex)
    k = grid.k
    factor = (1j * k) ** order
    if order % 2 == 1 and grid.count % 2 == 0:
        factor[grid.count // 2] = 0.0
    return np.fft.ifft(factor * np.fft.fft(samples))


def resample(state: GridState, points: np.ndarray) -> np.ndarray:
    """
    Band-limited interpolation of a GridState at arbitrary points

    Evaluates the trigonometric interpolant sum_k c_k exp(i k (y - x_min)) in
    chunks; points outside the periodic window are set to zero. The Nyquist
    coefficient is dropped (it is below tolerance for resolved states).
    """
    points = np.asarray(points, dtype=float)
    flat = points.ravel()
    result = np.zeros(flat.shape, dtype=complex)
    grid = state.grid
    if grid.count == 0 or flat.size == 0:
        return result.reshape(points.shape)

    coefficients = np.fft.fft(state.samples) / grid.count
    k = grid.k
    if grid.count % 2 == 0:
        coefficients[grid.count // 2] = 0.0

    inside = np.flatnonzero(grid.contains(flat))
    for start in range(0, inside.size, RESAMPLE_CHUNK):
        idx = inside[start:start + RESAMPLE_CHUNK]
        offsets = flat[idx] - grid.x_min
        result[idx] = np.exp(1j * np.outer(offsets, k)) @ coefficients
    return result.reshape(points.shape)


def kinetic_phase(grid: UniformGrid, scales: PhysicalScales, dt: float) -> np.ndarray:
    """Free drift multiplier exp(-i hbar k^2 dt / 2m) in FFT order"""
    return np.exp(-1j * scales.hbar * grid.k ** 2 * dt / (2.0 * scales.mass))


def free_evolve(state: GridState, t: float) -> GridState:
    """Exact free evolution of a GridState to time t (one spectral drift)"""
    dt = t - state.t
    if dt == 0.0:
        return state.with_samples(state.samples.copy())
    samples = np.fft.ifft(kinetic_phase(state.grid, state.scales, dt) * np.fft.fft(state.samples))
    return state.with_samples(samples, t=t)
