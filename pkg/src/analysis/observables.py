"""
Quadratures on sampled states

Position moments are taken in direct space, momentum moments in Fourier
space; both are trapezoidal sums on the periodic grid. The number operator
expectation uses the conserved position X_t = x - t P / m:

    hbar omega <N> = <P^2> / 2m + m omega^2 <X_t^2> / 2
    <X_t^2> = <x^2> - (2t/m) Re<x P> + (t/m)^2 <P^2>
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config.settings import TOLERANCES
from src.core.scales import PhysicalScales, delta
from src.states.states_1d import StateSpec1D, evaluate, sample
from src.utils.grid import (
    OSCILLATOR_FRAME,
    GridState,
    GridStateND,
    UniformGrid,
    momentum_moments,
    position_moments,
    require_same_grid,
)
from src.validation.errors import DomainError, GridMismatchError, ResolutionError

logger = logging.getLogger(__name__)


@dataclass
class MomentReport:
    """Moments of a state at one time stamp; per-axis entries are lists"""

    t: float
    norm: float
    mean_x: List[float]
    mean_p: List[float]
    delta_x: List[float]
    delta_p: List[float]
    covariance_xp: List[float]
    energy: float
    number: Optional[float] = None
    hbar: float = 1.0

    @property
    def products(self) -> List[float]:
        return [dx * dp for dx, dp in zip(self.delta_x, self.delta_p)]

    @property
    def product_trace(self) -> float:
        return float(sum(self.products))

    def check_uncertainty_floor(self) -> None:
        """
        Raises:
            ResolutionError: if a product falls below hbar/2 (1 - slack)
        """
        floor = 0.5 * self.hbar * (1.0 - TOLERANCES.uncertainty_floor_slack)
        for axis, product in enumerate(self.products):
            if not (self.delta_x[axis] > 0.0 and self.delta_p[axis] > 0.0) or product < floor:
                raise ResolutionError(
                    f"axis {axis}: dx*dp = {product:.12g} is below hbar/2; the grid under-resolves the state",
                    deviation=0.5 * self.hbar - product,
                    tolerance=0.5 * self.hbar * TOLERANCES.uncertainty_floor_slack,
                )

    def to_dict(self) -> dict:
        return {
            "t": self.t,
            "norm": self.norm,
            "mean_x": list(self.mean_x),
            "mean_p": list(self.mean_p),
            "delta_x": list(self.delta_x),
            "delta_p": list(self.delta_p),
            "dx_dp": self.products,
            "covariance_xp": list(self.covariance_xp),
            "number": self.number,
            "energy": self.energy,
        }


def _check_norm(norm: float) -> None:
    deficit = abs(norm - 1.0)
    if deficit > TOLERANCES.norm_deficit:
        raise ResolutionError(
            f"sampled norm {norm:.9f} deviates from 1 by {deficit:.2e}: the grid under-resolves the state",
            deviation=deficit,
            tolerance=TOLERANCES.norm_deficit,
        )


def moments(
    state: Union[GridState, StateSpec1D],
    t: Optional[float] = None,
    grid: Optional[UniformGrid] = None,
    check_floor: bool = True,
) -> MomentReport:
    """
    MomentReport of a sampled state or of a spec evaluated at t

    Raises:
        ResolutionError: norm deficit above TOLERANCES.norm_deficit, or an
            uncertainty product below the floor
    """
    if isinstance(state, StateSpec1D):
        if t is None:
            raise DomainError("a time is required to take moments of a spec")
        state = sample(state, t, grid)
    scales = state.scales
    norm = state.norm()
    _check_norm(norm)

    (mean_x,), (var_x,) = position_moments(state.samples, (state.grid,))
    (mean_p,), (var_p,) = momentum_moments(state.samples, (state.grid,), scales.hbar)
    # Re<x P> from -i hbar x d/dx
    x_p = float((np.vdot(state.samples, state.x * (-1j * scales.hbar) * state.derivative()) * state.grid.dx).real / norm)
    covariance = x_p - mean_x * mean_p

    second_x = var_x + mean_x ** 2
    second_p = var_p + mean_p ** 2
    lag = 0.0 if state.frame == OSCILLATOR_FRAME else state.t / scales.mass
    conserved_x2 = second_x - 2.0 * lag * x_p + lag ** 2 * second_p
    number = (second_p / (2.0 * scales.mass) + 0.5 * scales.mass * scales.omega ** 2 * conserved_x2) / (
        scales.hbar * scales.omega
    )

    report = MomentReport(
        t=state.t,
        norm=norm,
        mean_x=[mean_x],
        mean_p=[mean_p],
        delta_x=[math.sqrt(var_x)],
        delta_p=[math.sqrt(var_p)],
        covariance_xp=[covariance],
        energy=second_p / (2.0 * scales.mass),
        number=number,
        hbar=scales.hbar,
    )
    if check_floor:
        report.check_uncertainty_floor()
    return report


def moments_nd(state: GridStateND, check_floor: bool = True) -> MomentReport:
    """Per-axis MomentReport of a tensor-grid state; <N> is not reported"""
    norm = state.norm()
    _check_norm(norm)
    hbar = state.scales.hbar
    mean_x, var_x = position_moments(state.samples, state.grids)
    mean_p, var_p = momentum_moments(state.samples, state.grids, hbar)

    covariances = []
    for axis, grid in enumerate(state.grids):
        shape = [1] * state.dimension
        shape[axis] = grid.count
        factor = (1j * grid.k)
        if grid.count % 2 == 0:
            factor[grid.count // 2] = 0.0
        derivative = np.fft.ifft(factor.reshape(shape) * np.fft.fft(state.samples, axis=axis), axis=axis)
        x_p = float((np.vdot(state.samples, grid.x.reshape(shape) * (-1j * hbar) * derivative)
                     * state.cell_volume).real / norm)
        covariances.append(x_p - mean_x[axis] * mean_p[axis])

    report = MomentReport(
        t=state.t,
        norm=norm,
        mean_x=[float(v) for v in mean_x],
        mean_p=[float(v) for v in mean_p],
        delta_x=[math.sqrt(v) for v in var_x],
        delta_p=[math.sqrt(v) for v in var_p],
        covariance_xp=covariances,
        energy=float(np.sum(var_p + mean_p ** 2)) / (2.0 * state.scales.mass),
        hbar=hbar,
    )
    if check_floor:
        report.check_uncertainty_floor()
    return report


def expected_uncertainty(scales: PhysicalScales, n: int, t: float) -> float:
    """(n + 1/2) hbar |delta(t)|"""
    return (n + 0.5) * scales.hbar * delta(scales, t).modulus


def _common_grid(specs: Sequence[StateSpec1D], t: float) -> UniformGrid:
    grids = [UniformGrid.for_packet(spec.scales, spec.n, spec.a, spec.r, times=(t,)) for spec in specs]
    lo = min(grid.x_min for grid in grids)
    hi = max(grid.x_min + grid.length for grid in grids)
    dx = min(grid.dx for grid in grids)
    points = int(math.ceil((hi - lo) / dx))
    points += points % 2
    return UniformGrid(x_min=lo, dx=(hi - lo) / points, count=points)


def overlap(
    first: Union[GridState, GridStateND, StateSpec1D],
    second: Union[GridState, GridStateND, StateSpec1D],
    t: Optional[float] = None,
    grid: Optional[UniformGrid] = None,
) -> complex:
    """
    <first, second>, conjugate-linear in first

    Two specs are sampled on a common grid at t; a spec paired with a sampled
    state is evaluated on that state's grid.

    Raises:
        GridMismatchError: sampled states on different grids
    """
    first_is_spec = isinstance(first, StateSpec1D)
    second_is_spec = isinstance(second, StateSpec1D)
    if first_is_spec and second_is_spec:
        if t is None:
            raise DomainError("a time is required to overlap two specs")
        grid = _common_grid([first, second], t) if grid is None else grid
        first, second = sample(first, t, grid), sample(second, t, grid)
    elif first_is_spec:
        first = second.with_samples(evaluate(first, second.x, second.t))
    elif second_is_spec:
        second = first.with_samples(evaluate(second, first.x, first.t))

    if type(first) is not type(second):
        raise GridMismatchError("cannot overlap a 1D state with an N-dimensional one")
    if isinstance(first, GridState):
        require_same_grid(first.grid, second.grid)
    return first.inner(second)


def fidelity(first, second, **kwargs) -> float:
    """|<first, second>| for normalized inputs"""
    return abs(overlap(first, second, **kwargs))


def smoothed_density(density: np.ndarray, cells: int) -> np.ndarray:
    if cells <= 1:
        return np.asarray(density, dtype=float)
    kernel = np.ones(cells) / cells
    return np.convolve(density, kernel, mode="same")


def count_humps(
    state: Union[GridState, np.ndarray],
    region: Optional[np.ndarray] = None,
    threshold: Optional[float] = None,
    smoothing_cells: Optional[int] = None,
) -> int:
    """
    Number of local maxima of the smoothed density above threshold * peak

    Args:
        state: GridState or a density profile
        region: Optional boolean mask restricting the search
        threshold: Relative height (default TOLERANCES.hump_threshold)
        smoothing_cells: Moving-average width (default TOLERANCES.hump_smoothing_cells)
    """
    threshold = TOLERANCES.hump_threshold if threshold is None else threshold
    cells = TOLERANCES.hump_smoothing_cells if smoothing_cells is None else smoothing_cells
    density = state.density() if isinstance(state, GridState) else np.asarray(state, dtype=float)
    if region is not None:
        density = density[region]
    if density.size < 3:
        return 0
    profile = smoothed_density(density, cells)
    peak = profile.max()
    if peak <= 0.0:
        return 0
    rising = np.diff(profile)
    maxima = (rising[:-1] > 0.0) & (rising[1:] <= 0.0) & (profile[1:-1] > threshold * peak)
    return int(np.count_nonzero(maxima))


@dataclass
class SqueezeEstimate:
    """
    Gaussian squeeze read off the covariance in the units u = x/L, v = 2Lp/hbar

    principal is r >= 0 of the principal axes, position the signed exponent
    of the position width (Delta x = L e^{-r} for a squeezed vacuum).
    """

    principal: float
    position: float
    sigma_uu: float
    sigma_vv: float
    sigma_uv: float
    determinant: float = field(default=1.0)

    def to_dict(self) -> dict:
        return {
            "principal": self.principal,
            "position": self.position,
            "sigma_uu": self.sigma_uu,
            "sigma_vv": self.sigma_vv,
            "sigma_uv": self.sigma_uv,
            "determinant": self.determinant,
        }


def squeeze_from_covariance(report: MomentReport, scales: PhysicalScales) -> SqueezeEstimate:
    """Squeeze estimate of a 1D report; the covariance is normalized to unit determinant"""
    L, hbar = scales.length, scales.hbar
    sigma_uu = (report.delta_x[0] / L) ** 2
    sigma_vv = (2.0 * L * report.delta_p[0] / hbar) ** 2
    sigma_uv = 2.0 * report.covariance_xp[0] / hbar
    determinant = sigma_uu * sigma_vv - sigma_uv ** 2
    if determinant <= 0.0:
        raise ResolutionError(f"covariance determinant {determinant:.3e} is not positive")
    scale = math.sqrt(determinant)
    principal = 0.5 * math.acosh(max(1.0, 0.5 * (sigma_uu + sigma_vv) / scale))
    position = -0.5 * math.log(sigma_uu / scale)
    return SqueezeEstimate(
        principal=principal,
        position=position,
        sigma_uu=sigma_uu,
        sigma_vv=sigma_vv,
        sigma_uv=sigma_uv,
        determinant=determinant,
    )


def density_drift(reference: GridState, other: GridState) -> float:
    """L1 distance of the two densities"""
    require_same_grid(reference.grid, other.grid)
    return float(np.sum(np.abs(other.density() - reference.density())) * reference.grid.dx)


def centroid(state: GridState, region: Optional[np.ndarray] = None) -> Tuple[float, float]:
    """(weight, centroid) of the density, optionally inside a mask"""
    density = state.density()
    x = state.x
    if region is not None:
        density, x = density[region], x[region]
    weight = float(density.sum() * state.grid.dx)
    if weight == 0.0:
        return 0.0, float("nan")
    return weight, float((density * x).sum() * state.grid.dx / weight)
