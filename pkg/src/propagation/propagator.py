"""
Split-step spectral propagator

Second-order Strang splitting (half kick, drift, half kick) on a periodic
uniform grid. Time-dependent potentials are sampled at the step midpoint.
Free evolution is a single exact drift.

Time step selection, for phase criteria evaluated on the occupied part of the
state (density or spectral density above PROPAGATION.occupied_band_threshold
of the peak):
    kinetic    hbar k_occ^2 dt / 2m <= pi / safety
    potential  max|V| dt / hbar     <= pi / safety
    harmonic   at least PROPAGATION.steps_per_period steps per trap period
"""

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field, replace
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np
from tqdm import tqdm

from src.config.settings import PROPAGATION, TOLERANCES
from src.core.scales import PhysicalScales
from src.utils.grid import GridState, UniformGrid, kinetic_phase
from src.validation.errors import DomainError, ResolutionError, StabilityError

logger = logging.getLogger(__name__)


class Potential(ABC):
    """V(x, t) on the grid"""

    time_dependent: bool = False

    @abstractmethod
    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        ...

    @property
    def trap_frequency(self) -> Optional[float]:
        """Largest harmonic frequency contained in the potential"""
        return None

    @property
    def is_free(self) -> bool:
        return False

    def __add__(self, other: "Potential") -> "SumPotential":
        return SumPotential([self, other])

    def describe(self) -> dict:
        return {"kind": type(self).__name__}


class FreePotential(Potential):
    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    @property
    def is_free(self) -> bool:
        return True

    def describe(self) -> dict:
        return {"kind": "free"}


@dataclass
class HarmonicPotential(Potential):
    """m omega^2 (x - center)^2 / 2"""

    mass: float
    omega: float
    center: float = 0.0

    def __post_init__(self):
        if not (self.mass > 0.0 and self.omega > 0.0):
            raise DomainError(f"harmonic potential needs m > 0 and omega > 0, got {self.mass}, {self.omega}")

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        return 0.5 * self.mass * self.omega ** 2 * (np.asarray(x, dtype=float) - self.center) ** 2

    @property
    def trap_frequency(self) -> Optional[float]:
        return self.omega

    def describe(self) -> dict:
        return {"kind": "harmonic", "omega": self.omega, "center": self.center}


@dataclass
class LinearForcePotential(Potential):
    """V(x, t) = -f(t) x"""

    force: Callable[[float], float]
    time_dependent: bool = True

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        return -float(self.force(t)) * np.asarray(x, dtype=float)

    def describe(self) -> dict:
        return {"kind": "linear_force"}


@dataclass
class SquarePotential(Potential):
    """
    height on [left, right), zero elsewhere (barrier for height > 0, well for < 0)

    edge_width > 0 replaces both jumps by tanh ramps of that width; the
    integral height * (right - left) is unchanged.
    """

    height: float
    left: float
    right: float
    edge_width: float = 0.0

    def __post_init__(self):
        if not self.left < self.right:
            raise DomainError(f"square potential needs left < right, got [{self.left}, {self.right}]")
        if not (math.isfinite(self.edge_width) and self.edge_width >= 0.0):
            raise DomainError(f"edge width must be non-negative and finite, got {self.edge_width!r}")

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.edge_width > 0.0:
            return 0.5 * self.height * (
                np.tanh((x - self.left) / self.edge_width) - np.tanh((x - self.right) / self.edge_width)
            )
        return np.where((x >= self.left) & (x < self.right), self.height, 0.0)

    def softened(self, edge_width: float) -> "SquarePotential":
        return replace(self, edge_width=edge_width)

    def describe(self) -> dict:
        return {
            "kind": "square",
            "height": self.height,
            "left": self.left,
            "right": self.right,
            "edge_width": self.edge_width,
        }


@dataclass
class CustomPotential(Potential):
    function: Callable[[np.ndarray, float], np.ndarray]
    time_dependent: bool = True

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        return np.asarray(self.function(x, t), dtype=float)


@dataclass
class SumPotential(Potential):
    terms: List[Potential] = field(default_factory=list)

    def __post_init__(self):
        flat = []
        for term in self.terms:
            flat.extend(term.terms if isinstance(term, SumPotential) else [term])
        self.terms = flat
        self.time_dependent = any(term.time_dependent for term in self.terms)

    def __call__(self, x: np.ndarray, t: float) -> np.ndarray:
        total = np.zeros_like(np.asarray(x, dtype=float))
        for term in self.terms:
            total = total + term(x, t)
        return total

    @property
    def trap_frequency(self) -> Optional[float]:
        frequencies = [term.trap_frequency for term in self.terms if term.trap_frequency]
        return max(frequencies) if frequencies else None

    @property
    def is_free(self) -> bool:
        return all(term.is_free for term in self.terms)

    def describe(self) -> dict:
        return {"kind": "sum", "terms": [term.describe() for term in self.terms]}


@dataclass
class AbsorbingLayer:
    """
    Damping layer at both window edges

    Within the outer `fraction` of the window on each side every step
    multiplies the wave by exp(-rate * ramp(x) * |dt|), where ramp rises from 0
    at the inner boundary to 1 at the edge as depth ** power. The rate is
    `strength` divided by the time a Nyquist-velocity component needs to cross
    the layer, so nothing the grid can carry wraps around the window.
    """

    fraction: float = PROPAGATION.absorber_fraction
    strength: float = PROPAGATION.absorber_strength
    power: int = PROPAGATION.absorber_power

    def __post_init__(self):
        if not 0.0 < self.fraction < 0.5:
            raise DomainError(f"absorber fraction must lie in (0, 0.5), got {self.fraction!r}")
        if not (math.isfinite(self.strength) and self.strength > 0.0):
            raise DomainError(f"absorber strength must be positive and finite, got {self.strength!r}")
        if self.power < 1:
            raise DomainError(f"absorber power must be at least 1, got {self.power!r}")

    def ramp(self, grid: UniformGrid) -> np.ndarray:
        width = self.fraction * grid.length
        distance = np.minimum(grid.x - grid.x_min, grid.x_min + grid.length - grid.x)
        return np.clip((width - distance) / width, 0.0, 1.0) ** self.power

    def interior(self, grid: UniformGrid) -> np.ndarray:
        """Mask of nodes the layer leaves untouched"""
        return self.ramp(grid) == 0.0

    def rate(self, grid: UniformGrid, scales: PhysicalScales) -> float:
        nyquist_velocity = scales.hbar * math.pi / (scales.mass * grid.dx)
        return self.strength * nyquist_velocity / (self.fraction * grid.length)

    def mask(self, grid: UniformGrid, scales: PhysicalScales, dt: float) -> np.ndarray:
        return np.exp(-self.rate(grid, scales) * self.ramp(grid) * abs(dt))


@dataclass
class StepPlan:
    """Resolved step size and the criterion that set it"""

    steps: int
    dt: float
    limiting: str
    kinetic_phase: float
    potential_phase: float


def _potential_peak(potential: Potential, state: GridState, t_start: float, t_end: float) -> float:
    region = state.occupied_region(PROPAGATION.occupied_band_threshold)
    x = state.x[region]
    times = (t_start, 0.5 * (t_start + t_end), t_end) if potential.time_dependent else (t_start,)
    return max(float(np.max(np.abs(potential(x, t)))) if x.size else 0.0 for t in times)


def plan_steps(
    state: GridState,
    potential: Potential,
    duration: float,
    dt: Optional[float] = None,
    steps: Optional[int] = None,
) -> StepPlan:
    """
    Number of steps for a segment

    Raises:
        StabilityError: when an explicit dt or step count gives a phase per
            step above pi
    """
    scales = state.scales
    k_occ = state.occupied_band(PROPAGATION.occupied_band_threshold)
    kinetic_rate = scales.hbar * k_occ ** 2 / (2.0 * scales.mass)
    potential_rate = _potential_peak(potential, state, state.t, state.t + duration) / scales.hbar
    span = abs(duration)

    if steps is None and dt is None:
        safety = PROPAGATION.dt_safety
        candidates = [("kinetic", math.pi / (safety * kinetic_rate) if kinetic_rate > 0 else math.inf)]
        candidates.append(("potential", math.pi / (safety * potential_rate) if potential_rate > 0 else math.inf))
        if potential.trap_frequency:
            period = 2.0 * math.pi / potential.trap_frequency
            candidates.append(("trap_period", period / PROPAGATION.steps_per_period))
        limiting, dt_max = min(candidates, key=lambda item: item[1])
        steps = max(1, int(math.ceil(span / dt_max))) if math.isfinite(dt_max) else 1
    else:
        limiting = "explicit"
        if steps is None:
            if dt <= 0.0:
                raise DomainError(f"dt must be positive, got {dt!r}")
            steps = max(1, int(round(span / dt)))
        if steps < 1:
            raise DomainError(f"steps must be positive, got {steps}")

    step = span / steps
    plan = StepPlan(
        steps=steps,
        dt=math.copysign(step, duration) if duration else 0.0,
        limiting=limiting,
        kinetic_phase=kinetic_rate * step,
        potential_phase=potential_rate * step,
    )
    if limiting == "explicit" and max(plan.kinetic_phase, plan.potential_phase) > math.pi:
        raise StabilityError(
            f"phase per step {max(plan.kinetic_phase, plan.potential_phase):.3f} exceeds pi; reduce dt",
            deviation=max(plan.kinetic_phase, plan.potential_phase),
            tolerance=math.pi,
        )
    return plan


def evolve(
    state: GridState,
    potential: Potential,
    t_span: Tuple[float, float],
    dt: Optional[float] = None,
    steps: Optional[int] = None,
    check_window: bool = True,
    absorber: Optional[AbsorbingLayer] = None,
) -> GridState:
    """
    Propagate state from t_span[0] to t_span[1] under potential

    Args:
        state: Initial state; its time stamp must equal t_span[0]
        potential: Potential (free potentials use one exact drift)
        t_span: (t_start, t_end)
        dt: Explicit step (rounded to divide the span)
        steps: Explicit number of steps (overrides dt)
        check_window: Raise when the final edge density exceeds the tolerance
        absorber: Optional edge layer; the evolution is then no longer unitary and
            free potentials are stepped instead of drifted exactly

    Raises:
        StabilityError: explicit step violates the phase criterion
        ResolutionError: the evolved state reaches the window edges
    """
    t_start, t_end = float(t_span[0]), float(t_span[1])
    if abs(state.t - t_start) > 1e-12 * max(1.0, abs(t_start)):
        raise DomainError(f"state is at t={state.t}, span starts at {t_start}")
    duration = t_end - t_start
    if duration == 0.0:
        return state.with_samples(state.samples.copy(), t=t_end)

    grid, scales = state.grid, state.scales
    if potential.is_free and absorber is None:
        samples = np.fft.ifft(kinetic_phase(grid, scales, duration) * np.fft.fft(state.samples))
        result = state.with_samples(samples, t=t_end)
        plan_label = "exact drift"
    else:
        plan = plan_steps(state, potential, duration, dt=dt, steps=steps)
        logger.debug(
            f"evolve {plan.steps} steps dt={plan.dt:.4g} ({plan.limiting}); "
            f"phase/step kinetic {plan.kinetic_phase:.3g}, potential {plan.potential_phase:.3g}"
        )
        damping = None if absorber is None else absorber.mask(grid, scales, plan.dt)
        samples = _strang(state.samples, grid.x, kinetic_phase(grid, scales, plan.dt), potential,
                          t_start, plan, scales.hbar, damping)
        result = state.with_samples(samples, t=t_end)
        plan_label = f"{plan.steps} steps"

    if check_window:
        edge = result.edge_density()
        if edge > TOLERANCES.window_overflow_density:
            raise ResolutionError(
                f"window overflow after {plan_label}: edge density {edge:.3e} relative to peak",
                deviation=edge,
                tolerance=TOLERANCES.window_overflow_density,
            )
    return result


def _strang(
    samples: np.ndarray,
    x: np.ndarray,
    drift: np.ndarray,
    potential: Potential,
    t_start: float,
    plan: StepPlan,
    hbar: float,
    damping: Optional[np.ndarray] = None,
) -> np.ndarray:
    psi = np.array(samples, dtype=complex)
    iterator = range(plan.steps)
    if PROPAGATION.show_progress and plan.steps >= PROPAGATION.progress_min_steps:
        iterator = tqdm(iterator, desc="split-step", unit="step")

    if not potential.time_dependent:
        half = np.exp(-0.5j * potential(x, t_start) * plan.dt / hbar)
        full = half * half
        psi *= half
        for index in iterator:
            psi = np.fft.ifft(drift * np.fft.fft(psi))
            if damping is not None:
                psi *= damping
            psi *= full if index < plan.steps - 1 else half
        return psi

    for index in iterator:
        half = np.exp(-0.5j * potential(x, t_start + (index + 0.5) * plan.dt) * plan.dt / hbar)
        psi *= half
        psi = np.fft.ifft(drift * np.fft.fft(psi))
        if damping is not None:
            psi *= damping
        psi *= half
    return psi


def harmonic_potential(scales: PhysicalScales, omega: Optional[float] = None, center: float = 0.0) -> HarmonicPotential:
    return HarmonicPotential(mass=scales.mass, omega=scales.omega if omega is None else omega, center=center)


def convergence_order(errors: Sequence[float]) -> List[float]:
    """log2 of successive error ratios under step halving"""
    return [math.log2(coarse / fine) for coarse, fine in zip(errors[:-1], errors[1:]) if fine > 0]
