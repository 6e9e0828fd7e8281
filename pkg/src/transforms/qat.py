"""
Quantum Arnold Transformation

Maps oscillator-frame wavefunctions psi'(x', t') to free-particle
wavefunctions psi(x, t) and back:

    psi'(x', t') = u2^{-1/2} exp(i m du2 x'^2 / (2 hbar W u2)) psi(x'/u2, u1/u2)

with u1, u2 two solutions of the classical equation of motion, u1(0) = 0,
u2(0) = 1, and W = du1 u2 - u1 du2. The harmonic pair u1 = sin(w t')/w,
u2 = cos(w t') has W = 1. Only the first focal cell (u2 > 0) is supported.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
from scipy.optimize import brentq

from src.config.settings import TOLERANCES
from src.core.scales import PhysicalScales
from src.states.states_1d import StateSpec1D, evaluate
from src.utils.grid import FREE_FRAME, OSCILLATOR_FRAME, GridState, UniformGrid, resample
from src.validation.errors import DomainError, FocalPointError

logger = logging.getLogger(__name__)

TimeFunction = Callable[[float], float]
AnalyticWave = Callable[[np.ndarray, float], np.ndarray]


@dataclass(frozen=True)
class ClassicalSolutionPair:
    """u1, u2 and their derivatives"""

    u1: TimeFunction
    u2: TimeFunction
    du1: TimeFunction
    du2: TimeFunction
    omega: Optional[float] = None
    validated: bool = False
    label: str = "general"

    @classmethod
    def harmonic(cls, omega: float) -> "ClassicalSolutionPair":
        if not (math.isfinite(omega) and omega > 0.0):
            raise DomainError(f"omega must be positive and finite, got {omega!r}")
        return cls(
            u1=lambda s: math.sin(omega * s) / omega,
            u2=lambda s: math.cos(omega * s),
            du1=lambda s: math.cos(omega * s),
            du2=lambda s: -omega * math.sin(omega * s),
            omega=omega,
            validated=True,
            label="harmonic",
        )

    @classmethod
    def general(
        cls, u1: TimeFunction, u2: TimeFunction, du1: TimeFunction, du2: TimeFunction, label: str = "general"
    ) -> "ClassicalSolutionPair":
        """
        Arbitrary solution pair (damped or time-dependent frequency equations)

        Raises:
            DomainError: unless u1(0) = 0, u2(0) = 1 and W(0) != 0
        """
        pair = cls(u1=u1, u2=u2, du1=du1, du2=du2, validated=False, label=label)
        if abs(u1(0.0)) > 1e-12 or abs(u2(0.0) - 1.0) > 1e-12:
            raise DomainError("solution pair must satisfy u1(0) = 0 and u2(0) = 1")
        if pair.wronskian(0.0) == 0.0:
            raise DomainError("solution pair is degenerate: W(0) = 0")
        logger.warning(f"⚠️ solution pair '{label}' is outside the validated harmonic case")
        return pair

    def wronskian(self, t_prime: float) -> float:
        return self.du1(t_prime) * self.u2(t_prime) - self.u1(t_prime) * self.du2(t_prime)

    def focal_time(self) -> Optional[float]:
        """First positive t' with u2 = 0 for the harmonic pair"""
        return math.pi / (2.0 * self.omega) if self.omega else None


def arnold_map(t_prime: float, sols: ClassicalSolutionPair) -> float:
    """
    t = u1(t') / u2(t')

    Raises:
        FocalPointError: if u2(t') <= 0
    """
    u2 = sols.u2(t_prime)
    if u2 <= 0.0:
        raise FocalPointError(f"u2({t_prime}) = {u2:.3e}: the transform degenerates at the focal point")
    return sols.u1(t_prime) / u2


def inverse_arnold_map(t: float, sols: ClassicalSolutionPair) -> float:
    """
    t' with u1(t')/u2(t') = t inside the first focal cell

    Analytic atan(omega t)/omega for the harmonic pair; otherwise a bracketed
    root search, using that u1/u2 is monotone while u2 > 0.
    """
    if not math.isfinite(t):
        raise DomainError(f"t must be finite, got {t!r}")
    if sols.validated and sols.omega:
        return math.atan(sols.omega * t) / sols.omega
    if t == 0.0:
        return 0.0

    direction = 1.0 if (t > 0.0) == (sols.wronskian(0.0) > 0.0) else -1.0
    step = direction * 1e-3
    lower = 0.0
    for _ in range(400):
        upper = lower + step
        if sols.u2(upper) <= 0.0:
            # stepped past the focal point: retry with a shorter step
            step *= 0.5
            continue
        if (sols.u1(upper) / sols.u2(upper) - t) * (0.0 - t) <= 0.0:
            return brentq(lambda s: sols.u1(s) / sols.u2(s) - t, min(lower, upper), max(lower, upper), xtol=1e-15)
        lower = upper
        step *= 2.0
    raise FocalPointError(f"t = {t} is not reached before the first focal point of '{sols.label}'")


def _focal_factor(sols: ClassicalSolutionPair, t_prime: float):
    u2 = sols.u2(t_prime)
    if u2 <= 0.0:
        raise FocalPointError(f"u2({t_prime}) = {u2:.3e}: the transform degenerates at the focal point")
    return u2, sols.du2(t_prime), sols.wronskian(t_prime)


def qat_inverse(
    free_state: Union[GridState, StateSpec1D, AnalyticWave],
    sols: ClassicalSolutionPair,
    t_prime: float,
    grid: Optional[UniformGrid] = None,
    scales: Optional[PhysicalScales] = None,
) -> GridState:
    """
    Free-frame state at t = u1/u2 to the oscillator frame at t'

    Analytic inputs (a StateSpec1D or a callable psi(x, t)) are evaluated
    directly at x'/u2. A GridState is used as is when the oscillator grid is
    its own grid scaled by u2 (the default); other grids go through the
    band-limited resampler.
    """
    t = arnold_map(t_prime, sols)
    u2, du2, wronskian = _focal_factor(sols, t_prime)

    if isinstance(free_state, GridState):
        scales = free_state.scales
        if abs(free_state.t - t) > 1e-12 * max(1.0, abs(t)):
            raise DomainError(f"free state is at t={free_state.t}, the map needs t={t}")
        grid = free_state.grid.scaled(u2) if grid is None else grid
        if grid.matches(free_state.grid.scaled(u2)):
            values = free_state.samples
        else:
            values = resample(free_state, grid.x / u2)
    else:
        if grid is None:
            raise DomainError("an oscillator grid is required for analytic inputs")
        if isinstance(free_state, StateSpec1D):
            scales = free_state.scales
            values = evaluate(free_state, grid.x / u2, t)
        else:
            if scales is None:
                raise DomainError("scales are required for callable inputs")
            values = free_state(grid.x / u2, t)

    x_prime = grid.x
    phase = np.exp(1j * scales.mass * du2 * x_prime ** 2 / (2.0 * scales.hbar * wronskian * u2))
    samples = phase * np.asarray(values, dtype=complex) / math.sqrt(u2)
    return GridState(samples=samples, grid=grid, t=t_prime, scales=scales, frame=OSCILLATOR_FRAME)


def qat_forward(
    osc_state: Union[GridState, AnalyticWave],
    sols: ClassicalSolutionPair,
    t: float,
    grid: Optional[UniformGrid] = None,
    scales: Optional[PhysicalScales] = None,
) -> GridState:
    """
    Oscillator-frame state at t' = inverse_arnold_map(t) to the free frame at t

    psi(x, t) = u2^{1/2} exp(-i m du2 (u2 x)^2 / (2 hbar W u2)) psi'(u2 x, t')
    """
    t_prime = inverse_arnold_map(t, sols)
    u2, du2, wronskian = _focal_factor(sols, t_prime)

    if isinstance(osc_state, GridState):
        scales = osc_state.scales
        if abs(osc_state.t - t_prime) > 1e-12 * max(1.0, abs(t_prime)):
            raise DomainError(f"oscillator state is at t'={osc_state.t}, the map needs t'={t_prime}")
        grid = osc_state.grid.scaled(1.0 / u2) if grid is None else grid
        if grid.matches(osc_state.grid.scaled(1.0 / u2)):
            values = osc_state.samples
        else:
            values = resample(osc_state, grid.x * u2)
    else:
        if grid is None or scales is None:
            raise DomainError("a free grid and scales are required for callable inputs")
        values = osc_state(grid.x * u2, t_prime)

    x_prime = grid.x * u2
    phase = np.exp(-1j * scales.mass * du2 * x_prime ** 2 / (2.0 * scales.hbar * wronskian * u2))
    samples = phase * np.asarray(values, dtype=complex) * math.sqrt(u2)
    return GridState(samples=samples, grid=grid, t=t, scales=scales, frame=FREE_FRAME)


def round_trip_deviation(state: GridState, sols: ClassicalSolutionPair) -> float:
    """L2 distance between state and qat_forward(qat_inverse(state))"""
    t_prime = inverse_arnold_map(state.t, sols)
    back = qat_forward(qat_inverse(state, sols, t_prime), sols, state.t, grid=state.grid)
    difference = back.samples - state.samples
    deviation = math.sqrt(float(np.sum(np.abs(difference) ** 2) * state.grid.dx))
    if deviation > TOLERANCES.qat_round_trip:
        logger.warning(f"⚠️ QAT round trip deviates by {deviation:.3e}")
    return deviation
