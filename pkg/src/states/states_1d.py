"""
Closed-form free-particle packets in one dimension

Families:
    basis            psi_n(x, t), Hermite-Gauss packets (a = 0, r = 0)
    coherent_number  displaced number states (r = 0, a != 0)
    squeezed_vacuum  rescaled Gaussian packets (n = 0, a = 0, r != 0)
    squeezed_number  general squeezed-displaced number states

All families are evaluated by eval_squeezed_number except the basis, which has
its own closed form. The oscillator-frame evaluators give the harmonic
oscillator eigenstates and Glauber coherent states that the QAT maps onto
these packets.
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

import numpy as np
from scipy.optimize import brentq
from scipy.special import gammaln

from src.config.settings import TOLERANCES
from src.core.scales import PhysicalScales, delta
from src.core.special_fn import hermite
from src.utils.grid import (
    FREE_FRAME,
    OSCILLATOR_FRAME,
    GridState,
    UniformGrid,
    free_evolve,
    resample,
)
from src.validation.errors import DomainError

logger = logging.getLogger(__name__)


class StateFamily(Enum):
    BASIS = "basis"
    COHERENT_NUMBER = "coherent_number"
    SQUEEZED_VACUUM = "squeezed_vacuum"
    SQUEEZED_NUMBER = "squeezed_number"


def infer_family(n: int, a: complex, r: float) -> StateFamily:
    if a == 0 and r == 0:
        return StateFamily.BASIS
    if r == 0:
        return StateFamily.COHERENT_NUMBER
    if a == 0 and n == 0:
        return StateFamily.SQUEEZED_VACUUM
    return StateFamily.SQUEEZED_NUMBER


@dataclass(frozen=True)
class StateSpec1D:
    """
    Symbolic 1D state: family tag, number n, displacement a and squeeze r

    a = x0 / (2L) + i p0 L / hbar.
    """

    family: StateFamily
    n: int
    a: complex
    r: float
    scales: PhysicalScales

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 0:
            raise DomainError(f"n must be a non-negative integer, got {self.n!r}")
        if not (math.isfinite(complex(self.a).real) and math.isfinite(complex(self.a).imag)):
            raise DomainError(f"a must be finite, got {self.a!r}")
        if not math.isfinite(self.r):
            raise DomainError(f"r must be finite, got {self.r!r}")
        expected = infer_family(self.n, self.a, self.r)
        # squeezed_number may tag any non-basis special case
        if self.family is StateFamily.SQUEEZED_NUMBER and expected is not StateFamily.BASIS:
            return
        if self.family is not expected:
            raise DomainError(
                f"family {self.family.value} is inconsistent with n={self.n}, a={self.a}, r={self.r}"
                f" (expected {expected.value})"
            )

    @classmethod
    def build(cls, scales: PhysicalScales, n: int = 0, a: complex = 0j, r: float = 0.0) -> "StateSpec1D":
        """Spec with the family inferred from (n, a, r)"""
        a = complex(a)
        return cls(family=infer_family(n, a, r), n=int(n), a=a, r=float(r), scales=scales)

    @classmethod
    def from_phase_space(
        cls, scales: PhysicalScales, x0: float, p0: float, n: int = 0, r: float = 0.0
    ) -> "StateSpec1D":
        L = scales.length
        return cls.build(scales, n=n, a=complex(x0 / (2.0 * L), p0 * L / scales.hbar), r=r)

    @property
    def x0(self) -> float:
        return 2.0 * self.scales.length * self.a.real

    @property
    def p0(self) -> float:
        return self.scales.hbar * self.a.imag / self.scales.length

    @property
    def v0(self) -> float:
        return self.p0 / self.scales.mass

    def center(self, t: float) -> float:
        return self.x0 + self.v0 * t

    def kinetic_energy(self) -> float:
        """<P^2> / 2m = (p0^2 + (2n + 1) hbar^2 e^{2r} / 4L^2) / 2m, constant in free flight"""
        L, hbar = self.scales.length, self.scales.hbar
        spread = (2 * self.n + 1) * hbar ** 2 * math.exp(2.0 * self.r) / (4.0 * L ** 2)
        return (self.p0 ** 2 + spread) / (2.0 * self.scales.mass)

    def effective_width(self, t: float) -> float:
        """L e^{-r} |delta_r(t)|, the scale of the Hermite argument"""
        return self.scales.length * math.exp(-self.r) * delta(self.scales, t, self.r).modulus

    def to_dict(self) -> dict:
        return {
            "family": self.family.value,
            "n": self.n,
            "a": [self.a.real, self.a.imag],
            "r": self.r,
        }


def normalization(n: int, length: float) -> float:
    """N_n = (2 pi)^{-1/4} / sqrt(2^n n! L)"""
    return math.exp(-0.25 * math.log(2.0 * math.pi) - 0.5 * (n * math.log(2.0) + gammaln(n + 1) + math.log(length)))


def eval_basis(spec: StateSpec1D, x, t: float):
    """
    Hermite-Gauss packet psi_n(x, t)

    N_n |delta|^{-1/2} exp(-x^2 delta* / (4 L^2 |delta|^2)) (delta*/|delta|)^{n+1/2}
    H_n(x / (sqrt(2) L |delta|))
    """
    if spec.family is not StateFamily.BASIS:
        raise DomainError(f"eval_basis needs a basis spec, got {spec.family.value}")
    L = spec.scales.length
    d = delta(spec.scales, t)
    x = np.asarray(x, dtype=float)
    gaussian = np.exp(-x ** 2 * d.conjugate / (4.0 * L ** 2 * d.modulus_squared))
    value = (
        normalization(spec.n, L)
        / math.sqrt(d.modulus)
        * d.unit_conjugate_power(spec.n + 0.5)
        * gaussian
        * hermite(spec.n, x / (math.sqrt(2.0) * L * d.modulus))
    )
    return value if value.ndim else complex(value)


def hermite_argument(spec: StateSpec1D, x, t: float):
    """q = (x - x0 - v0 t) / (sqrt(2) L e^{-r} |delta_r|)"""
    return (np.asarray(x, dtype=float) - spec.center(t)) / (math.sqrt(2.0) * spec.effective_width(t))


def eval_squeezed_number(spec: StateSpec1D, x, t: float):
    """
    General squeezed-displaced number packet

    psi = N_n e^{r/2} |delta_r|^{-1/2} (delta_r*/|delta_r|)^{n+1/2}
          exp(i w x^2 / (4 L^2 |delta|^2)) exp(i theta) exp(-q^2/2) H_n(q) exp(-i p0 x0 / 2 hbar)

    with w = omega t and theta grouped as three bracketed terms over |delta|^2.
    The trailing constant phase makes the n = r = 0 case coincide with
    D(a) psi_0, D(a) = exp(i (p0 X - x0 P) / hbar).
    """
    scales = spec.scales
    L, hbar = scales.length, scales.hbar
    w = scales.omega * t
    d = delta(scales, t)
    d_r = delta(scales, t, spec.r)
    x0, p0 = spec.x0, spec.p0

    x = np.asarray(x, dtype=float)
    q = hermite_argument(spec, x, t)

    stretch = math.exp(-spec.r) * d_r.modulus
    theta = (
        0.5 * (p0 ** 2 * 2.0 * L ** 2 / hbar ** 2 - x0 ** 2 / (2.0 * L ** 2)) * w
        + p0 * x0 / hbar
        + stretch * (math.sqrt(2.0) * L * p0 / hbar - x0 * w / (math.sqrt(2.0) * L)) * q
        + math.sinh(2.0 * spec.r) * w * q ** 2
    ) / d.modulus_squared
    chirp = w * x ** 2 / (4.0 * L ** 2 * d.modulus_squared)

    value = (
        normalization(spec.n, L)
        * math.exp(0.5 * spec.r)
        / math.sqrt(d_r.modulus)
        * d_r.unit_conjugate_power(spec.n + 0.5)
        * np.exp(1j * (chirp + theta - p0 * x0 / (2.0 * hbar)) - 0.5 * q ** 2)
        * hermite(spec.n, q)
    )
    return value if value.ndim else complex(value)


def evaluate(spec: StateSpec1D, x, t: float):
    """Dispatch on the family tag"""
    if spec.family is StateFamily.BASIS:
        return eval_basis(spec, x, t)
    return eval_squeezed_number(spec, x, t)


def sample(spec: StateSpec1D, t: float, grid: Optional[UniformGrid] = None) -> GridState:
    """Evaluate a spec on a grid (packet-adapted by default)"""
    if grid is None:
        grid = UniformGrid.for_packet(spec.scales, spec.n, spec.a, spec.r, times=(t,))
    return GridState(samples=evaluate(spec, grid.x, t), grid=grid, t=t, scales=spec.scales)


def humps_and_zeros(
    spec: StateSpec1D, t: float, window: Optional[Tuple[float, float]] = None
) -> Tuple[List[float], int]:
    """
    Zeros of the packet and its number of humps at time t

    Zeros are the real roots of the Hermite factor mapped back to x, found by
    sign-change scanning and refined with a bracketing root finder to
    TOLERANCES.bisection * L. The window must contain the packet center
    +/- max(5, sqrt(2(2n+1)) + 1) L_eff.

    Raises:
        DomainError: if the window is too small to contain every zero
    """
    width = spec.effective_width(t)
    center = spec.center(t)
    reach = max(5.0, math.sqrt(2.0 * (2 * spec.n + 1)) + 1.0) * width
    if window is None:
        window = (center - reach, center + reach)
    lo, hi = float(window[0]), float(window[1])
    if lo > center - reach or hi < center + reach:
        raise DomainError(
            f"window [{lo:.6g}, {hi:.6g}] is too small; widen it to at least "
            f"[{center - reach:.6g}, {center + reach:.6g}]"
        )

    if spec.n == 0:
        return [], 1

    def factor(y: float) -> float:
        return float(hermite(spec.n, float(hermite_argument(spec, y, t))))

    q_lo = float(hermite_argument(spec, lo, t))
    q_hi = float(hermite_argument(spec, hi, t))
    step = math.pi / (8.0 * math.sqrt(2 * spec.n + 1))
    count = max(int(math.ceil((q_hi - q_lo) / step)), 2)
    nodes = np.linspace(lo, hi, count + 1)
    values = hermite(spec.n, hermite_argument(spec, nodes, t))

    xtol = TOLERANCES.bisection * spec.scales.length
    zeros = []
    for i in range(count):
        left, right = values[i], values[i + 1]
        if left == 0.0:
            zeros.append(float(nodes[i]))
        elif left * right < 0.0:
            zeros.append(brentq(factor, nodes[i], nodes[i + 1], xtol=xtol))
    logger.debug(f"n={spec.n}: {len(zeros)} zeros at t={t}")
    return zeros, len(zeros) + 1


# ---------------------------------------------------------------------------
# Oscillator frame
# ---------------------------------------------------------------------------

def eval_oscillator_eigenstate(scales: PhysicalScales, n: int, x_prime, t_prime: float):
    """psi'_n(x', t') = e^{-i omega (n+1/2) t'} N_n exp(-x'^2 / 4L^2) H_n(x' / sqrt(2) L)"""
    if int(n) != n or n < 0:
        raise DomainError(f"n must be a non-negative integer, got {n!r}")
    L = scales.length
    x_prime = np.asarray(x_prime, dtype=float)
    value = (
        normalization(n, L)
        * np.exp(-1j * scales.omega * (n + 0.5) * t_prime)
        * np.exp(-x_prime ** 2 / (4.0 * L ** 2))
        * hermite(n, x_prime / (math.sqrt(2.0) * L))
    )
    return value if value.ndim else complex(value)


def eval_oscillator_coherent(scales: PhysicalScales, a: complex, x_prime, t_prime: float):
    """
    Glauber coherent state e^{-i omega t'/2} D'(a e^{-i omega t'}) psi'_0

    D'(alpha) psi(x') = exp(i p (x' - x/2) / hbar) psi(x' - x),
    alpha = x / (2L) + i p L / hbar.
    """
    L, hbar = scales.length, scales.hbar
    alpha = complex(a) * np.exp(-1j * scales.omega * t_prime)
    shift = 2.0 * L * alpha.real
    kick = hbar * alpha.imag / L
    x_prime = np.asarray(x_prime, dtype=float)
    value = (
        np.exp(-0.5j * scales.omega * t_prime)
        * np.exp(1j * kick * (x_prime - 0.5 * shift) / hbar)
        * eval_oscillator_eigenstate(scales, 0, x_prime - shift, 0.0)
    )
    return value if value.ndim else complex(value)


def sample_oscillator(
    scales: PhysicalScales, grid: UniformGrid, t_prime: float, n: int = 0, a: complex = 0j
) -> GridState:
    """Oscillator-frame GridState: eigenstate for a = 0, coherent state for n = 0"""
    if a != 0 and n != 0:
        raise DomainError("oscillator sampling supports eigenstates (a = 0) or coherent states (n = 0)")
    if a == 0:
        samples = eval_oscillator_eigenstate(scales, n, grid.x, t_prime)
    else:
        samples = eval_oscillator_coherent(scales, a, grid.x, t_prime)
    return GridState(samples=samples, grid=grid, t=t_prime, scales=scales, frame=OSCILLATOR_FRAME)


# ---------------------------------------------------------------------------
# Displacement and squeeze actions on sampled states
# ---------------------------------------------------------------------------

def apply_displacement(state: GridState, a: complex) -> GridState:
    """
    exp(i (p0 X - x0 P) / hbar) acting on a sampled state

    In the free frame X = x - t P / m, so the action is a translation by
    s = x0 + v0 t followed by the phase exp(i p0 (x - s/2) / hbar). In the
    oscillator frame the translation is by x0. The translation is spectral.
    """
    scales = state.scales
    L, hbar = scales.length, scales.hbar
    a = complex(a)
    x0 = 2.0 * L * a.real
    p0 = hbar * a.imag / L
    shift = x0 + (p0 / scales.mass) * state.t if state.frame == FREE_FRAME else x0
    translated = np.fft.ifft(np.exp(-1j * state.grid.k * shift) * np.fft.fft(state.samples))
    samples = np.exp(1j * p0 * (state.x - 0.5 * shift) / hbar) * translated
    return state.with_samples(samples)


def apply_squeeze(state: GridState, r: float) -> GridState:
    """
    Conserved squeeze action with the t = 0 profile psi(x) -> e^{r/2} psi(e^r x)

    Free-frame states are drifted back to t = 0, dilated through the
    band-limited resampler and drifted forward again. Oscillator-frame states
    are dilated at their own time stamp.
    """
    r = float(r)
    if not math.isfinite(r):
        raise DomainError(f"r must be finite, got {r!r}")
    if state.frame == FREE_FRAME:
        origin = free_evolve(state, 0.0)
        dilated = origin.with_samples(math.exp(0.5 * r) * resample(origin, math.exp(r) * origin.x))
        return free_evolve(dilated, state.t)
    return state.with_samples(math.exp(0.5 * r) * resample(state, math.exp(r) * state.x))
