"""
Unit system and complex time factors

PhysicalScales packages m, hbar and omega together with the derived width
L = sqrt(hbar / (2 m omega)) and dispersion time tau = 2 m L^2 / hbar = 1/omega.
DeltaFactor holds delta = 1 + i omega t and its squeezed variant
delta_r = 1 + i e^{2r} omega t, from which every closed-form packet is built.
"""

import math
from dataclasses import dataclass

import numpy as np

from src.validation.errors import DomainError


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise DomainError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PhysicalScales:
    """Mass, reduced Planck constant and oscillator frequency"""

    mass: float
    hbar: float
    omega: float

    def __post_init__(self):
        for name in ("mass", "hbar", "omega"):
            value = _require_finite(name, getattr(self, name))
            if value <= 0.0:
                raise DomainError(f"{name} must be strictly positive, got {value!r}")

    @property
    def length(self) -> float:
        """L = sqrt(hbar / (2 m omega))"""
        return math.sqrt(self.hbar / (2.0 * self.mass * self.omega))

    @property
    def tau(self) -> float:
        """Dispersion time 2 m L^2 / hbar, identical to 1/omega"""
        return 1.0 / self.omega

    def with_omega(self, omega: float) -> "PhysicalScales":
        """Same particle, different trap frequency"""
        return make_scales(self.mass, self.hbar, omega)

    def to_dict(self) -> dict:
        return {
            "mass": self.mass,
            "hbar": self.hbar,
            "omega": self.omega,
            "length": self.length,
            "tau": self.tau,
        }


def make_scales(m: float, hbar: float, omega: float) -> PhysicalScales:
    """
    Build a validated unit system

    Args:
        m: Particle mass
        hbar: Reduced Planck constant
        omega: Oscillator frequency (1/time)

    Returns:
        PhysicalScales with derived L and tau

    Raises:
        DomainError: if any argument is non-positive or non-finite
    """
    return PhysicalScales(mass=float(m), hbar=float(hbar), omega=float(omega))


@dataclass(frozen=True)
class DeltaFactor:
    """delta_r(t) = 1 + i e^{2r} omega t (r = 0 gives delta)"""

    t: float
    omega: float
    r: float = 0.0

    @property
    def value(self) -> complex:
        return complex(1.0, math.exp(2.0 * self.r) * self.omega * self.t)

    @property
    def conjugate(self) -> complex:
        return self.value.conjugate()

    @property
    def modulus(self) -> float:
        return abs(self.value)

    @property
    def modulus_squared(self) -> float:
        return 1.0 + (math.exp(2.0 * self.r) * self.omega * self.t) ** 2

    @property
    def phase(self) -> float:
        """arg(delta), always inside (-pi/2, pi/2) because Re(delta) = 1"""
        return math.atan2(math.exp(2.0 * self.r) * self.omega * self.t, 1.0)

    def unit_conjugate_power(self, exponent: float) -> complex:
        """
        (delta* / |delta|)^exponent without branch ambiguity

        Evaluated as exp(-i exponent arg(delta)); arg(delta) never leaves
        (-pi/2, pi/2) so no branch cut is crossed.
        """
        return complex(np.exp(-1j * exponent * self.phase))


def delta(scales: PhysicalScales, t: float, r: float = 0.0) -> DeltaFactor:
    """
    Complex time factor at time t

    Args:
        scales: Unit system supplying omega
        t: Time (negative values allowed)
        r: Squeeze exponent (0 gives the plain delta)

    Returns:
        DeltaFactor with value 1 + i e^{2r} omega t
    """
    t = _require_finite("t", t)
    r = _require_finite("r", r)
    return DeltaFactor(t=t, omega=scales.omega, r=r)
