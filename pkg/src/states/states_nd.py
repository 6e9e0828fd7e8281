"""
Higher-dimensional free packets

Cartesian products of 1D packets (each axis with its own scales, displacement
and squeeze), 2D Laguerre-Gauss packets with orbital angular momentum +/- l hbar
and 3D spherical-Gauss packets.

Spherical states keep the radial index n >= 1; the confluent polynomial and the
phase use k = n - 1 internally.

Normalization: the packet prefactors use L^2 |delta|^2 (polar) and
L^3 |delta|^3 (spherical), i.e. |delta| raised to the dimension. The exponents
are exposed below and checked by quadrature in the tests.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.special import gammaln

from src.config.settings import TOLERANCES
from src.core.scales import PhysicalScales, delta
from src.core.special_fn import confluent_m, laguerre, spherical_harmonic
from src.states.states_1d import StateSpec1D, evaluate
from src.utils.grid import GridStateND, UniformGrid, momentum_moments
from src.validation.errors import DomainError, NumericalToleranceError, ResolutionError

logger = logging.getLogger(__name__)

LAGUERRE_GAUSS_DELTA_POWER = 2
SPHERICAL_DELTA_POWER = 3

# Gaussian q-units kept beyond the outermost node on energy quadrature grids
ENERGY_GRID_MARGIN = 8.0


class Geometry(Enum):
    CARTESIAN = "cartesian"
    POLAR = "polar"
    SPHERICAL = "spherical"


@dataclass(frozen=True)
class StateSpecND:
    """Symbolic N-dimensional state"""

    geometry: Geometry
    scales: PhysicalScales
    axes: Tuple[StateSpec1D, ...] = field(default=())
    n: int = 0
    l: int = 0
    m: int = 0
    chirality: int = 1

    def __post_init__(self):
        if self.geometry is Geometry.CARTESIAN:
            if not self.axes:
                raise DomainError("cartesian state needs at least one axis")
        elif self.geometry is Geometry.POLAR:
            if self.n < 0 or self.l < 0:
                raise DomainError(f"polar indices must be non-negative, got n={self.n}, l={self.l}")
            if self.chirality not in (1, -1):
                raise DomainError(f"chirality must be +1 or -1, got {self.chirality}")
        else:
            if self.n < 1:
                raise DomainError(f"spherical radial index starts at n = 1, got n={self.n}")
            if self.l < 0 or abs(self.m) > self.l:
                raise DomainError(f"need l >= 0 and |m| <= l, got l={self.l}, m={self.m}")

    @classmethod
    def cartesian(
        cls,
        scales,
        ns: Sequence[int],
        amplitudes: Optional[Sequence[complex]] = None,
        squeezes: Optional[Sequence[float]] = None,
    ) -> "StateSpecND":
        """
        Product state; scales may be one PhysicalScales or one per axis
        (per-axis widths and frequencies)
        """
        dimension = len(ns)
        per_axis = list(scales) if isinstance(scales, (list, tuple)) else [scales] * dimension
        amplitudes = list(amplitudes) if amplitudes else [0j] * dimension
        squeezes = list(squeezes) if squeezes else [0.0] * dimension
        if not (len(per_axis) == len(amplitudes) == len(squeezes) == dimension):
            raise DomainError("ns, amplitudes, squeezes and scales must have one entry per axis")
        axes = tuple(
            StateSpec1D.build(axis_scales, n=n, a=a, r=r)
            for axis_scales, n, a, r in zip(per_axis, ns, amplitudes, squeezes)
        )
        return cls(geometry=Geometry.CARTESIAN, scales=per_axis[0], axes=axes)

    @classmethod
    def polar(cls, scales: PhysicalScales, n: int, l: int, chirality: int = 1) -> "StateSpecND":
        return cls(geometry=Geometry.POLAR, scales=scales, n=int(n), l=int(l), chirality=int(chirality))

    @classmethod
    def spherical(cls, scales: PhysicalScales, n: int, l: int, m: int) -> "StateSpecND":
        return cls(geometry=Geometry.SPHERICAL, scales=scales, n=int(n), l=int(l), m=int(m))

    @property
    def dimension(self) -> int:
        if self.geometry is Geometry.CARTESIAN:
            return len(self.axes)
        return 2 if self.geometry is Geometry.POLAR else 3

    def oscillator_energy(self) -> float:
        """Energy E of the oscillator state the packet is mapped from"""
        if self.geometry is Geometry.CARTESIAN:
            return sum(axis.scales.hbar * axis.scales.omega * (axis.n + 0.5) for axis in self.axes)
        quanta = 2 * self.n + self.l + 1 if self.geometry is Geometry.POLAR else 2 * (self.n - 1) + self.l + 1.5
        return self.scales.hbar * self.scales.omega * quanta

    def expected_energy(self) -> float:
        """
        Closed-form <H> of the free packet

        Half the oscillator energy for undisplaced, unsqueezed packets; Cartesian
        axes add their own kinetic energies, so displaced or squeezed axes are
        covered too.
        """
        if self.geometry is Geometry.CARTESIAN:
            return sum(axis.kinetic_energy() for axis in self.axes)
        return 0.5 * self.oscillator_energy()

    def excitation(self) -> int:
        """Largest number of quanta along any Cartesian axis"""
        if self.geometry is Geometry.CARTESIAN:
            return max(axis.n for axis in self.axes)
        if self.geometry is Geometry.POLAR:
            return 2 * self.n + self.l
        return 2 * (self.n - 1) + self.l

    def to_dict(self) -> dict:
        data = {"geometry": self.geometry.value}
        if self.geometry is Geometry.CARTESIAN:
            data["axes"] = [axis.to_dict() for axis in self.axes]
        elif self.geometry is Geometry.POLAR:
            data.update({"n": self.n, "l": self.l, "chirality": self.chirality})
        else:
            data.update({"n": self.n, "l": self.l, "m": self.m})
        return data


def eval_cartesian(spec: StateSpecND, xs: Sequence, t: float):
    """Product of 1D evaluations, one per axis"""
    if spec.geometry is not Geometry.CARTESIAN:
        raise DomainError(f"eval_cartesian needs a cartesian spec, got {spec.geometry.value}")
    if len(xs) != len(spec.axes):
        raise DomainError(f"expected {len(spec.axes)} coordinates, got {len(xs)}")
    value = 1.0 + 0j
    for axis, coordinate in zip(spec.axes, xs):
        value = value * evaluate(axis, coordinate, t)
    return value


def laguerre_gauss_normalization(n: int, l: int, length: float, delta_modulus: float) -> float:
    """sqrt(n! / (2 pi (n+l)! L^2 |delta|^2))"""
    return math.exp(
        0.5 * (gammaln(n + 1) - gammaln(n + l + 1) - math.log(2.0 * math.pi))
        - math.log(length)
        - 0.5 * LAGUERRE_GAUSS_DELTA_POWER * math.log(delta_modulus)
    )


def spherical_normalization(n: int, l: int, length: float, delta_modulus: float) -> float:
    """sqrt(Gamma(l + 3/2 + n - 1) / (sqrt(2) (n-1)! Gamma(l + 3/2)^2 L^3 |delta|^3))"""
    k = n - 1
    return math.exp(
        0.5 * (
            gammaln(l + 1.5 + k)
            - 0.5 * math.log(2.0)
            - gammaln(k + 1)
            - 2.0 * gammaln(l + 1.5)
            - 3.0 * math.log(length)
            - SPHERICAL_DELTA_POWER * math.log(delta_modulus)
        )
    )


def _radial_factors(spec: StateSpecND, radius, t: float):
    L = spec.scales.length
    d = delta(spec.scales, t)
    radius = np.asarray(radius, dtype=float)
    s = radius ** 2 / (2.0 * L ** 2 * d.modulus_squared)
    envelope = np.exp(-radius ** 2 * d.conjugate / (4.0 * L ** 2 * d.modulus_squared))
    return d, s, envelope, (radius / (math.sqrt(2.0) * L * d.modulus)) ** spec.l


def eval_laguerre_gauss(spec: StateSpecND, radius, phi, t: float):
    """
    2D polar packet psi_{n,l}^{+/-}

    N (rho / sqrt(2) L |delta|)^l L_n^l(rho^2 / 2 L^2 |delta|^2)
    exp(-rho^2 delta* / 4 L^2 |delta|^2) (delta*/|delta|)^{2n+l+1} e^{+/- i l phi}
    """
    if spec.geometry is not Geometry.POLAR:
        raise DomainError(f"eval_laguerre_gauss needs a polar spec, got {spec.geometry.value}")
    if np.any(np.asarray(radius) < 0):
        raise DomainError("radius must be non-negative")
    d, s, envelope, power = _radial_factors(spec, radius, t)
    value = (
        laguerre_gauss_normalization(spec.n, spec.l, spec.scales.length, d.modulus)
        * power
        * laguerre(spec.n, spec.l, s)
        * envelope
        * d.unit_conjugate_power(2 * spec.n + spec.l + 1)
        * np.exp(1j * spec.chirality * spec.l * np.asarray(phi, dtype=float))
    )
    return value if np.ndim(value) else complex(value)


def eval_spherical(spec: StateSpecND, radius, theta, phi, t: float):
    """
    3D spherical packet psi_{n,l,m}, n >= 1

    N (r / sqrt(2) L |delta|)^l M(-(n-1), l + 3/2; r^2 / 2 L^2 |delta|^2)
    exp(-r^2 delta* / 4 L^2 |delta|^2) (delta*/|delta|)^{2(n-1)+l+3/2} Y_l^m(theta, phi)
    """
    if spec.geometry is not Geometry.SPHERICAL:
        raise DomainError(f"eval_spherical needs a spherical spec, got {spec.geometry.value}")
    if np.any(np.asarray(radius) < 0):
        raise DomainError("radius must be non-negative")
    d, s, envelope, power = _radial_factors(spec, radius, t)
    k = spec.n - 1
    value = (
        spherical_normalization(spec.n, spec.l, spec.scales.length, d.modulus)
        * power
        * confluent_m(-k, spec.l + 1.5, s)
        * envelope
        * d.unit_conjugate_power(2 * k + spec.l + 1.5)
        * spherical_harmonic(spec.l, spec.m, theta, phi)
    )
    return value if np.ndim(value) else complex(value)


def evaluate_nd(spec: StateSpecND, xs: Sequence, t: float):
    """Evaluate any geometry at Cartesian coordinates"""
    if len(xs) != spec.dimension:
        raise DomainError(f"expected {spec.dimension} coordinates, got {len(xs)}")
    if spec.geometry is Geometry.CARTESIAN:
        return eval_cartesian(spec, xs, t)
    if spec.geometry is Geometry.POLAR:
        x, y = (np.asarray(c, dtype=float) for c in xs)
        return eval_laguerre_gauss(spec, np.hypot(x, y), np.arctan2(y, x), t)
    x, y, z = (np.asarray(c, dtype=float) for c in xs)
    radius = np.sqrt(x ** 2 + y ** 2 + z ** 2)
    theta = np.arccos(np.divide(z, radius, out=np.ones_like(radius), where=radius > 0))
    return eval_spherical(spec, radius, theta, np.arctan2(y, x), t)


def quadrature_grids(spec: StateSpecND, t: float, margin: float = ENERGY_GRID_MARGIN) -> Tuple[UniformGrid, ...]:
    """
    Per-axis grids resolving the packet at time t in position and momentum

    Cartesian axes follow each axis's own packet; polar and spherical states
    use a symmetric grid sized from their largest per-axis excitation.
    """
    if spec.geometry is Geometry.CARTESIAN:
        return tuple(
            UniformGrid.for_packet(
                axis.scales, axis.n, axis.a, axis.r, times=(t,), margin=margin, min_points=16, power_of_two=False
            )
            for axis in spec.axes
        )
    grid = UniformGrid.for_packet(
        spec.scales, spec.excitation(), times=(t,), margin=margin, min_points=16, power_of_two=False
    )
    return tuple(grid for _ in range(spec.dimension))


def sample_nd(spec: StateSpecND, t: float, grids: Optional[Sequence[UniformGrid]] = None) -> GridStateND:
    """Sample at Cartesian nodes (direct evaluation, no interpolation)"""
    grids = quadrature_grids(spec, t) if grids is None else tuple(grids)
    if len(grids) != spec.dimension:
        raise DomainError(f"expected {spec.dimension} grids, got {len(grids)}")
    mesh = np.meshgrid(*[grid.x for grid in grids], indexing="ij")
    return GridStateND(samples=evaluate_nd(spec, mesh, t), grids=grids, t=t, scales=spec.scales)


def angular_momentum_check(
    spec: StateSpecND,
    t: float = 0.0,
    radial: Optional[np.ndarray] = None,
    azimuthal_points: int = 64,
) -> float:
    """
    Rayleigh quotient of L_z = -i hbar d/dphi on a polar grid

    The azimuthal derivative is spectral on a uniform phi grid; the radial
    nodes default to a midpoint rule over 12 L |delta| + the Laguerre reach.

    Returns:
        Eigenvalue estimate, +/- l hbar for Laguerre-Gauss packets
    """
    if spec.geometry is not Geometry.POLAR:
        raise DomainError("angular_momentum_check needs a polar spec")
    L = spec.scales.length
    d = delta(spec.scales, t)
    if radial is None:
        reach = (math.sqrt(2.0 * (spec.excitation() + 1)) + 12.0) * L * d.modulus
        edges = np.linspace(0.0, reach, 513)
        radial = 0.5 * (edges[:-1] + edges[1:])
    radial = np.asarray(radial, dtype=float)
    phi_grid = UniformGrid(x_min=0.0, dx=2.0 * math.pi / azimuthal_points, count=azimuthal_points)
    rho, phi = np.meshgrid(radial, phi_grid.x, indexing="ij")
    psi = eval_laguerre_gauss(spec, rho, phi, t)

    factor = 1j * phi_grid.k
    if azimuthal_points % 2 == 0:
        factor[azimuthal_points // 2] = 0.0
    derivative = np.fft.ifft(factor * np.fft.fft(psi, axis=1), axis=1)
    weights = rho
    numerator = np.sum(np.conj(psi) * (-1j * spec.scales.hbar) * derivative * weights)
    denominator = np.sum(np.abs(psi) ** 2 * weights)
    return float((numerator / denominator).real)


def energy_expectation(spec: StateSpecND, t: float, state: Optional[GridStateND] = None) -> float:
    """
    <H> = <P^2> / 2m by Fourier-space quadrature on a Cartesian grid

    The quadrature value is returned after it is checked against
    spec.expected_energy().

    Raises:
        ResolutionError: if the sampled norm deviates from 1 by more than the
            norm-deficit tolerance
        NumericalToleranceError: if the quadrature and the closed form differ by
            more than TOLERANCES.energy relative
    """
    state = sample_nd(spec, t) if state is None else state
    norm = state.norm()
    deficit = abs(norm - 1.0)
    if deficit > TOLERANCES.norm_deficit:
        raise ResolutionError(
            f"sampled norm {norm:.9f} deviates from 1: refine the quadrature grid",
            deviation=deficit,
            tolerance=TOLERANCES.norm_deficit,
        )
    means, variances = momentum_moments(state.samples, state.grids, spec.scales.hbar)
    second = float(np.sum(variances + means ** 2))
    energy = second / (2.0 * spec.scales.mass)
    expected = spec.expected_energy()
    deviation = abs(energy - expected) / expected
    logger.debug(f"{spec.geometry.value} <H>={energy:.12g}, closed form {expected:.12g}")
    if deviation > TOLERANCES.energy:
        raise NumericalToleranceError(
            f"{spec.geometry.value} <H> = {energy:.12g} differs from the closed form {expected:.12g}",
            deviation=deviation,
            tolerance=TOLERANCES.energy,
        )
    return energy
