#!/usr/bin/env python3
"""
Higher-dimensional packet checks.

Covers:
1. Cartesian products, Laguerre-Gauss and spherical-Gauss values
2. Normalization of the polar and spherical prefactors by quadrature
3. Orbital angular momentum and kinetic energy of the packets
4. Per-axis and trace uncertainty laws, orthogonality, validation

Run with pytest or directly: python test_states_nd.py
"""

import logging
import math
import sys

import numpy as np
import pytest
from scipy.integrate import quad

from src.analysis.observables import count_humps, moments_nd
from src.core.scales import delta, make_scales
from src.core.special_fn import spherical_harmonic
from src.states.states_nd import (
    Geometry,
    StateSpecND,
    angular_momentum_check,
    energy_expectation,
    eval_cartesian,
    eval_laguerre_gauss,
    eval_spherical,
    evaluate_nd,
    quadrature_grids,
    sample_nd,
)
from src.validation.errors import DomainError, NumericalToleranceError

logger = logging.getLogger(__name__)

SCALES = make_scales(1.0, 1.0, 0.5)
UNIT_OMEGA = make_scales(1.0, 1.0, 1.0)
TAU = SCALES.tau


def _wide_sample(spec, t):
    """Sample on grids with the same decay margin as the 1D packet grids"""
    return sample_nd(spec, t, quadrature_grids(spec, t, margin=12.0))


def test_cartesian_values():
    ground = StateSpecND.cartesian(SCALES, [0, 0])
    assert ground.dimension == 2
    assert abs(eval_cartesian(ground, [0.0, 0.0], 0.0) - 1.0 / math.sqrt(2.0 * math.pi)) < 1e-15

    x = np.linspace(-8.0, 8.0, 801)
    profile = np.abs(eval_cartesian(StateSpecND.cartesian(SCALES, [1, 0]), [x, np.zeros_like(x)], TAU)) ** 2
    assert count_humps(profile) == 2

    crossed = StateSpecND.cartesian(SCALES, [1, 1])
    for t in (0.0, TAU):
        assert np.max(np.abs(eval_cartesian(crossed, [x, np.zeros_like(x)], t))) < 1e-15
        assert np.max(np.abs(eval_cartesian(crossed, [np.zeros_like(x), x], t))) < 1e-15


def test_cartesian_per_axis_scales():
    axes = [make_scales(1.0, 1.0, 0.5), make_scales(1.0, 1.0, 2.0)]
    spec = StateSpecND.cartesian(axes, [0, 1], amplitudes=[1.0 + 0j, 0j])
    assert spec.axes[1].scales.omega == 2.0
    assert math.isclose(spec.oscillator_energy(), 0.5 * 0.5 + 1.5 * 2.0, rel_tol=1e-15)
    assert spec.excitation() == 1


def test_laguerre_gauss_values():
    ground = StateSpecND.polar(SCALES, 0, 0)
    assert abs(eval_laguerre_gauss(ground, 0.0, 0.0, 0.0) - 1.0 / math.sqrt(2.0 * math.pi)) < 1e-15

    vortex = StateSpecND.polar(SCALES, 0, 1, chirality=1)
    assert abs(eval_laguerre_gauss(vortex, 0.0, 0.4, TAU)) == 0.0
    first = eval_laguerre_gauss(vortex, 1.3, 0.0, TAU)
    turned = eval_laguerre_gauss(vortex, 1.3, 0.7, TAU)
    assert abs(turned - first * np.exp(0.7j)) < 1e-15

    mirrored = StateSpecND.polar(SCALES, 0, 1, chirality=-1)
    assert abs(eval_laguerre_gauss(mirrored, 1.3, 0.7, TAU) - first * np.exp(-0.7j)) < 1e-15

    radius = np.linspace(0.0, 10.0, 1001)
    profile = np.abs(eval_laguerre_gauss(StateSpecND.polar(SCALES, 1, 1), radius, 0.0, 0.0)) ** 2
    assert count_humps(profile) == 2


def test_spherical_values():
    s_wave = StateSpecND.spherical(SCALES, 1, 0, 0)
    for t in (0.0, TAU):
        reference = eval_spherical(s_wave, 1.1, 0.3, 0.2, t)
        for theta, phi in [(1.2, 2.5), (2.9, -1.0), (0.0, 0.0)]:
            assert abs(eval_spherical(s_wave, 1.1, theta, phi, t) - reference) < 1e-15

    p_wave = StateSpecND.spherical(SCALES, 1, 1, 0)
    radius = np.linspace(0.0, 6.0, 61)
    assert np.max(np.abs(eval_spherical(p_wave, radius, math.pi / 2, 0.3, TAU))) < 1e-15
    assert abs(eval_spherical(p_wave, 1.0, 0.2, 0.3, 0.0)) > 1e-3


def test_evaluate_nd_matches_polar_coordinates():
    spec = StateSpecND.polar(SCALES, 1, 2, chirality=-1)
    x, y = 0.8, -1.1
    direct = eval_laguerre_gauss(spec, math.hypot(x, y), math.atan2(y, x), TAU)
    assert abs(evaluate_nd(spec, [x, y], TAU) - direct) < 1e-15

    spec = StateSpecND.spherical(SCALES, 2, 1, 1)
    x, y, z = 0.5, 0.7, -0.9
    radius = math.sqrt(x * x + y * y + z * z)
    direct = eval_spherical(spec, radius, math.acos(z / radius), math.atan2(y, x), TAU)
    assert abs(evaluate_nd(spec, [x, y, z], TAU) - direct) < 1e-15


@pytest.mark.parametrize("n,l", [(0, 0), (0, 1), (1, 1), (2, 3)])
def test_polar_normalization(n, l):
    spec = StateSpecND.polar(SCALES, n, l)
    for t in (0.0, TAU, 3.0 * TAU):
        reach = 40.0 * SCALES.length * delta(SCALES, t).modulus
        norm, _ = quad(lambda rho: abs(eval_laguerre_gauss(spec, rho, 0.0, t)) ** 2 * rho,
                       0.0, reach, epsabs=1e-13, epsrel=1e-12, limit=400)
        assert abs(2.0 * math.pi * norm - 1.0) < 1e-10, f"t={t}"


@pytest.mark.parametrize("n,l,m", [(1, 0, 0), (1, 1, 0), (2, 1, -1), (3, 2, 2)])
def test_spherical_normalization(n, l, m):
    spec = StateSpecND.spherical(SCALES, n, l, m)
    theta, phi = 0.9, 0.2
    harmonic = abs(spherical_harmonic(l, m, theta, phi)) ** 2
    for t in (0.0, TAU, 3.0 * TAU):
        reach = 40.0 * SCALES.length * delta(SCALES, t).modulus
        norm, _ = quad(lambda r: abs(eval_spherical(spec, r, theta, phi, t)) ** 2 * r * r / harmonic,
                       0.0, reach, epsabs=1e-13, epsrel=1e-12, limit=400)
        assert abs(norm - 1.0) < 1e-10, f"t={t}"


def test_angular_momentum():
    assert abs(angular_momentum_check(StateSpecND.polar(SCALES, 0, 1, 1)) - 1.0) < 1e-8
    assert abs(angular_momentum_check(StateSpecND.polar(SCALES, 0, 0))) < 1e-8
    assert abs(angular_momentum_check(StateSpecND.polar(SCALES, 1, 2, -1), t=TAU) + 2.0) < 1e-8
    with pytest.raises(DomainError):
        angular_momentum_check(StateSpecND.spherical(SCALES, 1, 0, 0))


def test_energy_expectation():
    """<H> of the free packet is half the oscillator energy it was mapped from"""
    cases = [
        (StateSpecND.cartesian(UNIT_OMEGA, [0, 0]), 0.5),
        (StateSpecND.polar(UNIT_OMEGA, 1, 1), 2.0),
        (StateSpecND.spherical(UNIT_OMEGA, 1, 0, 0), 0.75),
    ]
    for spec, expected in cases:
        for t in (0.0, 1.5):
            energy = energy_expectation(spec, t)
            assert abs(energy - expected) <= 1e-6 * expected, f"{spec.geometry.value} t={t}: {energy}"


def test_energy_of_squeezed_displaced_axes():
    """<P^2>/2m per axis is p0^2/2m + (2n + 1) hbar^2 e^{2r} / 8 m L^2"""
    spec = StateSpecND.cartesian(UNIT_OMEGA, [1, 0], amplitudes=[0.5 + 1.0j, -0.25j], squeezes=[0.3, -0.2])
    L = UNIT_OMEGA.length
    expected = 0.0
    for n, a, r in ((1, 0.5 + 1.0j, 0.3), (0, -0.25j, -0.2)):
        p0 = a.imag / L
        expected += 0.5 * p0 ** 2 + (2 * n + 1) * math.exp(2.0 * r) / (8.0 * L ** 2)
    assert math.isclose(spec.expected_energy(), expected, rel_tol=1e-14)
    for t in (0.0, 1.5):
        energy = energy_expectation(spec, t)
        assert abs(energy - expected) <= 1e-6 * expected, f"t={t}: {energy}"


def test_energy_mismatch_is_reported():
    ground = StateSpecND.cartesian(UNIT_OMEGA, [0, 0])
    excited = StateSpecND.cartesian(UNIT_OMEGA, [2, 0])
    state = sample_nd(excited, 0.0)
    with pytest.raises(NumericalToleranceError) as caught:
        energy_expectation(ground, 0.0, state=state)
    assert caught.value.deviation > 1.0


def test_cartesian_uncertainty_per_axis():
    spec = StateSpecND.cartesian(SCALES, [2, 0], amplitudes=[0.5 + 0.5j, -1.0j])
    for t in (0.0, TAU):
        report = moments_nd(_wide_sample(spec, t))
        modulus = delta(SCALES, t).modulus
        for product, n in zip(report.products, (2, 0)):
            expected = (n + 0.5) * SCALES.hbar * modulus
            assert abs(product - expected) <= 1e-6 * expected


def test_polar_uncertainty_laws():
    spec = StateSpecND.polar(SCALES, 1, 1)
    energy = spec.oscillator_energy()
    for t in (0.0, TAU):
        report = moments_nd(_wide_sample(spec, t))
        modulus = delta(SCALES, t).modulus
        per_axis = modulus * energy / (2.0 * SCALES.omega)
        for product in report.products:
            assert abs(product - per_axis) <= 1e-6 * per_axis
        trace = modulus * energy / SCALES.omega
        assert abs(report.product_trace - trace) <= 1e-6 * trace


def test_spherical_uncertainty_laws():
    s_wave = StateSpecND.spherical(SCALES, 2, 0, 0)
    for t in (0.0, TAU):
        report = moments_nd(_wide_sample(s_wave, t))
        per_axis = delta(SCALES, t).modulus * s_wave.oscillator_energy() / (3.0 * SCALES.omega)
        for product in report.products:
            assert abs(product - per_axis) <= 1e-6 * per_axis

    p_wave = StateSpecND.spherical(SCALES, 1, 1, 1)
    report = moments_nd(_wide_sample(p_wave, TAU))
    trace = delta(SCALES, TAU).modulus * p_wave.oscillator_energy() / SCALES.omega
    assert abs(report.product_trace - trace) <= 1e-6 * trace


def test_orthogonality_on_shared_grids():
    plus = StateSpecND.polar(SCALES, 0, 1, 1)
    minus = StateSpecND.polar(SCALES, 0, 1, -1)
    grids = quadrature_grids(plus, TAU)
    assert abs(sample_nd(plus, TAU, grids).inner(sample_nd(minus, TAU, grids))) < 1e-8

    first = StateSpecND.cartesian(SCALES, [1, 0])
    second = StateSpecND.cartesian(SCALES, [0, 1])
    grids = quadrature_grids(StateSpecND.cartesian(SCALES, [1, 1]), 0.0)
    assert abs(sample_nd(first, 0.0, grids).inner(sample_nd(second, 0.0, grids))) < 1e-8


def test_validation_errors():
    with pytest.raises(DomainError):
        StateSpecND.polar(SCALES, -1, 0)
    with pytest.raises(DomainError):
        StateSpecND.polar(SCALES, 0, 1, chirality=0)
    with pytest.raises(DomainError):
        StateSpecND.spherical(SCALES, 0, 0, 0)
    with pytest.raises(DomainError):
        StateSpecND.spherical(SCALES, 1, 1, 2)
    with pytest.raises(DomainError):
        StateSpecND.cartesian(SCALES, [0, 1], amplitudes=[0j])
    with pytest.raises(DomainError):
        eval_laguerre_gauss(StateSpecND.polar(SCALES, 0, 0), -1.0, 0.0, 0.0)
    with pytest.raises(DomainError):
        evaluate_nd(StateSpecND.spherical(SCALES, 1, 0, 0), [0.0, 0.0], 0.0)
    assert StateSpecND.spherical(SCALES, 1, 0, 0).geometry is Geometry.SPHERICAL


def main():
    """Run every check and log a summary"""
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    logger.info("🚀 Higher-dimensional packet checks")
    logger.info("=" * 50)

    tests = [
        ("Cartesian values", test_cartesian_values),
        ("Cartesian per-axis scales", test_cartesian_per_axis_scales),
        ("Laguerre-Gauss values", test_laguerre_gauss_values),
        ("Spherical values", test_spherical_values),
        ("evaluate_nd coordinates", test_evaluate_nd_matches_polar_coordinates),
        ("Polar normalization", lambda: test_polar_normalization(2, 3)),
        ("Spherical normalization", lambda: test_spherical_normalization(3, 2, 2)),
        ("Angular momentum", test_angular_momentum),
        ("Energy expectation", test_energy_expectation),
        ("Squeezed displaced energy", test_energy_of_squeezed_displaced_axes),
        ("Energy mismatch", test_energy_mismatch_is_reported),
        ("Cartesian uncertainty", test_cartesian_uncertainty_per_axis),
        ("Polar uncertainty", test_polar_uncertainty_laws),
        ("Spherical uncertainty", test_spherical_uncertainty_laws),
        ("Orthogonality", test_orthogonality_on_shared_grids),
        ("Validation errors", test_validation_errors),
    ]

    passed_tests = 0
    for test_name, test_func in tests:
        try:
            test_func()
            logger.info(f"✅ {test_name}: PASSED")
            passed_tests += 1
        except Exception as e:
            logger.error(f"❌ {test_name}: FAILED - {str(e)}")

    logger.info("=" * 50)
    logger.info(f"🏁 SUMMARY: {passed_tests}/{len(tests)} checks passed")
    return passed_tests == len(tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
