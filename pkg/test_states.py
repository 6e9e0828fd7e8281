#!/usr/bin/env python3
"""
One-dimensional packet checks.

Covers:
1. Closed-form values of the Hermite-Gauss packets
2. Reductions of the general squeezed-displaced packet to every special family
3. Normalization, orthonormality and the free Schrodinger equation residual
4. Zeros and humps, phase-space parameters, displacement and squeeze actions

Units: hbar = m = 1 with omega = 0.5, so L = 1 and tau = 2, unless noted.

Run with pytest or directly: python test_states.py
"""

import logging
import math
import sys

import numpy as np
import pytest
from scipy.integrate import quad

from src.algebra.operators import OperatorKind, apply, operator
from src.analysis.observables import moments
from src.core.scales import make_scales
from src.states.states_1d import (
    StateFamily,
    StateSpec1D,
    apply_displacement,
    apply_squeeze,
    eval_basis,
    eval_squeezed_number,
    evaluate,
    humps_and_zeros,
    sample,
)
from src.utils.grid import UniformGrid
from src.validation.errors import DomainError

logger = logging.getLogger(__name__)

SCALES = make_scales(1.0, 1.0, 0.5)
TAU = SCALES.tau


def _l2(values: np.ndarray, dx: float) -> float:
    return math.sqrt(float(np.sum(np.abs(values) ** 2) * dx))


def test_basis_examples():
    vacuum = StateSpec1D.build(SCALES, n=0)
    assert abs(eval_basis(vacuum, 0.0, 0.0) - (2.0 * math.pi) ** -0.25) < 1e-15
    assert abs(eval_basis(vacuum, 0.0, 0.0) - 0.631618778) < 1e-9

    odd = StateSpec1D.build(SCALES, n=1)
    for t in (0.0, 0.3, TAU, 7.0):
        assert abs(eval_basis(odd, 0.0, t)) == 0.0

    # L = 1 with omega = 1 needs m = 1/2
    scales = make_scales(0.5, 1.0, 1.0)
    second = StateSpec1D.build(scales, n=2)
    for x in (-math.sqrt(2.0), math.sqrt(2.0)):
        assert abs(eval_basis(second, x, 1.0)) < 1e-14
    assert abs(eval_basis(second, 0.0, 1.0)) > 0.1


def test_eval_basis_rejects_other_families():
    with pytest.raises(DomainError):
        eval_basis(StateSpec1D.build(SCALES, n=0, a=1.0), 0.0, 0.0)


def test_reduction_to_basis():
    """Every basis packet is reproduced by the general evaluator"""
    x = np.linspace(-40.0, 40.0, 1024)
    for n in range(0, 6):
        spec = StateSpec1D.build(SCALES, n=n)
        for t in (0.0, 0.25 * TAU, TAU, 3.0 * TAU, -TAU):
            difference = np.max(np.abs(eval_squeezed_number(spec, x, t) - eval_basis(spec, x, t)))
            assert difference < 1e-10, f"n={n}, t={t}"


def _displaced(spec_n: StateSpec1D, a: complex, x: np.ndarray, t: float) -> np.ndarray:
    """D(a) psi_n at time t: translate by x0 + v0 t, multiply by exp(i p0 (x - s/2) / hbar)"""
    moved = StateSpec1D.build(SCALES, a=a)
    shift = moved.x0 + moved.v0 * t
    return np.exp(1j * moved.p0 * (x - 0.5 * shift) / SCALES.hbar) * eval_basis(spec_n, x - shift, t)


def test_reduction_to_coherent_and_displaced_number():
    x = np.linspace(-40.0, 40.0, 1024)
    for n in (0, 1, 3):
        for a in (1.0 + 0j, 1.0 + 1.0j, 2.0j, -0.7 + 0.4j):
            spec = StateSpec1D.build(SCALES, n=n, a=a)
            for t in (0.0, 0.25 * TAU, TAU, 3.0 * TAU, -0.5 * TAU):
                expected = _displaced(StateSpec1D.build(SCALES, n=n), a, x, t)
                difference = np.max(np.abs(evaluate(spec, x, t) - expected))
                assert difference < 1e-10, f"n={n}, a={a}, t={t}"


def test_reduction_to_squeezed_vacuum():
    """n = 0, a = 0: e^{r/2} psi_0(e^r x, e^{2r} t)"""
    x = np.linspace(-40.0, 40.0, 1024)
    vacuum = StateSpec1D.build(SCALES, n=0)
    for r in (-0.8, -0.3466, 0.25, 0.9):
        spec = StateSpec1D.build(SCALES, r=r)
        assert spec.family is StateFamily.SQUEEZED_VACUUM
        for t in (0.0, 0.25 * TAU, TAU, 3.0 * TAU, -TAU):
            expected = math.exp(0.5 * r) * eval_basis(vacuum, math.exp(r) * x, math.exp(2.0 * r) * t)
            difference = np.max(np.abs(evaluate(spec, x, t) - expected))
            assert difference < 1e-10, f"r={r}, t={t}"


def test_displaced_number_tracks_center():
    """n = 1 with x0 = 2, p0 = 1: the single zero sits at x0 + v0 t"""
    spec = StateSpec1D.from_phase_space(SCALES, x0=2.0, p0=1.0, n=1)
    assert abs(spec.a - complex(1.0, 1.0)) < 1e-15
    for t in (0.0, TAU, 2.5 * TAU):
        zeros, humps = humps_and_zeros(spec, t)
        assert humps == 2
        assert abs(zeros[0] - (2.0 + t)) < 1e-10
        assert abs(evaluate(spec, 2.0 + t, t)) < 1e-12


def test_normalization_by_adaptive_quadrature():
    cases = [(0, 0j, 0.0), (3, 0j, 0.0), (10, 0j, 0.0), (2, 1.5 - 2.0j, 0.0), (0, 0j, -1.0),
             (0, 0j, 1.0), (4, 3.0j, 0.5), (1, -2.0 + 1.0j, -0.6)]
    for n, a, r in cases:
        spec = StateSpec1D.build(SCALES, n=n, a=a, r=r)
        for t in (0.0, 0.5 * TAU, TAU, 5.0 * TAU):
            reach = (math.sqrt(2.0 * n + 1.0) + 10.0) * math.sqrt(2.0) * spec.effective_width(t)
            center = spec.center(t)
            norm, _ = quad(lambda y: abs(evaluate(spec, y, t)) ** 2, center - reach, center + reach,
                           epsabs=1e-13, epsrel=1e-13, limit=400, points=[center])
            assert abs(norm - 1.0) < 1e-10, f"n={n}, a={a}, r={r}, t={t}: {norm}"


def test_normalization_on_grids():
    for n in range(0, 11):
        for r in (-1.0, 0.0, 1.0):
            for a in (0j, 3.0 + 0j, -2.0 + 2.0j):
                spec = StateSpec1D.build(SCALES, n=n, a=a, r=r)
                for t in (0.0, 0.5 * TAU, TAU, 5.0 * TAU):
                    assert abs(sample(spec, t).norm() - 1.0) < 1e-10, f"n={n}, a={a}, r={r}, t={t}"


def test_basis_orthonormality():
    t = TAU
    grid = UniformGrid.for_packet(SCALES, 8, times=(t,))
    states = [sample(StateSpec1D.build(SCALES, n=n), t, grid) for n in range(9)]
    for m, first in enumerate(states):
        for n, second in enumerate(states):
            expected = 1.0 if m == n else 0.0
            assert abs(first.inner(second) - expected) < 1e-9, f"<{m}|{n}>"


@pytest.mark.parametrize("n,a,r", [
    (3, 0j, 0.0),
    (1, 1.0 + 1.0j, 0.0),
    (0, 0j, 0.4),
    (2, 0.5 - 0.3j, -0.3),
])
def test_free_schrodinger_residual(n, a, r):
    """i hbar d/dt psi + (hbar^2 / 2m) d2/dx2 psi vanishes"""
    spec = StateSpec1D.build(SCALES, n=n, a=a, r=r)
    t = 0.5 * TAU
    step = 1e-4 * TAU
    grid = UniformGrid.for_packet(SCALES, n, a, r, times=(t - step, t, t + step))
    state = sample(spec, t, grid)
    time_derivative = (evaluate(spec, grid.x, t + step) - evaluate(spec, grid.x, t - step)) / (2.0 * step)
    residual = 1j * SCALES.hbar * time_derivative + SCALES.hbar ** 2 / (2.0 * SCALES.mass) * state.derivative(2)
    relative = _l2(residual, grid.dx) / _l2(state.samples, grid.dx)
    assert relative < 1e-6, f"residual {relative:.3e}"


def test_coherent_state_is_annihilation_eigenvector():
    for a in (1.0 + 0j, 0.3 - 1.2j):
        spec = StateSpec1D.build(SCALES, a=a)
        for t in (0.0, TAU):
            state = sample(spec, t)
            image = apply(operator(OperatorKind.A, SCALES, t), state).samples
            scale = np.max(np.abs(state.samples))
            assert np.max(np.abs(image - a * state.samples)) < 1e-8 * scale


def test_squeezed_vacuum_width():
    for r in (-0.5, 0.3, 1.0):
        report = moments(StateSpec1D.build(SCALES, r=r), 0.0)
        assert abs(report.delta_x[0] - SCALES.length * math.exp(-r)) < 1e-8


def test_humps_and_zeros_examples():
    zeros, humps = humps_and_zeros(StateSpec1D.build(SCALES, n=0), 3.0)
    assert zeros == [] and humps == 1

    second = StateSpec1D.build(SCALES, n=2)
    zeros, humps = humps_and_zeros(second, 0.0)
    assert humps == 3
    assert np.allclose(zeros, [-1.0, 1.0], atol=1e-11)

    zeros, humps = humps_and_zeros(second, TAU)
    assert humps == 3
    assert np.allclose(zeros, [-math.sqrt(2.0), math.sqrt(2.0)], atol=1e-11)

    for n in range(1, 9):
        zeros, humps = humps_and_zeros(StateSpec1D.build(SCALES, n=n), TAU)
        assert len(zeros) == n and humps == n + 1


def test_humps_and_zeros_window_too_small():
    with pytest.raises(DomainError, match="widen"):
        humps_and_zeros(StateSpec1D.build(SCALES, n=3), 0.0, window=(-1.0, 1.0))


def test_phase_space_parameters():
    spec = StateSpec1D.build(SCALES, n=2, a=0.75 - 1.5j)
    assert spec.family is StateFamily.COHERENT_NUMBER
    again = StateSpec1D.from_phase_space(SCALES, spec.x0, spec.p0, n=2)
    assert abs(again.a - spec.a) < 1e-15
    assert spec.x0 == 1.5 and spec.p0 == -1.5 and spec.v0 == -1.5

    assert StateSpec1D.build(SCALES).family is StateFamily.BASIS
    assert StateSpec1D.build(SCALES, n=1, r=0.2).family is StateFamily.SQUEEZED_NUMBER
    assert StateSpec1D.build(SCALES, a=1j, r=0.2).family is StateFamily.SQUEEZED_NUMBER


def test_spec_validation():
    with pytest.raises(DomainError):
        StateSpec1D.build(SCALES, n=-1)
    with pytest.raises(DomainError):
        StateSpec1D.build(SCALES, r=math.nan)
    with pytest.raises(DomainError):
        StateSpec1D(family=StateFamily.BASIS, n=0, a=1j, r=0.0, scales=SCALES)
    # the general tag may carry any non-basis special case
    tagged = StateSpec1D(family=StateFamily.SQUEEZED_NUMBER, n=0, a=1j, r=0.0, scales=SCALES)
    assert tagged.family is StateFamily.SQUEEZED_NUMBER


def test_displacement_action_reproduces_family():
    grid = UniformGrid.centered(48.0, 4096)
    for n in (0, 2):
        for a in (1.5 + 0.5j, -1.0 - 1.0j):
            for t in (0.0, TAU):
                displaced = apply_displacement(sample(StateSpec1D.build(SCALES, n=n), t, grid), a)
                expected = evaluate(StateSpec1D.build(SCALES, n=n, a=a), grid.x, t)
                assert np.max(np.abs(displaced.samples - expected)) < 1e-9, f"n={n}, a={a}, t={t}"


def test_squeeze_action_reproduces_family():
    grid = UniformGrid.centered(40.0, 2048)
    for r in (-0.4, 0.3):
        for t in (0.0, TAU):
            squeezed = apply_squeeze(sample(StateSpec1D.build(SCALES, n=0), t, grid), r)
            expected = evaluate(StateSpec1D.build(SCALES, r=r), grid.x, t)
            assert np.max(np.abs(squeezed.samples - expected)) < 1e-8, f"r={r}, t={t}"


def main():
    """Run every check and log a summary"""
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    logger.info("🚀 One-dimensional packet checks")
    logger.info("=" * 50)

    tests = [
        ("Basis examples", test_basis_examples),
        ("eval_basis family guard", test_eval_basis_rejects_other_families),
        ("Reduction to basis", test_reduction_to_basis),
        ("Reduction to coherent / displaced number", test_reduction_to_coherent_and_displaced_number),
        ("Reduction to squeezed vacuum", test_reduction_to_squeezed_vacuum),
        ("Displaced number center", test_displaced_number_tracks_center),
        ("Normalization (adaptive quadrature)", test_normalization_by_adaptive_quadrature),
        ("Normalization (grids)", test_normalization_on_grids),
        ("Basis orthonormality", test_basis_orthonormality),
        ("Schrodinger residual", lambda: test_free_schrodinger_residual(2, 0.5 - 0.3j, -0.3)),
        ("Coherent eigenvector", test_coherent_state_is_annihilation_eigenvector),
        ("Squeezed vacuum width", test_squeezed_vacuum_width),
        ("Humps and zeros", test_humps_and_zeros_examples),
        ("Humps window guard", test_humps_and_zeros_window_too_small),
        ("Phase-space parameters", test_phase_space_parameters),
        ("Spec validation", test_spec_validation),
        ("Displacement action", test_displacement_action_reproduces_family),
        ("Squeeze action", test_squeeze_action_reproduces_family),
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
