#!/usr/bin/env python3
"""
Operator algebra checks.

Covers:
1. Ladder and number actions on the free basis
2. The Schrodinger-algebra commutators
3. The number operator rebuilt from P2 and X2, and its first-order form
4. Conservation of matrix elements under free evolution

All checks share one wide grid: every state used here stays below the edge
amplitude threshold on it for t <= 3 tau.

Run with pytest or directly: python test_operators.py
"""

import logging
import math
import sys

import numpy as np
import pytest

from src.algebra.operators import (
    ALGEBRA,
    ALGEBRA_TABLE,
    OperatorKind,
    apply,
    commutator,
    commutator_table,
    expectation,
    ladder_deviation,
    number_first_order,
    number_from_algebra,
    operator,
)
from src.core.scales import make_scales
from src.states.states_1d import StateSpec1D, evaluate, sample
from src.utils.grid import UniformGrid
from src.validation.errors import ResolutionError

logger = logging.getLogger(__name__)

SCALES = make_scales(1.0, 1.0, 0.5)
TAU = SCALES.tau
GRID = UniformGrid.centered(50.0, 512)


def _state(t: float, n: int = 0, a: complex = 0j):
    return sample(StateSpec1D.build(SCALES, n=n, a=a), t, GRID)


def _trial_states(t: float):
    return [_state(t, 0), _state(t, 1), _state(t, 0, 0.5 + 0.5j), _state(t, 2, -1.0 + 0.3j)]


def _relative(actual: np.ndarray, expected: np.ndarray) -> float:
    return float(np.max(np.abs(actual - expected)) / np.max(np.abs(expected)))


def test_annihilation_of_vacuum():
    for t in (0.0, TAU, 3.0 * TAU):
        vacuum = _state(t)
        image = apply(operator(OperatorKind.A, SCALES, t), vacuum).samples
        assert np.max(np.abs(image)) < 1e-10 * np.max(np.abs(vacuum.samples)), f"t={t}"


def test_ladder_actions():
    for t in (0.0, TAU, 2.0 * TAU):
        states = [_state(t, n) for n in range(10)]
        deviations = ladder_deviation(states, SCALES)
        assert set(deviations) == {"annihilation", "creation", "number"}
        for name, deviation in deviations.items():
            assert deviation < 1e-8, f"{name} at t={t}: {deviation:.3e}"


def test_commutator_examples():
    trials = _trial_states(TAU)
    x_op = operator(OperatorKind.X, SCALES, TAU)
    p_op = operator(OperatorKind.P, SCALES, TAU)
    assert commutator(x_op, p_op, trials) < 1e-7
    # reversed ordering flips the sign of the recorded relation
    assert commutator(p_op, x_op, trials) < 1e-7

    x2_op = operator(OperatorKind.X2, SCALES, TAU)
    p2_op = operator(OperatorKind.P2, SCALES, TAU)
    assert commutator(x2_op, p2_op, trials) < 1e-7

    with pytest.raises(ValueError):
        commutator(operator(OperatorKind.A, SCALES, TAU), operator(OperatorKind.N, SCALES, TAU), trials)


def test_commutator_table():
    for t in (0.0, TAU):
        table = commutator_table(SCALES, _trial_states(t))
        assert len(table) == len(ALGEBRA_TABLE)
        assert "[X,P]" in table
        for name, deviation in table.items():
            assert deviation < 1e-7, f"{name} at t={t}: {deviation:.3e}"


def test_number_from_algebra_expectations():
    cases = [(0, 0j, 0.5), (0, 1.0 + 0j, 1.5), (2, 1.0 + 1.0j, 4.5)]
    for t in (0.0, TAU):
        rebuilt = number_from_algebra(SCALES, t, _trial_states(t))
        assert rebuilt.construction == ALGEBRA
        for n, a, expected in cases:
            value = expectation(rebuilt, _state(t, n, a))
            assert abs(value - expected) < 1e-8 * expected, f"n={n}, a={a}, t={t}: {value}"
            direct = expectation(operator(OperatorKind.N, SCALES, t), _state(t, n, a))
            assert abs(direct - expected) < 1e-8 * expected


def test_linearity():
    t = 0.5 * TAU
    first, second = _state(t, 1), _state(t, 0, 1.0 - 0.5j)
    alpha, beta = 0.3 - 1.1j, 2.0 + 0.25j
    combined = first.with_samples(alpha * first.samples + beta * second.samples)
    for kind in (OperatorKind.X, OperatorKind.P, OperatorKind.A, OperatorKind.N, OperatorKind.XP):
        op = operator(kind, SCALES, t)
        lhs = apply(op, combined).samples
        rhs = alpha * apply(op, first).samples + beta * apply(op, second).samples
        assert np.max(np.abs(lhs - rhs)) <= 1e-12 * np.max(np.abs(rhs)), kind.value


def test_matrix_elements_are_conserved():
    """<phi(t)| Q(t) |psi(t)> does not depend on t for the conserved operators

    Some of these elements vanish, so the deviation gets an absolute floor of
    1e-10 on top of the relative 1e-7.
    """
    times = (0.0, 0.5 * TAU, TAU, 3.0 * TAU)
    for kind in (OperatorKind.X, OperatorKind.P, OperatorKind.A, OperatorKind.ADAG, OperatorKind.N):
        values = []
        for t in times:
            bra, ket = _state(t, 2), _state(t, 1, 1.0 + 1.0j)
            values.append(bra.inner(apply(operator(kind, SCALES, t), ket)))
        scale = max(abs(value) for value in values)
        for value in values[1:]:
            assert abs(value - values[0]) <= 1e-7 * scale + 1e-10, f"{kind.value}: {values}"


def test_conserved_position_expectation():
    spec = StateSpec1D.build(SCALES, n=1, a=1.0 + 1.0j)
    for t in (0.0, TAU, 3.0 * TAU):
        value = expectation(operator(OperatorKind.X, SCALES, t), _state(t, 1, 1.0 + 1.0j))
        assert abs(value - spec.x0) < 1e-9
        momentum = expectation(operator(OperatorKind.P, SCALES, t), _state(t, 1, 1.0 + 1.0j))
        assert abs(momentum - spec.p0) < 1e-9


def test_number_is_symmetrized_ladder_product():
    for t in (0.0, TAU):
        a_op = operator(OperatorKind.A, SCALES, t)
        adag_op = operator(OperatorKind.ADAG, SCALES, t)
        n_op = operator(OperatorKind.N, SCALES, t)
        # A psi_0 vanishes, so the vacuum trial has no resolved intermediate
        for trial in _trial_states(t)[1:]:
            symmetric = 0.5 * (apply(adag_op, apply(a_op, trial)).samples + apply(a_op, apply(adag_op, trial)).samples)
            assert _relative(symmetric, apply(n_op, trial).samples) < 1e-8


def test_first_order_number_matches_second_order():
    for n, a in ((0, 0j), (3, 0j), (1, 0.5 - 1.0j)):
        spec = StateSpec1D.build(SCALES, n=n, a=a)
        for t in (0.0, TAU):
            first_order = number_first_order(lambda x, s: evaluate(spec, x, s), GRID, SCALES, t)
            second_order = apply(operator(OperatorKind.N, SCALES, t), sample(spec, t, GRID)).samples
            assert _relative(first_order, second_order) < 1e-6, f"n={n}, a={a}, t={t}"


def test_unresolved_state_is_rejected():
    narrow = UniformGrid.centered(3.0, 64)
    state = sample(StateSpec1D.build(SCALES, n=0), 0.0, narrow)
    with pytest.raises(ResolutionError, match="widen"):
        apply(operator(OperatorKind.P, SCALES, 0.0), state)


def test_expectation_is_normalized():
    state = _state(TAU, 1, 0.5j)
    scaled = state.with_samples(3.0 * state.samples)
    op = operator(OperatorKind.N, SCALES, TAU)
    assert abs(expectation(op, scaled) - expectation(op, state)) < 1e-12
    assert math.isclose(expectation(op, state).real, 0.25 + 1.5, rel_tol=1e-8)


def main():
    """Run every check and log a summary"""
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    logger.info("🚀 Operator algebra checks")
    logger.info("=" * 50)

    tests = [
        ("Annihilation of vacuum", test_annihilation_of_vacuum),
        ("Ladder actions", test_ladder_actions),
        ("Commutator examples", test_commutator_examples),
        ("Commutator table", test_commutator_table),
        ("Algebraic number operator", test_number_from_algebra_expectations),
        ("Linearity", test_linearity),
        ("Conserved matrix elements", test_matrix_elements_are_conserved),
        ("Conserved position and momentum", test_conserved_position_expectation),
        ("Symmetrized ladder product", test_number_is_symmetrized_ladder_product),
        ("First-order number operator", test_first_order_number_matches_second_order),
        ("Unresolved state rejected", test_unresolved_state_is_rejected),
        ("Normalized expectation", test_expectation_is_normalized),
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
