"""
Conserved operators and the Schrodinger algebra on sampled states

Free-frame actions at time t (spectral derivatives, pointwise multiplications):

    X     = x + (i hbar t / m) d/dx
    P     = -i hbar d/dx
    A     = L delta d/dx + x / 2L
    ADAG  = -L delta* d/dx + x / 2L
    N     = -|delta|^2 L^2 d2/dx2 + i omega t (x d/dx + 1/2) + x^2 / 4L^2
    P2, X2 by successive application, XP = (X P + P X) / 2

N built from the algebra is (P2 / 2m + m omega^2 X2 / 2) / (hbar omega).
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config.settings import TOLERANCES
from src.core.scales import PhysicalScales, delta
from src.utils.grid import GridState, UniformGrid, spectral_derivative
from src.validation.errors import NumericalToleranceError

logger = logging.getLogger(__name__)


class OperatorKind(Enum):
    X = "X"
    P = "P"
    A = "A"
    ADAG = "Adag"
    N = "N"
    P2 = "P2"
    X2 = "X2"
    XP = "XP"
    IDENTITY = "Identity"


DIRECT = "direct"
ALGEBRA = "algebra"


@dataclass(frozen=True)
class LinearOperator1D:
    """Operator tag with its time-dependent coefficients frozen at t"""

    kind: OperatorKind
    scales: PhysicalScales
    t: float
    construction: str = DIRECT

    def apply(self, state: GridState) -> GridState:
        return apply(self, state)


def operator(kind: OperatorKind, scales: PhysicalScales, t: float) -> LinearOperator1D:
    return LinearOperator1D(kind=kind, scales=scales, t=float(t))


def _derivative(samples: np.ndarray, grid: UniformGrid, order: int = 1) -> np.ndarray:
    return spectral_derivative(samples, grid, order)


def _act(kind: OperatorKind, samples: np.ndarray, grid: UniformGrid, scales: PhysicalScales, t: float,
         construction: str = DIRECT) -> np.ndarray:
    x = grid.x
    hbar, mass, L = scales.hbar, scales.mass, scales.length

    if kind is OperatorKind.IDENTITY:
        return np.array(samples, dtype=complex)
    if kind is OperatorKind.X:
        return x * samples + (1j * hbar * t / mass) * _derivative(samples, grid)
    if kind is OperatorKind.P:
        return -1j * hbar * _derivative(samples, grid)
    if kind is OperatorKind.A:
        return L * delta(scales, t).value * _derivative(samples, grid) + x * samples / (2.0 * L)
    if kind is OperatorKind.ADAG:
        return -L * delta(scales, t).conjugate * _derivative(samples, grid) + x * samples / (2.0 * L)
    if kind is OperatorKind.P2:
        return -hbar ** 2 * _derivative(samples, grid, 2)
    if kind is OperatorKind.X2:
        once = _act(OperatorKind.X, samples, grid, scales, t)
        return _act(OperatorKind.X, once, grid, scales, t)
    if kind is OperatorKind.XP:
        xp = _act(OperatorKind.X, _act(OperatorKind.P, samples, grid, scales, t), grid, scales, t)
        px = _act(OperatorKind.P, _act(OperatorKind.X, samples, grid, scales, t), grid, scales, t)
        return 0.5 * (xp + px)
    if kind is OperatorKind.N:
        if construction == ALGEBRA:
            p2 = _act(OperatorKind.P2, samples, grid, scales, t)
            x2 = _act(OperatorKind.X2, samples, grid, scales, t)
            return (p2 / (2.0 * mass) + 0.5 * mass * scales.omega ** 2 * x2) / (hbar * scales.omega)
        d = delta(scales, t)
        w = scales.omega * t
        first = _derivative(samples, grid)
        second = _derivative(samples, grid, 2)
        return (
            -d.modulus_squared * L ** 2 * second
            + 1j * w * (x * first + 0.5 * samples)
            + x ** 2 * samples / (4.0 * L ** 2)
        )
    raise ValueError(f"unhandled operator kind {kind}")


def apply(op: LinearOperator1D, state: GridState) -> GridState:
    """
    Act with op on a sampled state

    Raises:
        ResolutionError: if the state has non-negligible amplitude at the edges
    """
    state.require_resolved()
    if abs(op.t - state.t) > 1e-12 * max(1.0, abs(state.t)):
        logger.debug(f"operator frozen at t={op.t} applied to a state at t={state.t}")
    samples = _act(op.kind, state.samples, state.grid, op.scales, op.t, op.construction)
    return state.with_samples(samples)


# [A, B] = coefficient * C, coefficient in units of i hbar
ALGEBRA_TABLE: Dict[Tuple[OperatorKind, OperatorKind], Tuple[complex, OperatorKind]] = {
    (OperatorKind.X, OperatorKind.P): (1j, OperatorKind.IDENTITY),
    (OperatorKind.X, OperatorKind.P2): (2j, OperatorKind.P),
    (OperatorKind.X, OperatorKind.XP): (1j, OperatorKind.X),
    (OperatorKind.P, OperatorKind.X2): (-2j, OperatorKind.X),
    (OperatorKind.P, OperatorKind.XP): (-1j, OperatorKind.P),
    (OperatorKind.X2, OperatorKind.P2): (4j, OperatorKind.XP),
    (OperatorKind.X2, OperatorKind.XP): (2j, OperatorKind.X2),
    (OperatorKind.P2, OperatorKind.XP): (-2j, OperatorKind.P2),
    (OperatorKind.X, OperatorKind.X2): (0j, OperatorKind.IDENTITY),
    (OperatorKind.P, OperatorKind.P2): (0j, OperatorKind.IDENTITY),
}


def commutator(op_a: LinearOperator1D, op_b: LinearOperator1D, trial_states: Sequence[GridState]) -> float:
    """
    Largest relative deviation of ([A, B] - expected) over the trial states

    The expected right-hand side comes from ALGEBRA_TABLE (either ordering);
    deviations are max |residual| / max(|A B psi|, |B A psi|).
    """
    key = (op_a.kind, op_b.kind)
    if key in ALGEBRA_TABLE:
        coefficient, result_kind = ALGEBRA_TABLE[key]
    elif (op_b.kind, op_a.kind) in ALGEBRA_TABLE:
        coefficient, result_kind = ALGEBRA_TABLE[(op_b.kind, op_a.kind)]
        coefficient = -coefficient
    else:
        raise ValueError(f"no algebra relation recorded for [{op_a.kind.value}, {op_b.kind.value}]")

    worst = 0.0
    for trial in trial_states:
        ab = apply(op_a, apply(op_b, trial)).samples
        ba = apply(op_b, apply(op_a, trial)).samples
        expected = coefficient * op_a.scales.hbar * _act(
            result_kind, trial.samples, trial.grid, op_a.scales, op_a.t
        )
        scale = max(np.max(np.abs(ab)), np.max(np.abs(ba)), np.finfo(float).tiny)
        worst = max(worst, float(np.max(np.abs(ab - ba - expected)) / scale))
    return worst


def commutator_table(scales: PhysicalScales, trial_states: Sequence[GridState]) -> Dict[str, float]:
    """Deviation of every algebra relation, operators frozen at each trial's time"""
    table = {}
    for kind_a, kind_b in ALGEBRA_TABLE:
        deviation = 0.0
        for trial in trial_states:
            deviation = max(
                deviation,
                commutator(operator(kind_a, scales, trial.t), operator(kind_b, scales, trial.t), [trial]),
            )
        table[f"[{kind_a.value},{kind_b.value}]"] = deviation
    return table


def number_from_algebra(
    scales: PhysicalScales, t: float, trial_states: Sequence[GridState] = ()
) -> LinearOperator1D:
    """
    N rebuilt from P2 and X2

    When trial states are given, the agreement with the direct second-order N is
    checked on each of them.

    Raises:
        NumericalToleranceError: if the two constructions disagree by more than
            TOLERANCES.number_operator (relative)
    """
    rebuilt = LinearOperator1D(kind=OperatorKind.N, scales=scales, t=float(t), construction=ALGEBRA)
    direct = operator(OperatorKind.N, scales, t)
    for trial in trial_states:
        expected = apply(direct, trial).samples
        actual = apply(rebuilt, trial).samples
        scale = max(np.max(np.abs(expected)), np.finfo(float).tiny)
        deviation = float(np.max(np.abs(actual - expected)) / scale)
        if deviation > TOLERANCES.number_operator:
            raise NumericalToleranceError(
                f"algebraic N deviates from the direct construction by {deviation:.3e}",
                deviation=deviation,
                tolerance=TOLERANCES.number_operator,
            )
    return rebuilt


def number_first_order(
    psi: Callable[[np.ndarray, float], np.ndarray],
    grid: UniformGrid,
    scales: PhysicalScales,
    t: float,
    time_step: Optional[float] = None,
) -> np.ndarray:
    """
    First-order N on a solution of the free Schrodinger equation

    N psi = (i |delta|^2 / omega) d psi/dt + i omega t (x d/dx + 1/2) psi + x^2 psi / 4L^2,
    with d/dt by a centered difference of analytic snapshots (default step 1e-5 tau).
    """
    step = 1e-5 * scales.tau if time_step is None else time_step
    x = grid.x
    d = delta(scales, t)
    current = np.asarray(psi(x, t), dtype=complex)
    time_derivative = (np.asarray(psi(x, t + step)) - np.asarray(psi(x, t - step))) / (2.0 * step)
    w = scales.omega * t
    return (
        1j * d.modulus_squared / scales.omega * time_derivative
        + 1j * w * (x * spectral_derivative(current, grid) + 0.5 * current)
        + x ** 2 * current / (4.0 * scales.length ** 2)
    )


def expectation(op: LinearOperator1D, state: GridState) -> complex:
    """<psi| op |psi> / <psi|psi>"""
    return state.inner(apply(op, state)) / state.norm()


def ladder_deviation(states: List[GridState], scales: PhysicalScales) -> Dict[str, float]:
    """
    Pointwise relative deviations of the ladder and number actions

    states[k] must hold psi_k at a common time; returns the worst deviation
    of A psi_n = sqrt(n) psi_{n-1}, ADAG psi_n = sqrt(n+1) psi_{n+1} and
    N psi_n = (n + 1/2) psi_n over the available indices.
    """
    worst = {"annihilation": 0.0, "creation": 0.0, "number": 0.0}
    for n, state in enumerate(states):
        a_op = operator(OperatorKind.A, scales, state.t)
        adag_op = operator(OperatorKind.ADAG, scales, state.t)
        n_op = operator(OperatorKind.N, scales, state.t)
        checks = [("number", apply(n_op, state).samples, (n + 0.5) * state.samples)]
        if n > 0:
            checks.append(("annihilation", apply(a_op, state).samples, np.sqrt(n) * states[n - 1].samples))
        if n + 1 < len(states):
            checks.append(("creation", apply(adag_op, state).samples, np.sqrt(n + 1) * states[n + 1].samples))
        for name, actual, expected in checks:
            scale = max(np.max(np.abs(expected)), np.finfo(float).tiny)
            worst[name] = max(worst[name], float(np.max(np.abs(actual - expected)) / scale))
    return worst
