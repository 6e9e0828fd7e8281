"""
Invariant audit suites

Each suite measures deviations of a closed-form identity on sampled states
and records one AuditCheck per case:

    ladder          A psi_n = sqrt(n) psi_{n-1}, ADAG psi_n = sqrt(n+1) psi_{n+1}, N psi_n = (n+1/2) psi_n
    commutators     the ten Schrodinger-algebra relations on trial states
    number          N rebuilt from P2 and X2 against the direct N
    uncertainty     dx dp = (n + 1/2) hbar |delta|
    coherent        <N> = |a|^2 + n + 1/2 on displaced number states
    qat             round trip through the transform and eigenstate intertwining

Grids come from the run's grid block, widened by |delta(t)| at each time.
Under-resolution and tolerance failures become failed checks.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional

import numpy as np

from src.config.settings import TOLERANCES, AuditBlock, GridBlock
from src.core.scales import PhysicalScales, delta
from src.algebra.operators import commutator_table, ladder_deviation, number_from_algebra
from src.analysis.observables import expected_uncertainty, moments
from src.states.states_1d import StateSpec1D, eval_oscillator_eigenstate, sample
from src.transforms.qat import ClassicalSolutionPair, inverse_arnold_map, qat_inverse, round_trip_deviation
from src.utils.grid import UniformGrid, grid_from_block
from src.utils.progress_tracker import ProgressTracker
from src.validation.errors import NumericalToleranceError

logger = logging.getLogger(__name__)

UNCERTAINTY_INDICES = (0, 1, 2, 5)
COHERENT_AMPLITUDES = (1 + 0j, 1 + 1j, 2j)
COHERENT_INDICES = (0, 1, 3)
QAT_INDICES = (0, 1, 2, 3)
INTERTWINING_TOLERANCE = 1e-8


@dataclass
class AuditCheck:
    suite: str
    name: str
    deviation: Optional[float]
    tolerance: float
    passed: bool
    message: str = ""

    def to_dict(self) -> dict:
        return dict(vars(self))


@dataclass
class AuditReport:
    checks: List[AuditCheck] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(check.passed for check in self.checks)

    def failures(self) -> List[AuditCheck]:
        return [check for check in self.checks if not check.passed]

    def suites(self) -> Dict[str, bool]:
        verdicts: Dict[str, bool] = {}
        for check in self.checks:
            verdicts[check.suite] = verdicts.get(check.suite, True) and check.passed
        return verdicts

    def to_dict(self) -> dict:
        return {
            "overall_success": self.passed,
            "suites": self.suites(),
            "checks": [check.to_dict() for check in self.checks],
            "failed": len(self.failures()),
            "total": len(self.checks),
        }


class InvariantAudit:
    """
    Run the invariant suites for one set of scales and a grid block
    """

    def __init__(self, scales: PhysicalScales, grid_block: Optional[GridBlock] = None,
                 audit_block: Optional[AuditBlock] = None):
        self.scales = scales
        self.grid_block = GridBlock() if grid_block is None else grid_block
        self.audit_block = AuditBlock() if audit_block is None else audit_block
        self.times = [t * scales.tau for t in self.audit_block.times_tau]
        self.n_max = self.audit_block.n_max
        self.report = AuditReport()

    def grid_at(self, t: float) -> UniformGrid:
        return grid_from_block(self.grid_block, self.scales, delta(self.scales, t).modulus)

    def basis(self, n: int, t: float):
        return sample(StateSpec1D.build(self.scales, n=n), t, self.grid_at(t))

    def _record(self, suite: str, name: str, measure: Callable[[], float], tolerance: float) -> None:
        try:
            deviation = float(measure())
        except NumericalToleranceError as e:
            self._record_failure(suite, name, e, tolerance)
            return
        passed = deviation <= tolerance
        self.report.checks.append(AuditCheck(suite, name, deviation, tolerance, passed))
        if not passed:
            logger.warning(f"⚠️ {suite}/{name}: deviation {deviation:.3e} exceeds {tolerance:.1e}")

    def _record_failure(self, suite: str, name: str, error: NumericalToleranceError, tolerance: float) -> None:
        self.report.checks.append(AuditCheck(
            suite=suite,
            name=name,
            deviation=error.deviation,
            tolerance=tolerance,
            passed=False,
            message=f"{type(error).__name__}: {error}",
        ))
        logger.warning(f"⚠️ {suite}/{name}: {error}")

    # -- suites -------------------------------------------------------------

    def audit_ladder(self) -> None:
        for t in self.times:
            try:
                states = [self.basis(n, t) for n in range(self.n_max + 2)]
                for state in states:
                    state.require_resolved()
                deviations = ladder_deviation(states, self.scales)
            except NumericalToleranceError as e:
                self._record_failure("ladder", f"n<={self.n_max} t={t:.6g}", e, TOLERANCES.ladder)
                continue
            for kind, deviation in deviations.items():
                self._record("ladder", f"{kind} n<={self.n_max} t={t:.6g}",
                             lambda deviation=deviation: deviation, TOLERANCES.ladder)

    def _trial_states(self, t: float):
        grid = self.grid_at(t)
        return [
            sample(StateSpec1D.build(self.scales, n=0), t, grid),
            sample(StateSpec1D.build(self.scales, n=1), t, grid),
            sample(StateSpec1D.build(self.scales, n=0, a=0.5 + 0.5j), t, grid),
        ]

    def audit_commutators(self) -> None:
        for t in self.times:
            try:
                table = commutator_table(self.scales, self._trial_states(t))
            except NumericalToleranceError as e:
                self._record_failure("commutators", f"all t={t:.6g}", e, TOLERANCES.commutator)
                continue
            for name, deviation in table.items():
                self._record("commutators", f"{name} t={t:.6g}", lambda deviation=deviation: deviation,
                             TOLERANCES.commutator)

    def audit_number(self) -> None:
        for t in self.times:
            def measure(t=t) -> float:
                number_from_algebra(self.scales, t, self._trial_states(t))
                return 0.0
            self._record("number", f"algebraic N t={t:.6g}", measure, TOLERANCES.number_operator)

    def audit_uncertainty(self) -> None:
        for n in (index for index in UNCERTAINTY_INDICES if index <= self.n_max):
            for t in self.times:
                def measure(n=n, t=t) -> float:
                    product = moments(self.basis(n, t)).products[0]
                    expected = expected_uncertainty(self.scales, n, t)
                    return abs(product - expected) / expected
                self._record("uncertainty", f"n={n} t={t:.6g}", measure, TOLERANCES.uncertainty)

    def audit_coherent(self) -> None:
        for a in COHERENT_AMPLITUDES:
            for n in (index for index in COHERENT_INDICES if index <= self.n_max):
                for t in self.times:
                    def measure(a=a, n=n, t=t) -> float:
                        state = sample(StateSpec1D.build(self.scales, n=n, a=a), t, self.grid_at(t))
                        expected = abs(a) ** 2 + n + 0.5
                        return abs(moments(state).number - expected) / expected
                    self._record("coherent", f"a={a} n={n} t={t:.6g}", measure, TOLERANCES.coherent_number)

    def audit_qat(self) -> None:
        sols = ClassicalSolutionPair.harmonic(self.scales.omega)
        for n in (index for index in QAT_INDICES if index <= self.n_max):
            for t in self.times:
                def round_trip(n=n, t=t) -> float:
                    return round_trip_deviation(self.basis(n, t), sols)

                def intertwining(n=n, t=t) -> float:
                    t_prime = inverse_arnold_map(t, sols)
                    image = qat_inverse(self.basis(n, t), sols, t_prime)
                    expected = eval_oscillator_eigenstate(self.scales, n, image.x, t_prime)
                    return float(np.max(np.abs(image.samples - expected)) / np.max(np.abs(expected)))

                self._record("qat", f"round trip n={n} t={t:.6g}", round_trip, TOLERANCES.qat_round_trip)
                self._record("qat", f"eigenstate image n={n} t={t:.6g}", intertwining, INTERTWINING_TOLERANCE)

    def run(self) -> AuditReport:
        suites = [
            ("ladder", self.audit_ladder),
            ("commutators", self.audit_commutators),
            ("number", self.audit_number),
            ("uncertainty", self.audit_uncertainty),
            ("coherent", self.audit_coherent),
            ("qat", self.audit_qat),
        ]
        tracker = ProgressTracker(logger, len(suites), "Invariant audit")
        for name, suite in suites:
            before = len(self.report.checks)
            tracker.start_stage(name)
            suite()
            added = self.report.checks[before:]
            failed = [check for check in added if not check.passed]
            tracker.complete_stage(
                steps=len(added),
                success=not failed,
                error_msg=f"{len(failed)} of {len(added)} checks failed" if failed else None,
            )
        tracker.log_final_summary()
        return self.report
