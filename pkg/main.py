#!/usr/bin/env python3
"""
QAT wave-packet toolkit - command-line front end

Evaluates free-particle wave packets, audits the operator algebra, runs
release-and-recapture ("sling") schedules and checks the Quantum Arnold
Transformation from a single declarative JSON run document.

Usage:
    python main.py <command> [--config run.json] [--out path] [--format csv|json] [--seed N]

Examples:
    python main.py eval --config fig1.json                 # |psi|^2 profiles at the requested times
    python main.py audit                                   # invariant suites on the default grid
    python main.py sling --config sling.json --format json # trajectory + capture summary
    python main.py uncertainty --config states.json        # dx*dp against (n+1/2) hbar |delta|
    python main.py qat-roundtrip --config states.json      # transform unitarity and round trip

Exit codes: 0 success, 1 invalid input or configuration, 2 numerical
tolerance failure or failed verdict.
"""

import argparse
import logging
import math
import sys
import time
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from src.config.settings import LOGGING, OUTPUT, TOLERANCES, RunConfig, SegmentBlock, SlingBlock, StateBlock, config
from src.core.scales import delta, make_scales
from src.analysis.observables import expected_uncertainty, moments, moments_nd
from src.propagation.propagator import (
    FreePotential,
    HarmonicPotential,
    LinearForcePotential,
    Potential,
    SquarePotential,
)
from src.propagation.schedule import (
    TrapSchedule,
    TrapSegment,
    analyze_capture,
    capture_frequency,
    intertwining_deviation,
    lens_curvature,
    run_schedule,
    sling_schedule,
)
from src.states.states_1d import StateSpec1D, evaluate, sample
from src.states.states_nd import StateSpecND, evaluate_nd, sample_nd
from src.transforms.qat import ClassicalSolutionPair, inverse_arnold_map, qat_inverse, round_trip_deviation
from src.utils.data_writer import DataWriter
from src.utils.grid import grid_from_block
from src.utils.progress_tracker import LoggingConfig, ProgressTracker
from src.validation.audit import InvariantAudit
from src.validation.config_validator import ConfigValidator
from src.validation.errors import ConfigValidationError, DomainError, NumericalToleranceError, QatToolkitError

COMMANDS = ("eval", "audit", "sling", "uncertainty", "qat-roundtrip")

EXIT_SUCCESS = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class QatToolkit:
    """
    Orchestrates one command of the toolkit over a validated RunConfig
    """

    def __init__(self, run_config: Optional[RunConfig] = None, logger_instance: Optional[logging.Logger] = None):
        self.run_config = RunConfig() if run_config is None else run_config
        self.logger = logger_instance or logging.getLogger(__name__)
        self.writer = DataWriter()
        block = self.run_config.scales
        self.scales = make_scales(block.mass, block.hbar, block.omega)

    @classmethod
    def from_file(cls, path: Optional[Path], logger_instance: Optional[logging.Logger] = None) -> "QatToolkit":
        """Load and validate a run document (defaults when path is None)"""
        if path is None:
            return cls(RunConfig(), logger_instance)
        try:
            text = Path(path).read_text(encoding="utf-8")
        except UnicodeDecodeError as e:
            raise ConfigValidationError([f"{path}: <document>: not UTF-8 text ({e.reason})"]) from e
        return cls(ConfigValidator().validate_text(text), logger_instance)

    # -- state construction -------------------------------------------------

    def build_state(self, block: StateBlock):
        if block.geometry == "line":
            return StateSpec1D.build(self.scales, n=block.n, a=block.a, r=block.r)
        if block.geometry == "cartesian":
            return StateSpecND.cartesian(self.scales, block.ns, block.amplitudes or None)
        if block.geometry == "polar":
            return StateSpecND.polar(self.scales, block.n, block.l, block.chirality)
        if block.geometry == "spherical":
            return StateSpecND.spherical(self.scales, block.n, block.l, block.m)
        raise DomainError(f"unknown geometry {block.geometry!r}")

    def times(self) -> List[float]:
        return [value * self.scales.tau for value in self.run_config.times_tau]

    def build_potential(self, block: SegmentBlock, t_start: float) -> Potential:
        L = self.scales.length
        if block.kind == "free":
            return FreePotential()
        if block.kind == "harmonic":
            omega = capture_frequency(self.scales, t_start) if block.omega is None else block.omega
            return HarmonicPotential(mass=self.scales.mass, omega=omega, center=block.center * L)
        if block.kind == "square":
            return SquarePotential(height=block.height, left=block.left * L, right=block.right * L)
        if block.kind == "linear_force":
            amplitude, frequency = block.force_amplitude, block.force_frequency
            return LinearForcePotential(lambda s: amplitude * math.sin(frequency * s))
        raise DomainError(f"unknown segment kind {block.kind!r}")

    def build_schedule(self) -> TrapSchedule:
        block = self.run_config.schedule
        if block.sling is not None:
            sling: SlingBlock = block.sling
            return sling_schedule(
                self.scales,
                sling.flight_tau * self.scales.tau,
                capture_omega=sling.capture_omega,
                hold_periods=sling.hold_periods,
                lens=sling.lens,
            )
        segments = []
        t_start = 0.0
        for segment in block.segments:
            duration = segment.duration_tau * self.scales.tau
            segments.append(TrapSegment(
                duration=duration,
                potential=self.build_potential(segment, t_start),
                lens_curvature=lens_curvature(self.scales, t_start) if segment.lens else 0.0,
                lens_center=segment.center * self.scales.length,
                label=f"{segment.kind}[{len(segments)}]",
            ))
            t_start += duration
        return TrapSchedule(segments=segments)

    # -- commands -----------------------------------------------------------

    def cmd_eval(self) -> Dict[str, Any]:
        """Density (and optionally Re/Im) of every state at every requested time"""
        states = self.run_config.states
        times = self.times()
        components = self.run_config.output.components
        grid = grid_from_block(self.run_config.grid, self.scales)
        tracker = ProgressTracker(self.logger, len(states), "State evaluation")

        frames = []
        dimension = 1
        for block in states:
            spec = self.build_state(block)
            tracker.start_stage(block.label, f"{block.geometry} state on {grid.count} points per axis")
            dim = 1 if isinstance(spec, StateSpec1D) else spec.dimension
            dimension = max(dimension, dim)
            axes = [grid.x] * dim
            mesh = np.meshgrid(*axes, indexing="ij") if dim > 1 else [grid.x]
            for t in times:
                values = evaluate(spec, grid.x, t) if dim == 1 else evaluate_nd(spec, mesh, t)
                values = np.asarray(values, dtype=complex).ravel()
                frame = {"state": block.label, "t": t}
                for name, coordinate in zip("xyz", mesh):
                    frame[name] = np.ravel(coordinate)
                frame["density"] = np.abs(values) ** 2
                if components:
                    frame["re"], frame["im"] = values.real, values.imag
                frames.append(pd.DataFrame(frame))
            tracker.complete_stage(steps=grid.count ** dim * len(times))
        tracker.log_final_summary()

        columns = ["state", "t"] + list("xyz"[:dimension]) + ["density"] + (["re", "im"] if components else [])
        table = pd.concat(frames, ignore_index=True) if frames else pd.DataFrame()
        table = table.reindex(columns=columns)
        header = [
            "state: label from the run document",
            f"t: time (tau = {self.scales.tau:.17g})",
            "x, y, z: grid coordinates",
            "density: |psi|^2",
        ]
        if components:
            header.append("re, im: real and imaginary parts of psi")
        return {"overall_success": True, "table": table, "header": header, "rows": len(table)}

    def cmd_audit(self) -> Dict[str, Any]:
        audit = InvariantAudit(self.scales, self.run_config.grid, self.run_config.audit)
        report = audit.run()
        result = report.to_dict()
        for check in report.failures():
            self.logger.error(f"❌ {check.suite}/{check.name}: {check.message or check.deviation}")
        return result

    def cmd_sling(self) -> Dict[str, Any]:
        spec = self.build_state(self.run_config.states[0])
        if not isinstance(spec, StateSpec1D):
            raise DomainError("the sling runs one-dimensional states")
        schedule = self.build_schedule()
        grid = grid_from_block(self.run_config.grid, self.scales)
        result = run_schedule(spec, schedule, grid, self.run_config.schedule.snapshots_per_segment)
        records = result.records()

        summary: Dict[str, Any] = {"schedule": schedule.to_dict(), "snapshots": len(records)}
        if self.run_config.schedule.sling is not None:
            capture = analyze_capture(result, self.scales, schedule)
            squeeze_ok = abs(capture.fitted_r - capture.expected_r) <= TOLERANCES.squeeze_fit
            matched = self.run_config.schedule.sling.capture_omega is None
            summary["capture"] = capture.to_dict()
            summary["verdict"] = {"stationary": capture.stationary, "squeeze_fit": squeeze_ok}
            summary["overall_success"] = capture.stationary if matched else squeeze_ok
        else:
            summary["overall_success"] = True
        return {"overall_success": summary["overall_success"], "records": records, "summary": summary}

    def cmd_uncertainty(self) -> Dict[str, Any]:
        rows = []
        for block in self.run_config.states:
            spec = self.build_state(block)
            for t in self.times():
                if isinstance(spec, StateSpec1D):
                    report = moments(spec, t)
                    product = report.products[0]
                    expected = expected_uncertainty(self.scales, spec.n, t) if spec.r == 0 else None
                else:
                    report = moments_nd(sample_nd(spec, t))
                    product = report.product_trace
                    expected = delta(self.scales, t).modulus * spec.oscillator_energy() / self.scales.omega
                    if any(axis.r for axis in spec.axes):
                        expected = None
                error = None if expected is None else abs(product - expected) / expected
                rows.append({
                    "state": block.label,
                    "t": t,
                    "dx": report.delta_x,
                    "dp": report.delta_p,
                    "product": product,
                    "expected": expected,
                    "relative_error": error,
                })
        success = all(row["relative_error"] is None or row["relative_error"] <= TOLERANCES.uncertainty for row in rows)
        return {"overall_success": success, "records": rows}

    def cmd_qat_roundtrip(self) -> Dict[str, Any]:
        sols = ClassicalSolutionPair.harmonic(self.scales.omega)
        quarter = sols.focal_time()
        rows = []
        for block in self.run_config.states:
            spec = self.build_state(block)
            if not isinstance(spec, StateSpec1D):
                self.logger.warning(f"⚠️ {block.label}: the transform check runs one-dimensional states only")
                continue
            for t in self.times():
                grid = grid_from_block(self.run_config.grid, self.scales, delta(self.scales, t).modulus)
                state = sample(spec, t, grid)
                t_prime = inverse_arnold_map(t, sols)
                image = qat_inverse(state, sols, t_prime)
                unitarity = abs(image.norm() - state.norm())
                round_trip = round_trip_deviation(state, sols)
                diagram = intertwining_deviation(spec, sols, (t_prime, 0.5 * (t_prime + quarter)))
                rows.append({
                    "state": block.label,
                    "t": t,
                    "t_prime": t_prime,
                    "unitarity": unitarity,
                    "round_trip": round_trip,
                    "diagram": diagram,
                    "passed": round_trip <= TOLERANCES.qat_round_trip
                    and unitarity <= TOLERANCES.qat_round_trip
                    and diagram <= 1e-6,
                })
        return {"overall_success": all(row["passed"] for row in rows), "records": rows}

    # -- output -------------------------------------------------------------

    def output_path(self, override: Optional[str]) -> Path:
        path = Path(override or self.run_config.output.path)
        return path if path.is_absolute() else OUTPUT.output_dir / path

    def run(self, command: str, out: Optional[str] = None, fmt: Optional[str] = None) -> Dict[str, Any]:
        fmt = fmt or self.run_config.output.format
        path = self.output_path(out)
        start_time = time.time()
        self.logger.info(f"🚀 Running {command} (scales m={self.scales.mass}, hbar={self.scales.hbar}, "
                         f"omega={self.scales.omega})")

        if command == "eval":
            results = self.cmd_eval()
            if fmt == "json":
                self.writer.write_json(path, results["table"].to_dict(orient="records"))
            else:
                self.writer.write_csv(path, results["table"], results["header"])
        elif command == "audit":
            results = self.cmd_audit()
            if fmt == "json":
                self.writer.write_json(path, results)
            else:
                self.writer.write_records(path, results["checks"], fmt)
        elif command == "sling":
            results = self.cmd_sling()
            self.writer.write_records(path, results["records"], fmt)
            self.writer.write_json(path.with_name(f"{path.stem}_summary.json"), results["summary"])
        elif command == "uncertainty":
            results = self.cmd_uncertainty()
            self.writer.write_records(path, results["records"], fmt)
        elif command == "qat-roundtrip":
            results = self.cmd_qat_roundtrip()
            self.writer.write_records(path, results["records"], fmt)
        else:
            raise DomainError(f"unknown command {command!r}")

        results["total_time_seconds"] = round(time.time() - start_time, 2)
        results["output"] = str(path)
        return results


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="JSON run document (defaults apply when omitted)")
    common.add_argument("--out", help="Output path (default: output.path of the run document)")
    common.add_argument("--format", choices=["csv", "json"], help="Output format (default: output.format)")
    common.add_argument("--seed", type=int, default=None, help="Accepted for scripting; runs are deterministic")

    parser = argparse.ArgumentParser(description="QAT wave-packet toolkit")
    subparsers = parser.add_subparsers(dest="command", required=True)
    subparsers.add_parser("eval", parents=[common], help="Evaluate states on a grid at the requested times")
    subparsers.add_parser("audit", parents=[common], help="Run the operator and observable invariant suites")
    subparsers.add_parser("sling", parents=[common], help="Run a trap schedule or the sling protocol")
    subparsers.add_parser("uncertainty", parents=[common], help="Tabulate dx*dp against the closed form")
    subparsers.add_parser("qat-roundtrip", parents=[common], help="Check transform unitarity and round trips")
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    args = build_parser().parse_args(argv)

    logger = LoggingConfig.setup_run_logging(
        log_dir=LOGGING.log_dir,
        process_name=f"qat_{args.command.replace('-', '_')}",
        level=LOGGING.level,
        log_to_file=LOGGING.log_to_file,
    )
    settings_status = config.validate_configuration()
    if not settings_status["valid"]:
        logger.error(f"❌ Invalid environment settings: {settings_status}")
        return EXIT_VALIDATION
    if args.seed is not None:
        logger.info(f"🎲 --seed {args.seed} accepted; runs are deterministic")

    try:
        toolkit = QatToolkit.from_file(args.config, logger)
        results = toolkit.run(args.command, out=args.out, fmt=args.format)
    except DomainError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_VALIDATION
    except NumericalToleranceError as e:
        logger.error(f"❌ {type(e).__name__}: {e}")
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"❌ Cannot read or write run files: {e}")
        return EXIT_VALIDATION
    except KeyboardInterrupt:
        logger.info("🛑 Execution interrupted by user")
        return EXIT_VALIDATION
    except QatToolkitError as e:
        logger.error(f"❌ Execution failed: {type(e).__name__}: {e}")
        return EXIT_VALIDATION

    logger.info("=" * 80)
    logger.info("EXECUTION SUMMARY")
    logger.info("=" * 80)
    status = "✅ SUCCESS" if results["overall_success"] else "❌ FAILED"
    logger.info(f"Overall Status: {status}")
    logger.info(f"Total Time: {results['total_time_seconds']:.1f} seconds")
    logger.info(f"Output: {results['output']}")
    logger.info("=" * 80)
    return EXIT_SUCCESS if results["overall_success"] else EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
