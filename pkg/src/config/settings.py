"""
Configuration settings for the QAT wave-packet toolkit

This module provides configuration management for grid sizing, numerical
tolerances, split-step propagation, output formatting and logging, plus the
declarative RunConfig document consumed by the command-line front end.
"""

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional

from dotenv import load_dotenv

# Load environment variables
load_dotenv()


def _env_bool(name: str, default: str) -> bool:
    return os.getenv(name, default).strip().lower() in ("1", "true", "yes", "on")


@dataclass
class GridSettings:
    """Default uniform-grid sizing"""
    points: int = int(os.getenv("QAT_GRID_POINTS", "1024"))
    half_width: float = float(os.getenv("QAT_GRID_HALF_WIDTH", "16.0"))  # in units of L

    # Packet-adapted sizing (see UniformGrid.for_packet)
    decay_margin: float = 12.0       # Gaussian q-units beyond the outermost Hermite zero
    min_points: int = 256
    max_points: int = 1 << 16


@dataclass
class ToleranceSettings:
    """Numerical tolerances shared by operators, observables and audits"""

    boundary_amplitude: float = 1e-12     # relative edge amplitude for spectral operators
    norm_deficit: float = 1e-6            # |norm - 1| before under-resolution is reported
    uncertainty_floor_slack: float = 1e-9
    window_overflow_density: float = 1e-10  # relative edge density after propagation
    hump_threshold: float = 1e-6          # relative to peak density
    hump_smoothing_cells: int = 3
    bisection: float = 1e-12              # root tolerance in units of L

    ladder: float = 1e-8
    commutator: float = 1e-7
    number_operator: float = 1e-8
    uncertainty: float = 1e-7
    coherent_number: float = 1e-7
    energy: float = 1e-6                  # relative, quadrature <H> against the closed form
    qat_round_trip: float = 1e-9
    capture_stationarity: float = 1e-4
    squeeze_fit: float = 1e-3
    coherent_fidelity: float = 0.99


@dataclass
class PropagationSettings:
    """Split-step propagation settings"""

    dt_safety: float = float(os.getenv("QAT_DT_SAFETY", "10.0"))
    steps_per_period: int = 200
    occupied_band_threshold: float = 1e-14
    show_progress: bool = _env_bool("QAT_SHOW_PROGRESS", "false")
    progress_min_steps: int = 5000   # tqdm bar only for long step loops
    absorber_fraction: float = 0.1   # share of the window damped at each edge
    absorber_strength: float = 20.0  # layer crossings at the Nyquist velocity per unit damping
    absorber_power: int = 2
    barrier_edge_cells: float = 2.0  # tanh ramp width of barrier edges, in grid cells


@dataclass
class OutputSettings:
    """Output formatting"""
    output_dir: Path = Path(os.getenv("QAT_OUTPUT_DIR", "."))
    float_format: str = "%.17g"
    json_indent: int = 2


@dataclass
class LoggingSettings:
    """Logging configuration"""
    level: str = os.getenv("QAT_LOG_LEVEL", "INFO")
    log_dir: Path = Path(os.getenv("QAT_LOG_DIR", "logs"))
    log_to_file: bool = _env_bool("QAT_LOG_TO_FILE", "false")


class Config:
    """Main configuration class combining all settings"""

    def __init__(self):
        self.grid = GridSettings()
        self.tolerances = ToleranceSettings()
        self.propagation = PropagationSettings()
        self.output = OutputSettings()
        self.logging = LoggingSettings()

    def validate_configuration(self) -> Dict[str, Any]:
        """Validate configuration and return status report"""
        status = {
            "grid": self.grid.points >= 2 and self.grid.half_width > 0,
            "tolerances": all(
                value > 0 for value in vars(self.tolerances).values() if isinstance(value, float)
            ),
            "propagation": self.propagation.dt_safety >= 1.0 and self.propagation.steps_per_period > 0,
            "log_level": self.logging.level.upper() in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"),
        }
        status["valid"] = all(status.values())
        return status


# ---------------------------------------------------------------------------
# RunConfig: the declarative run document
# ---------------------------------------------------------------------------

def _complex_to_list(value: complex) -> List[float]:
    return [float(value.real), float(value.imag)]


def _list_to_complex(value: Any) -> complex:
    if isinstance(value, (list, tuple)):
        if len(value) != 2:
            raise ValueError(f"complex value must be [re, im], got {value!r}")
        return complex(float(value[0]), float(value[1]))
    return complex(float(value), 0.0)


@dataclass
class ScalesBlock:
    mass: float = 1.0
    hbar: float = 1.0
    omega: float = 0.5

    def to_dict(self) -> Dict[str, Any]:
        return {"mass": self.mass, "hbar": self.hbar, "omega": self.omega}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScalesBlock":
        return cls(
            mass=float(data.get("mass", 1.0)),
            hbar=float(data.get("hbar", 1.0)),
            omega=float(data.get("omega", 0.5)),
        )


@dataclass
class StateBlock:
    """
    One analytic state request.

    geometry is one of: line, cartesian, polar, spherical.
    """
    label: str = "psi"
    geometry: str = "line"
    n: int = 0
    a: complex = 0j
    r: float = 0.0
    ns: List[int] = field(default_factory=list)
    amplitudes: List[complex] = field(default_factory=list)
    l: int = 0
    m: int = 0
    chirality: int = 1

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"label": self.label, "geometry": self.geometry}
        if self.geometry == "line":
            data.update({"n": self.n, "a": _complex_to_list(self.a), "r": self.r})
        elif self.geometry == "cartesian":
            data.update({
                "ns": list(self.ns),
                "amplitudes": [_complex_to_list(value) for value in self.amplitudes],
            })
        elif self.geometry == "polar":
            data.update({"n": self.n, "l": self.l, "chirality": self.chirality})
        else:
            data.update({"n": self.n, "l": self.l, "m": self.m})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "StateBlock":
        return cls(
            label=str(data.get("label", "psi")),
            geometry=str(data.get("geometry", "line")),
            n=int(data.get("n", 0)),
            a=_list_to_complex(data.get("a", 0.0)),
            r=float(data.get("r", 0.0)),
            ns=[int(value) for value in data.get("ns", [])],
            amplitudes=[_list_to_complex(value) for value in data.get("amplitudes", [])],
            l=int(data.get("l", 0)),
            m=int(data.get("m", 0)),
            chirality=int(data.get("chirality", 1)),
        )


@dataclass
class GridBlock:
    half_width: float = 16.0   # in units of L
    points: int = 512
    center: float = 0.0        # in units of L

    def to_dict(self) -> Dict[str, Any]:
        return {"half_width": self.half_width, "points": self.points, "center": self.center}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "GridBlock":
        return cls(
            half_width=float(data.get("half_width", 16.0)),
            points=int(data.get("points", 512)),
            center=float(data.get("center", 0.0)),
        )


@dataclass
class SegmentBlock:
    """
    One schedule segment; kind is free, harmonic, square or linear_force.
    omega=None on a harmonic segment requests the matched capture frequency.
    """
    kind: str = "free"
    duration_tau: float = 1.0
    omega: Optional[float] = None
    center: float = 0.0
    height: float = 0.0
    left: float = 0.0
    right: float = 0.0
    force_amplitude: float = 0.0
    force_frequency: float = 0.0
    lens: bool = False

    def to_dict(self) -> Dict[str, Any]:
        data: Dict[str, Any] = {"kind": self.kind, "duration_tau": self.duration_tau}
        if self.kind == "harmonic":
            data.update({"omega": self.omega, "center": self.center, "lens": self.lens})
        elif self.kind == "square":
            data.update({"height": self.height, "left": self.left, "right": self.right})
        elif self.kind == "linear_force":
            data.update({"force_amplitude": self.force_amplitude, "force_frequency": self.force_frequency})
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SegmentBlock":
        omega = data.get("omega")
        return cls(
            kind=str(data.get("kind", "free")),
            duration_tau=float(data.get("duration_tau", 1.0)),
            omega=None if omega is None else float(omega),
            center=float(data.get("center", 0.0)),
            height=float(data.get("height", 0.0)),
            left=float(data.get("left", 0.0)),
            right=float(data.get("right", 0.0)),
            force_amplitude=float(data.get("force_amplitude", 0.0)),
            force_frequency=float(data.get("force_frequency", 0.0)),
            lens=bool(data.get("lens", False)),
        )


@dataclass
class SlingBlock:
    """Switch-off / free flight / capture protocol"""
    flight_tau: float = 1.0
    capture_omega: Optional[float] = None   # None: matched omega / |delta_1|^2
    hold_periods: float = 1.0
    lens: bool = True

    def to_dict(self) -> Dict[str, Any]:
        return {
            "flight_tau": self.flight_tau,
            "capture_omega": self.capture_omega,
            "hold_periods": self.hold_periods,
            "lens": self.lens,
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "SlingBlock":
        capture = data.get("capture_omega")
        return cls(
            flight_tau=float(data.get("flight_tau", 1.0)),
            capture_omega=None if capture is None else float(capture),
            hold_periods=float(data.get("hold_periods", 1.0)),
            lens=bool(data.get("lens", True)),
        )


@dataclass
class ScheduleBlock:
    segments: List[SegmentBlock] = field(default_factory=list)
    snapshots_per_segment: int = 8
    sling: Optional[SlingBlock] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "segments": [segment.to_dict() for segment in self.segments],
            "snapshots_per_segment": self.snapshots_per_segment,
            "sling": None if self.sling is None else self.sling.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "ScheduleBlock":
        sling = data.get("sling")
        return cls(
            segments=[SegmentBlock.from_dict(item) for item in data.get("segments", [])],
            snapshots_per_segment=int(data.get("snapshots_per_segment", 8)),
            sling=None if sling is None else SlingBlock.from_dict(sling),
        )


@dataclass
class AuditBlock:
    n_max: int = 8
    times_tau: List[float] = field(default_factory=lambda: [0.0, 1.0, 2.0])

    def to_dict(self) -> Dict[str, Any]:
        return {"n_max": self.n_max, "times_tau": list(self.times_tau)}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "AuditBlock":
        return cls(
            n_max=int(data.get("n_max", 8)),
            times_tau=[float(value) for value in data.get("times_tau", [0.0, 1.0, 2.0])],
        )


@dataclass
class OutputBlock:
    path: str = "qat_output.csv"
    format: str = "csv"
    components: bool = False    # also emit Re/Im columns

    def to_dict(self) -> Dict[str, Any]:
        return {"path": self.path, "format": self.format, "components": self.components}

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "OutputBlock":
        return cls(
            path=str(data.get("path", "qat_output.csv")),
            format=str(data.get("format", "csv")),
            components=bool(data.get("components", False)),
        )


@dataclass
class RunConfig:
    """Declarative run document for the CLI"""
    scales: ScalesBlock = field(default_factory=ScalesBlock)
    states: List[StateBlock] = field(default_factory=lambda: [StateBlock()])
    times_tau: List[float] = field(default_factory=lambda: [0.0])
    grid: GridBlock = field(default_factory=GridBlock)
    schedule: ScheduleBlock = field(default_factory=ScheduleBlock)
    audit: AuditBlock = field(default_factory=AuditBlock)
    output: OutputBlock = field(default_factory=OutputBlock)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "scales": self.scales.to_dict(),
            "states": [state.to_dict() for state in self.states],
            "times_tau": list(self.times_tau),
            "grid": self.grid.to_dict(),
            "schedule": self.schedule.to_dict(),
            "audit": self.audit.to_dict(),
            "output": self.output.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        return cls(
            scales=ScalesBlock.from_dict(data.get("scales", {})),
            states=[StateBlock.from_dict(item) for item in data.get("states", [{}])],
            times_tau=[float(value) for value in data.get("times_tau", [0.0])],
            grid=GridBlock.from_dict(data.get("grid", {})),
            schedule=ScheduleBlock.from_dict(data.get("schedule", {})),
            audit=AuditBlock.from_dict(data.get("audit", {})),
            output=OutputBlock.from_dict(data.get("output", {})),
        )

    def dumps(self) -> str:
        """Serialize with a fixed key order"""
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def loads(cls, text: str) -> "RunConfig":
        return cls.from_dict(json.loads(text))


# Global configuration instance
config = Config()

# Export commonly used settings
GRID = config.grid
TOLERANCES = config.tolerances
PROPAGATION = config.propagation
OUTPUT = config.output
LOGGING = config.logging
