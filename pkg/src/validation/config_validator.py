"""
RunConfig validation with line-precise messages

The run document is JSON. Before it is turned into a RunConfig, every value
is located in the source text (path -> line) and checked against the
preconditions of the module that will consume it, so problems are reported
as "line N: path: problem" before any computation starts.
"""

import json
import logging
import math
from typing import Any, Dict, List, Optional, Tuple

from src.config.settings import RunConfig
from src.validation.errors import ConfigValidationError

logger = logging.getLogger(__name__)

_DECODER = json.JSONDecoder()
_WHITESPACE = " \t\n\r"

TOP_LEVEL_KEYS = {"scales", "states", "times_tau", "grid", "schedule", "audit", "output"}
BLOCK_KEYS = {
    "scales": {"mass", "hbar", "omega"},
    "grid": {"half_width", "points", "center"},
    "schedule": {"segments", "snapshots_per_segment", "sling"},
    "sling": {"flight_tau", "capture_omega", "hold_periods", "lens"},
    "audit": {"n_max", "times_tau"},
    "output": {"path", "format", "components"},
    "state": {"label", "geometry", "n", "a", "r", "ns", "amplitudes", "l", "m", "chirality"},
    "segment": {
        "kind", "duration_tau", "omega", "center", "height", "left", "right",
        "force_amplitude", "force_frequency", "lens",
    },
}
GEOMETRIES = ("line", "cartesian", "polar", "spherical")
SEGMENT_KINDS = ("free", "harmonic", "square", "linear_force")
OUTPUT_FORMATS = ("csv", "json")
MAX_AUDIT_INDEX = 64


def locate_lines(text: str) -> Dict[str, int]:
    """
    Map every JSON path ("states[0].n", "grid") to the line its value starts on

    Assumes text is valid JSON.
    """
    lines: Dict[str, int] = {}

    def skip(index: int) -> int:
        while index < len(text) and text[index] in _WHITESPACE:
            index += 1
        return index

    def line_of(index: int) -> int:
        return text.count("\n", 0, index) + 1

    def walk(index: int, path: str) -> int:
        index = skip(index)
        lines[path] = line_of(index)
        char = text[index]
        if char == "{":
            index = skip(index + 1)
            if text[index] == "}":
                return index + 1
            while True:
                key, index = json.decoder.scanstring(text, skip(index) + 1)
                index = skip(index) + 1  # colon
                index = skip(walk(index, f"{path}.{key}" if path else key))
                if text[index] == "}":
                    return index + 1
                index += 1
        if char == "[":
            index = skip(index + 1)
            if text[index] == "]":
                return index + 1
            position = 0
            while True:
                index = skip(walk(index, f"{path}[{position}]"))
                position += 1
                if text[index] == "]":
                    return index + 1
                index += 1
        _, end = _DECODER.raw_decode(text, index)
        return end

    walk(0, "")
    return lines


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool) and math.isfinite(value)


def _is_integer(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


class ConfigValidator:
    """
    Validate run documents against module preconditions
    """

    def __init__(self):
        self.validation_stats = {
            "documents_validated": 0,
            "documents_rejected": 0,
            "problems_found": 0,
        }
        self._problems: List[Tuple[int, str, str]] = []
        self._lines: Dict[str, int] = {}

    # -- helpers ------------------------------------------------------------

    def _report(self, path: str, problem: str) -> None:
        line = self._lines.get(path)
        if line is None:
            # missing keys are reported on their parent's line
            parent = path.rsplit(".", 1)[0] if "." in path else ""
            line = self._lines.get(parent, 1)
        self._problems.append((line, path, problem))

    def _check_keys(self, block: Dict[str, Any], allowed: set, path: str) -> None:
        for key in sorted(set(block) - allowed):
            self._report(f"{path}.{key}" if path else key, "unknown key")

    def _require_object(self, value: Any, path: str) -> bool:
        if not isinstance(value, dict):
            self._report(path, "must be an object")
            return False
        return True

    def _positive(self, block: Dict[str, Any], key: str, path: str, allow_none: bool = False) -> None:
        if key not in block:
            return
        value = block[key]
        if value is None and allow_none:
            return
        if not _is_number(value) or value <= 0:
            self._report(f"{path}.{key}", f"must be a positive finite number, got {value!r}")

    def _finite(self, block: Dict[str, Any], key: str, path: str) -> None:
        if key in block and not _is_number(block[key]):
            self._report(f"{path}.{key}", f"must be a finite number, got {block[key]!r}")

    def _integer(self, block: Dict[str, Any], key: str, path: str, minimum: int = 0,
                 maximum: Optional[int] = None) -> None:
        if key not in block:
            return
        value = block[key]
        if not _is_integer(value) or value < minimum or (maximum is not None and value > maximum):
            bound = f">= {minimum}" if maximum is None else f"in [{minimum}, {maximum}]"
            self._report(f"{path}.{key}", f"must be an integer {bound}, got {value!r}")

    def _boolean(self, block: Dict[str, Any], key: str, path: str) -> None:
        if key in block and not isinstance(block[key], bool):
            self._report(f"{path}.{key}", f"must be true or false, got {block[key]!r}")

    def _complex(self, value: Any, path: str) -> None:
        if _is_number(value):
            return
        if not (isinstance(value, list) and len(value) == 2 and all(_is_number(item) for item in value)):
            self._report(path, f"must be a number or [re, im], got {value!r}")

    def _number_list(self, block: Dict[str, Any], key: str, path: str) -> None:
        if key not in block:
            return
        values = block[key]
        if not isinstance(values, list):
            self._report(f"{path}.{key}" if path else key, "must be a list of numbers")
            return
        for index, value in enumerate(values):
            if not _is_number(value):
                self._report(f"{path}.{key}[{index}]" if path else f"{key}[{index}]", f"must be a finite number, got {value!r}")

    # -- blocks -------------------------------------------------------------

    def _validate_scales(self, block: Any) -> None:
        if not self._require_object(block, "scales"):
            return
        self._check_keys(block, BLOCK_KEYS["scales"], "scales")
        for key in ("mass", "hbar", "omega"):
            self._positive(block, key, "scales")

    def _validate_state(self, block: Any, path: str, labels: set) -> None:
        if not self._require_object(block, path):
            return
        self._check_keys(block, BLOCK_KEYS["state"], path)
        label = block.get("label", "psi")
        if not isinstance(label, str) or not label:
            self._report(f"{path}.label", "must be a non-empty string")
        elif label in labels:
            self._report(f"{path}.label", f"duplicate state label {label!r}")
        else:
            labels.add(label)

        geometry = block.get("geometry", "line")
        if geometry not in GEOMETRIES:
            self._report(f"{path}.geometry", f"must be one of {', '.join(GEOMETRIES)}, got {geometry!r}")
            return
        if geometry == "line":
            self._integer(block, "n", path)
            if "a" in block:
                self._complex(block["a"], f"{path}.a")
            self._finite(block, "r", path)
        elif geometry == "cartesian":
            ns = block.get("ns")
            if not isinstance(ns, list) or not ns:
                self._report(f"{path}.ns", "cartesian states need a non-empty ns list")
                return
            for index, value in enumerate(ns):
                if not _is_integer(value) or value < 0:
                    self._report(f"{path}.ns[{index}]", f"must be a non-negative integer, got {value!r}")
            amplitudes = block.get("amplitudes", [])
            if not isinstance(amplitudes, list) or (amplitudes and len(amplitudes) != len(ns)):
                self._report(f"{path}.amplitudes", "must be empty or have one entry per axis")
            else:
                for index, value in enumerate(amplitudes):
                    self._complex(value, f"{path}.amplitudes[{index}]")
        elif geometry == "polar":
            self._integer(block, "n", path)
            self._integer(block, "l", path)
            if block.get("chirality", 1) not in (1, -1):
                self._report(f"{path}.chirality", "must be +1 or -1")
        else:
            self._integer(block, "n", path, minimum=1)
            self._integer(block, "l", path)
            l_value, m_value = block.get("l", 0), block.get("m", 0)
            if not _is_integer(m_value) or (_is_integer(l_value) and abs(m_value) > l_value):
                self._report(f"{path}.m", f"must be an integer with |m| <= l, got {m_value!r}")
            if "n" not in block:
                self._report(f"{path}.n", "spherical states need n >= 1")

    def _validate_grid(self, block: Any) -> None:
        if not self._require_object(block, "grid"):
            return
        self._check_keys(block, BLOCK_KEYS["grid"], "grid")
        self._positive(block, "half_width", "grid")
        self._integer(block, "points", "grid")
        self._finite(block, "center", "grid")

    def _validate_segment(self, block: Any, path: str) -> None:
        if not self._require_object(block, path):
            return
        self._check_keys(block, BLOCK_KEYS["segment"], path)
        kind = block.get("kind", "free")
        if kind not in SEGMENT_KINDS:
            self._report(f"{path}.kind", f"must be one of {', '.join(SEGMENT_KINDS)}, got {kind!r}")
            return
        self._positive(block, "duration_tau", path)
        for key in ("center", "height", "left", "right", "force_amplitude", "force_frequency"):
            self._finite(block, key, path)
        self._positive(block, "omega", path, allow_none=True)
        self._boolean(block, "lens", path)
        if kind == "square":
            left, right = block.get("left", 0.0), block.get("right", 0.0)
            if _is_number(left) and _is_number(right) and not left < right:
                self._report(f"{path}.right", f"square segments need left < right, got [{left}, {right}]")

    def _validate_schedule(self, block: Any) -> None:
        if not self._require_object(block, "schedule"):
            return
        self._check_keys(block, BLOCK_KEYS["schedule"], "schedule")
        segments = block.get("segments", [])
        if not isinstance(segments, list):
            self._report("schedule.segments", "must be a list")
        else:
            for index, segment in enumerate(segments):
                self._validate_segment(segment, f"schedule.segments[{index}]")
        self._integer(block, "snapshots_per_segment", "schedule", minimum=1)
        sling = block.get("sling")
        if sling is not None and self._require_object(sling, "schedule.sling"):
            self._check_keys(sling, BLOCK_KEYS["sling"], "schedule.sling")
            self._positive(sling, "flight_tau", "schedule.sling")
            self._positive(sling, "capture_omega", "schedule.sling", allow_none=True)
            self._positive(sling, "hold_periods", "schedule.sling")
            self._boolean(sling, "lens", "schedule.sling")

    def _validate_audit(self, block: Any) -> None:
        if not self._require_object(block, "audit"):
            return
        self._check_keys(block, BLOCK_KEYS["audit"], "audit")
        self._integer(block, "n_max", "audit", maximum=MAX_AUDIT_INDEX)
        self._number_list(block, "times_tau", "audit")

    def _validate_output(self, block: Any) -> None:
        if not self._require_object(block, "output"):
            return
        self._check_keys(block, BLOCK_KEYS["output"], "output")
        if block.get("format", "csv") not in OUTPUT_FORMATS:
            self._report("output.format", f"must be csv or json, got {block.get('format')!r}")
        if not isinstance(block.get("path", "qat_output.csv"), str):
            self._report("output.path", "must be a string")
        self._boolean(block, "components", "output")

    # -- entry points -------------------------------------------------------

    def validate_data(self, data: Any, lines: Optional[Dict[str, int]] = None) -> List[str]:
        """Problems found in a parsed document, as "line N: path: problem" strings"""
        self._problems = []
        self._lines = lines or {}
        if not isinstance(data, dict):
            self._report("", "the run document must be a JSON object")
        else:
            self._check_keys(data, TOP_LEVEL_KEYS, "")
            if "scales" in data:
                self._validate_scales(data["scales"])
            states = data.get("states", [{}])
            if not isinstance(states, list) or not states:
                self._report("states", "must be a non-empty list")
            else:
                labels: set = set()
                for index, state in enumerate(states):
                    self._validate_state(state, f"states[{index}]", labels)
            self._number_list(data, "times_tau", "")
            if "grid" in data:
                self._validate_grid(data["grid"])
            if "schedule" in data:
                self._validate_schedule(data["schedule"])
            if "audit" in data:
                self._validate_audit(data["audit"])
            if "output" in data:
                self._validate_output(data["output"])

        self._problems.sort(key=lambda item: (item[0], item[1]))
        return [f"line {line}: {path or '<document>'}: {problem}" for line, path, problem in self._problems]

    def validate_text(self, text: str) -> RunConfig:
        """
        Parse and validate a run document

        Raises:
            ConfigValidationError: with every problem found, line-precise
        """
        self.validation_stats["documents_validated"] += 1
        try:
            data = json.loads(text)
        except json.JSONDecodeError as e:
            self._reject([f"line {e.lineno}: <document>: {e.msg}"])
        messages = self.validate_data(data, locate_lines(text))
        if messages:
            self._reject(messages)
        logger.debug("✅ run document validated")
        return RunConfig.from_dict(data)

    def _reject(self, messages: List[str]) -> None:
        self.validation_stats["documents_rejected"] += 1
        self.validation_stats["problems_found"] += len(messages)
        for message in messages:
            logger.error(f"❌ {message}")
        raise ConfigValidationError(messages)

    def get_validation_stats(self) -> Dict[str, Any]:
        return dict(self.validation_stats)

    def reset_stats(self):
        self.validation_stats = {key: 0 for key in self.validation_stats}
