#!/usr/bin/env python3
"""
Run-document and command-line checks.

Covers:
1. Line-precise RunConfig validation and validator statistics
2. RunConfig serialization with a fixed key order
3. CSV/JSON emission: 17 significant digits, header comments, atomic writes
4. Every subcommand end to end on a temporary directory, and the exit codes

Run with pytest or directly: python test_cli.py
"""

import json
import logging
import math
import sys
import tempfile
from pathlib import Path
from unittest import mock

import numpy as np
import pandas as pd
import pytest

from main import EXIT_SUCCESS, EXIT_VALIDATION, QatToolkit, main as cli_main
from src.config.settings import RunConfig, ScheduleBlock, SlingBlock, StateBlock
from src.utils.data_writer import DataWriter, flatten_records
from src.validation.config_validator import ConfigValidator, locate_lines
from src.validation.errors import ConfigValidationError, QatToolkitError

logger = logging.getLogger(__name__)


def _write_config(directory: Path, document: dict) -> Path:
    path = directory / "run.json"
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    return path


def _table(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, comment="#")


def test_locate_lines():
    text = '{\n  "scales": {"omega": 1.0},\n  "states": [\n    {"n": 2},\n    {"n": 3}\n  ]\n}'
    lines = locate_lines(text)
    assert lines["scales"] == 2
    assert lines["scales.omega"] == 2
    assert lines["states"] == 3
    assert lines["states[0].n"] == 4
    assert lines["states[1]"] == 5


def test_validation_messages_are_line_precise():
    text = (
        "{\n"
        '  "scales": {"mass": 1.0, "omega": -0.5},\n'
        '  "grid": {"points": 512, "bogus": 1},\n'
        '  "states": [{"label": "a"}, {"label": "a", "geometry": "spherical", "l": 1, "m": 2}]\n'
        "}"
    )
    validator = ConfigValidator()
    with pytest.raises(ConfigValidationError) as excinfo:
        validator.validate_text(text)
    messages = excinfo.value.messages
    assert messages[0] == "line 2: scales.omega: must be a positive finite number, got -0.5"
    assert messages[1] == "line 3: grid.bogus: unknown key"
    assert any(message.startswith("line 4: states[1].label: duplicate") for message in messages)
    assert any("states[1].m" in message for message in messages)
    assert any("states[1].n" in message for message in messages)

    stats = validator.get_validation_stats()
    assert stats == {"documents_validated": 1, "documents_rejected": 1, "problems_found": len(messages)}
    validator.reset_stats()
    assert validator.get_validation_stats()["documents_validated"] == 0


def test_validation_of_malformed_documents():
    with pytest.raises(ConfigValidationError, match="line 3"):
        ConfigValidator().validate_text('{\n  "grid": \n}')
    problems = ConfigValidator().validate_data([1, 2])
    assert problems == ["line 1: <document>: the run document must be a JSON object"]
    problems = ConfigValidator().validate_data({
        "schedule": {"segments": [{"kind": "square", "left": 1.0, "right": 0.5}], "snapshots_per_segment": 0},
        "audit": {"n_max": 100},
        "output": {"format": "xml"},
    })
    assert len(problems) == 4


def test_run_config_round_trip():
    run = RunConfig(
        states=[
            StateBlock(label="packet", n=1, a=1.0 + 2.0j, r=0.25),
            StateBlock(label="vortex", geometry="polar", n=1, l=2, chirality=-1),
            StateBlock(label="mode", geometry="cartesian", ns=[1, 0], amplitudes=[0.5j, 1.0 + 0j]),
        ],
        times_tau=[0.0, 0.5, 1.0],
        schedule=ScheduleBlock(sling=SlingBlock(flight_tau=2.0, lens=False)),
    )
    text = run.dumps()
    assert RunConfig.loads(text) == run
    assert RunConfig.loads(text).dumps() == text
    assert ConfigValidator().validate_text(text) == run


def test_csv_emission(tmp_path):
    writer = DataWriter()
    frame = pd.DataFrame({"x": [0.1, 1.0 / 3.0], "density": [np.float64(2.0), 1e-300]})
    path = writer.write_csv(tmp_path / "profile.csv", frame, ["x: position", "density: |psi|^2"])
    text = path.read_text(encoding="utf-8")
    assert text.splitlines()[:3] == ["# x: position", "# density: |psi|^2", "x,density"]
    assert "0.10000000000000001" in text
    assert "0.33333333333333331" in text
    assert list(tmp_path.iterdir()) == [path]
    assert writer.get_write_stats() == {"csv_files": 1, "json_files": 0, "rows_written": 2}


def test_json_emission(tmp_path):
    writer = DataWriter()
    payload = {"b": np.float64(1.5), "a": 1.0 + 2.0j, "flags": np.array([True, False]), "count": np.int64(3)}
    text = writer.json_text(payload)
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1.0, 2.0], "b": 1.5, "flags": [True, False], "count": 3}
    path = writer.write_json(tmp_path / "nested" / "report.json", payload)
    assert path.read_text(encoding="utf-8") == text

    frame = flatten_records([{"state": "psi", "dx": [1.0, 2.0]}, {"state": "phi", "dx": [3.0, 4.0]}])
    assert list(frame.columns) == ["state", "dx_0", "dx_1"]
    assert frame["dx_1"].tolist() == [2.0, 4.0]


def test_json_floats_match_csv_format():
    writer = DataWriter()
    text = writer.json_text({"x": 0.1, "third": [1.0 / 3.0, -1.0], "big": 1e17, "gap": float("nan"), "label": "0.1"})
    assert '"x": 0.10000000000000001' in text
    assert "0.33333333333333331" in text and "-1.0" in text
    assert '"big": 1e+17' in text
    assert '"gap": NaN' in text
    assert '"label": "0.1"' in text
    decoded = json.loads(text)
    assert decoded["x"] == 0.1 and decoded["third"] == [1.0 / 3.0, -1.0] and decoded["big"] == 1e17
    assert math.isnan(decoded["gap"])


def test_eval_command(tmp_path):
    config_path = _write_config(tmp_path, {
        "states": [{"label": "ground"}, {"label": "moving", "n": 1, "a": [0.5, 0.5]}],
        "times_tau": [0.0, 1.0],
        "grid": {"half_width": 8.0, "points": 64},
        "output": {"components": True},
    })
    out = tmp_path / "profiles.csv"
    assert cli_main(["eval", "--config", str(config_path), "--out", str(out)]) == EXIT_SUCCESS

    comments = [line for line in out.read_text(encoding="utf-8").splitlines() if line.startswith("#")]
    assert comments[0].startswith("# state:")
    table = _table(out)
    assert list(table.columns) == ["state", "t", "x", "density", "re", "im"]
    assert len(table) == 2 * 2 * 64
    assert sorted(table["t"].unique()) == [0.0, 2.0]
    peak = table["density"].max()
    np.testing.assert_allclose(table["density"], table["re"] ** 2 + table["im"] ** 2, rtol=1e-10, atol=1e-14 * peak)
    ground = table[(table["state"] == "ground") & (table["t"] == 0.0)]
    assert abs(ground["density"].sum() * (16.0 / 64) - 1.0) < 1e-10


def test_eval_with_zero_points_writes_header_only(tmp_path):
    config_path = _write_config(tmp_path, {"grid": {"points": 0}})
    out = tmp_path / "empty.csv"
    assert cli_main(["eval", "--config", str(config_path), "--out", str(out)]) == EXIT_SUCCESS
    rows = [line for line in out.read_text(encoding="utf-8").splitlines() if not line.startswith("#")]
    assert rows == ["state,t,x,density"]


def test_audit_command(tmp_path):
    config_path = _write_config(tmp_path, {
        "grid": {"half_width": 20.0, "points": 512},
        "audit": {"n_max": 3, "times_tau": [0.0, 1.0]},
    })
    out = tmp_path / "audit.json"
    assert cli_main(["audit", "--config", str(config_path), "--out", str(out), "--format", "json"]) == EXIT_SUCCESS
    report = json.loads(out.read_text(encoding="utf-8"))
    assert report["overall_success"] is True
    assert set(report["suites"]) == {"ladder", "commutators", "number", "uncertainty", "coherent", "qat"}
    assert report["failed"] == 0 and report["total"] == len(report["checks"])


def test_sling_command(tmp_path):
    config_path = _write_config(tmp_path, {
        "grid": {"half_width": 24.0, "points": 1024},
        "schedule": {"sling": {"flight_tau": 1.0}, "snapshots_per_segment": 4},
    })
    out = tmp_path / "sling.csv"
    assert cli_main(["sling", "--config", str(config_path), "--out", str(out)]) == EXIT_SUCCESS
    summary = json.loads((tmp_path / "sling_summary.json").read_text(encoding="utf-8"))
    assert summary["verdict"]["stationary"] is True
    assert abs(summary["capture"]["fitted_r"] + 0.5 * np.log(2.0)) < 1e-3
    assert len(_table(out)) == summary["snapshots"]


def test_uncertainty_command(tmp_path):
    config_path = _write_config(tmp_path, {
        "states": [{"label": "n0"}, {"label": "n2", "n": 2, "a": [1.0, -0.5]}],
        "times_tau": [0.0, 1.0, 2.0],
    })
    out = tmp_path / "uncertainty.json"
    assert cli_main(["uncertainty", "--config", str(config_path), "--out", str(out), "--format", "json"]) == EXIT_SUCCESS
    rows = json.loads(out.read_text(encoding="utf-8"))
    assert len(rows) == 6
    for row in rows:
        assert row["relative_error"] < 1e-7
    assert abs(rows[4]["expected"] - 2.5 * np.sqrt(2.0)) < 1e-12


def test_qat_roundtrip_command(tmp_path):
    config_path = _write_config(tmp_path, {
        "states": [{"label": "n1", "n": 1}],
        "times_tau": [0.0, 1.0],
    })
    out = tmp_path / "qat.csv"
    assert cli_main(["qat-roundtrip", "--config", str(config_path), "--out", str(out)]) == EXIT_SUCCESS
    table = _table(out)
    assert len(table) == 2
    assert table["passed"].all()
    assert abs(table["t_prime"].iloc[1] - np.arctan(1.0) / 0.5) < 1e-12


def test_invalid_documents_exit_with_validation_code(tmp_path):
    out = tmp_path / "never.csv"
    for document in ({"grid": {"points": -1}}, {"states": [{"geometry": "ring"}]}, {"unknown": 1}):
        config_path = _write_config(tmp_path, document)
        assert cli_main(["eval", "--config", str(config_path), "--out", str(out)]) == EXIT_VALIDATION
    assert not out.exists()
    assert cli_main(["eval", "--config", str(tmp_path / "missing.json"), "--out", str(out)]) == EXIT_VALIDATION


def test_undecodable_document_exits_with_validation_code(tmp_path):
    config_path = tmp_path / "binary.json"
    config_path.write_bytes(b"\xff\xfe{\x00}")
    assert cli_main(["eval", "--config", str(config_path), "--out", str(tmp_path / "x.csv")]) == EXIT_VALIDATION


def test_unexpected_errors_propagate(tmp_path):
    out = tmp_path / "audit.csv"
    with mock.patch.object(QatToolkit, "cmd_audit", side_effect=RuntimeError("broken suite")):
        with pytest.raises(RuntimeError, match="broken suite"):
            cli_main(["audit", "--out", str(out)])
    with mock.patch.object(QatToolkit, "cmd_audit", side_effect=QatToolkitError("suite aborted")):
        assert cli_main(["audit", "--out", str(out)]) == EXIT_VALIDATION


def test_toolkit_without_a_document():
    toolkit = QatToolkit()
    assert toolkit.scales.tau == 2.0
    results = toolkit.cmd_uncertainty()
    assert results["overall_success"]
    assert [row["t"] for row in results["records"]] == [0.0]


def main():
    """Run every check and log a summary"""
    logging.basicConfig(level=logging.INFO, format='%(levelname)s: %(message)s')
    logger.info("🚀 Run document and CLI checks")
    logger.info("=" * 50)

    def in_temporary_directory(func):
        def run():
            with tempfile.TemporaryDirectory() as directory:
                func(Path(directory))
        return run

    tests = [
        ("Line locations", test_locate_lines),
        ("Line-precise validation", test_validation_messages_are_line_precise),
        ("Malformed documents", test_validation_of_malformed_documents),
        ("RunConfig round trip", test_run_config_round_trip),
        ("CSV emission", in_temporary_directory(test_csv_emission)),
        ("JSON emission", in_temporary_directory(test_json_emission)),
        ("JSON float format", test_json_floats_match_csv_format),
        ("eval", in_temporary_directory(test_eval_command)),
        ("eval on zero points", in_temporary_directory(test_eval_with_zero_points_writes_header_only)),
        ("audit", in_temporary_directory(test_audit_command)),
        ("sling", in_temporary_directory(test_sling_command)),
        ("uncertainty", in_temporary_directory(test_uncertainty_command)),
        ("qat-roundtrip", in_temporary_directory(test_qat_roundtrip_command)),
        ("Invalid documents", in_temporary_directory(test_invalid_documents_exit_with_validation_code)),
        ("Undecodable document", in_temporary_directory(test_undecodable_document_exits_with_validation_code)),
        ("Unexpected errors", in_temporary_directory(test_unexpected_errors_propagate)),
        ("Toolkit defaults", test_toolkit_without_a_document),
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
