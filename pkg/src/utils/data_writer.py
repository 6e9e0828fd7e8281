"""
Data file emission

Profile data goes to CSV through pandas with the column meanings written as
"# " header comments; reports and summaries go to JSON with sorted keys.
Floats use 17 significant digits and every file is written to a temporary
sibling and renamed into place, so identical inputs give byte-identical files.
"""

import json
import logging
import math
import os
import re
import tempfile
from pathlib import Path
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np
import pandas as pd

from src.config.settings import OUTPUT

logger = logging.getLogger(__name__)

# Finite floats travel through json.dumps as marked strings holding their formatted literal
_FLOAT_MARK = "\x00"
_MARKED_FLOAT = re.compile(r'"\\u0000([^"\\]+)\\u0000"')


def to_jsonable(value: Any) -> Any:
    """Convert numpy scalars/arrays, complex numbers and paths to JSON types"""
    if isinstance(value, dict):
        return {str(key): to_jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(item) for item in value]
    if isinstance(value, np.ndarray):
        return to_jsonable(value.tolist())
    if isinstance(value, (complex, np.complexfloating)):
        return [float(value.real), float(value.imag)]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, Path):
        return str(value)
    return value


def _atomic_write(path: Path, text: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    handle, temporary = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="") as stream:
            stream.write(text)
        os.replace(temporary, path)
    except Exception:
        if os.path.exists(temporary):
            os.remove(temporary)
        raise
    return path


class DataWriter:
    """CSV and JSON writers with fixed formatting"""

    def __init__(self, float_format: Optional[str] = None, json_indent: Optional[int] = None):
        self.float_format = OUTPUT.float_format if float_format is None else float_format
        self.json_indent = OUTPUT.json_indent if json_indent is None else json_indent
        self.write_stats = {"csv_files": 0, "json_files": 0, "rows_written": 0}

    def csv_text(self, frame: pd.DataFrame, header_lines: Sequence[str] = ()) -> str:
        comments = "".join(f"# {line}\n" for line in header_lines)
        body = frame.to_csv(index=False, float_format=self.float_format, lineterminator="\n")
        return comments + body

    def write_csv(self, path: Path, frame: pd.DataFrame, header_lines: Sequence[str] = ()) -> Path:
        """
        Write a long-format table

        Args:
            path: Target file
            frame: Rows in their final order
            header_lines: Comment lines describing the columns
        """
        written = _atomic_write(path, self.csv_text(frame, header_lines))
        self.write_stats["csv_files"] += 1
        self.write_stats["rows_written"] += len(frame)
        logger.info(f"💾 Wrote {len(frame):,} rows to {written}")
        return written

    def format_float(self, value: float) -> str:
        text = self.float_format % value
        return text if any(char in text for char in ".eE") else text + ".0"

    def _mark_floats(self, value: Any) -> Any:
        if isinstance(value, dict):
            return {key: self._mark_floats(item) for key, item in value.items()}
        if isinstance(value, list):
            return [self._mark_floats(item) for item in value]
        if isinstance(value, float) and math.isfinite(value):
            return f"{_FLOAT_MARK}{self.format_float(value)}{_FLOAT_MARK}"
        return value

    def json_text(self, payload: Any) -> str:
        """JSON with sorted keys; finite floats use the CSV float format, NaN and infinities stay bare"""
        text = json.dumps(
            self._mark_floats(to_jsonable(payload)), indent=self.json_indent, sort_keys=True, allow_nan=True
        )
        return _MARKED_FLOAT.sub(r"\1", text) + "\n"

    def write_json(self, path: Path, payload: Any) -> Path:
        written = _atomic_write(path, self.json_text(payload))
        self.write_stats["json_files"] += 1
        logger.info(f"💾 Wrote report to {written}")
        return written

    def write_records(self, path: Path, records: List[Dict[str, Any]], fmt: str,
                      header_lines: Sequence[str] = ()) -> Path:
        """Records as a JSON list or as CSV rows (list-valued fields are flattened per axis)"""
        if fmt == "json":
            return self.write_json(path, records)
        return self.write_csv(path, flatten_records(records), header_lines)

    def get_write_stats(self) -> Dict[str, Any]:
        return dict(self.write_stats)


def flatten_records(records: Iterable[Dict[str, Any]]) -> pd.DataFrame:
    """One column per scalar; list entries become name_0, name_1, ..."""
    rows = []
    for record in records:
        row: Dict[str, Any] = {}
        for key, value in record.items():
            value = to_jsonable(value)
            if isinstance(value, list):
                for index, item in enumerate(value):
                    row[f"{key}_{index}"] = item
            else:
                row[key] = value
        rows.append(row)
    return pd.DataFrame(rows)
