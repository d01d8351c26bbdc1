"""File formats: pattern CSV + JSON sidecar, count CSV, deterministic JSON.

Pattern CSV has the header ``theta_rad,value`` (plus ``stderr`` for Monte
Carlo patterns) with one row per grid point at full double precision; its
sidecar ``<stem>.json`` holds the normalization and provenance.  Count data
use ``theta_rad,counts,integration_time_s``.
"""

from __future__ import annotations

import csv
import json
import math
from pathlib import Path

import numpy as np

from .core import Pattern
from .synth import CountRecord

PATTERN_HEADER = ["theta_rad", "value"]
COUNTS_HEADER = ["theta_rad", "counts", "integration_time_s"]


class ParseError(ValueError):
    """Malformed input file; the message carries the 1-based line number."""

    def __init__(self, path, line, message):
        super().__init__(f"{path}:{line}: {message}")
        self.path = str(path)
        self.line = line


def _fmt(x) -> str:
    return repr(float(x))


def _clean(obj):
    """Make ``obj`` strict-JSON safe: numpy scalars to Python, non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    return obj


def dumps_json(obj) -> str:
    return json.dumps(_clean(obj), sort_keys=True, indent=2, allow_nan=False) + "\n"


def write_json(obj, path) -> Path:
    path = Path(path)
    path.write_text(dumps_json(obj), encoding="utf-8")
    return path


def sidecar_path(csv_path) -> Path:
    return Path(csv_path).with_suffix(".json")


def write_pattern(pattern: Pattern, path) -> list:
    """Write the CSV and its JSON sidecar; returns both paths."""
    path = Path(path)
    with_err = pattern.stderr is not None
    header = PATTERN_HEADER + (["stderr"] if with_err else [])
    lines = [",".join(header)]
    for i, (t, v) in enumerate(zip(pattern.theta, pattern.value)):
        row = [_fmt(t), _fmt(v)]
        if with_err:
            row.append(_fmt(pattern.stderr[i]))
        lines.append(",".join(row))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    side = write_json({"normalization": pattern.normalization, "meta": pattern.meta},
                      sidecar_path(path))
    return [path, side]


def _rows(path, header):
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise ParseError(path, 1, "empty file") from None
        if [h.strip() for h in first[:len(header)]] != header:
            raise ParseError(path, 1, f"expected header {','.join(header)}, got {','.join(first)}")
        columns = [h.strip() for h in first]
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            yield reader.line_num, columns, row


def read_pattern(path) -> Pattern:
    path = Path(path)
    theta, value, err = [], [], []
    for line, columns, row in _rows(path, PATTERN_HEADER):
        if len(row) != len(columns):
            raise ParseError(path, line, f"expected {len(columns)} fields, got {len(row)}")
        try:
            nums = [float(c) for c in row]
        except ValueError:
            raise ParseError(path, line, f"non-numeric field in {row}") from None
        theta.append(nums[0])
        value.append(nums[1])
        if len(nums) > 2:
            err.append(nums[2])
    side = sidecar_path(path)
    info = json.loads(side.read_text(encoding="utf-8")) if side.exists() else {}
    return Pattern(np.array(theta), np.array(value), info.get("normalization", "peak-one"),
                   info.get("meta", {}), np.array(err) if err else None)


def write_counts(records, path) -> Path:
    path = Path(path)
    lines = [",".join(COUNTS_HEADER)]
    for r in records:
        lines.append(f"{_fmt(r.theta)},{r.counts},{_fmt(r.integration_time)}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_counts(path) -> list:
    """Parse a count CSV; malformed rows raise :class:`ParseError` with the line number."""
    path = Path(path)
    records = []
    for line, _, row in _rows(path, COUNTS_HEADER):
        if len(row) != 3:
            raise ParseError(path, line, f"expected 3 fields, got {len(row)}")
        try:
            theta = float(row[0])
            counts = float(row[1])
            t = float(row[2])
        except ValueError:
            raise ParseError(path, line, f"non-numeric field in {row}") from None
        try:
            records.append(CountRecord(theta, counts, t))
        except ValueError as exc:
            raise ParseError(path, line, str(exc)) from None
    if not records:
        raise ParseError(path, 2, "no data rows")
    return records
