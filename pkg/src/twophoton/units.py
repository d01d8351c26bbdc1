"""Parsing of suffixed length, angle and duration strings into SI floats.

Config files may write ``"0.13mm"``, ``"916nm"``, ``"4m"``, ``"2.4mrad"`` or
``"100s"``; everything is stored internally as meters, radians and seconds.
Bare numbers are taken to be SI already.
"""

from __future__ import annotations

import re

LENGTH_UNITS = {
    "m": 1.0,
    "cm": 1e-2,
    "mm": 1e-3,
    "um": 1e-6,
    "µm": 1e-6,
    "nm": 1e-9,
    "pm": 1e-12,
}

ANGLE_UNITS = {
    "rad": 1.0,
    "mrad": 1e-3,
    "urad": 1e-6,
    "µrad": 1e-6,
    "deg": 0.017453292519943295,
}

TIME_UNITS = {
    "s": 1.0,
    "ms": 1e-3,
    "us": 1e-6,
    "µs": 1e-6,
    "ns": 1e-9,
}

_QUANTITY = re.compile(
    r"^\s*([-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?)\s*([a-zA-Zµ]*)\s*$"
)


class UnitError(ValueError):
    """Raised for strings that do not parse as a quantity of the expected kind."""


def _parse(value, table, kind):
    if isinstance(value, bool):
        raise UnitError(f"expected a {kind}, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if not isinstance(value, str):
        raise UnitError(f"expected a {kind}, got {value!r}")
    match = _QUANTITY.match(value)
    if match is None:
        raise UnitError(f"cannot parse {value!r} as a {kind}")
    number, suffix = match.groups()
    if not suffix:
        return float(number)
    if suffix not in table:
        allowed = ", ".join(sorted(table))
        raise UnitError(f"unknown {kind} unit {suffix!r} in {value!r} (allowed: {allowed})")
    return float(number) * table[suffix]


def parse_length(value) -> float:
    """Length in meters, e.g. ``parse_length("0.13mm") == 1.3e-4``."""
    return _parse(value, LENGTH_UNITS, "length")


def parse_angle(value) -> float:
    """Angle in radians, e.g. ``parse_angle("2.4mrad") == 2.4e-3``."""
    return _parse(value, ANGLE_UNITS, "angle")


def parse_duration(value) -> float:
    """Duration in seconds."""
    return _parse(value, TIME_UNITS, "duration")
