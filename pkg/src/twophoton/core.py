"""Experiment description types, validation and configuration round-tripping.

Everything is stored in SI units: meters for lengths, radians for angles.
Types are frozen; building one with an invariant-violating field raises
:class:`~twophoton.errors.InvalidSetupError` naming the invariant.
:func:`validate_setup` reports the same checks as findings instead of raising,
and additionally evaluates the two-photon validity conditions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from . import phase_matching as pm
from .errors import InvalidParameterError, InvalidSetupError
from .units import UnitError, parse_angle, parse_length

PASS = "pass"
WARN = "warn"
FAIL = "fail"

PERTURBATIVE_LIMIT = 0.1
PARAXIAL_LIMIT = 0.5
FAR_FIELD_LIMIT = 0.1

DEFAULT_THETA_MAX = 8e-3
DEFAULT_N_POINTS = 1601

PEAK_ONE = "peak-one"
ABSOLUTE_RATE = "absolute-rate"


@dataclass(frozen=True)
class Finding:
    name: str
    status: str
    message: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "status": self.status, "message": self.message}


@dataclass(frozen=True)
class ValidationReport:
    findings: tuple

    @property
    def ok(self) -> bool:
        """True when no hard invariant failed (warnings allowed)."""
        return all(f.status != FAIL for f in self.findings)

    def failures(self) -> list:
        return [f for f in self.findings if f.status == FAIL]

    def get(self, name: str) -> Finding:
        for f in self.findings:
            if f.name == name:
                return f
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"ok": self.ok, "findings": [f.to_dict() for f in self.findings]}


def _finding(name, ok, message, soft=False):
    return Finding(name, PASS if ok else (WARN if soft else FAIL), "" if ok else message)


def _raise_on_fail(findings):
    for f in findings:
        if f.status == FAIL:
            raise InvalidSetupError(f)


@dataclass(frozen=True)
class LinearPhase:
    """Pump phase ramp ``phi(x) = slope * x + offset`` across the crystal face."""

    slope: float
    offset: float = 0.0

    def __call__(self, x):
        return self.slope * np.asarray(x, dtype=float) + self.offset

    def to_dict(self) -> dict:
        return {"kind": "linear", "slope": self.slope, "offset": self.offset}


# -- source -------------------------------------------------------------------

def _source_findings(pump_wavelength, signal_wavelength, idler_wavelength,
                     emission_spread, pump_beam_width, pair_amplitude, divergence=None):
    wavelengths = (pump_wavelength, signal_wavelength, idler_wavelength)
    return [
        _finding("divergence >= 0", divergence is None or divergence >= 0,
                 f"divergence = {divergence}"),
        _finding("wavelengths > 0", all(w > 0 for w in wavelengths),
                 f"wavelengths must be positive, got {wavelengths}"),
        _finding("emission_spread >= 0", emission_spread >= 0,
                 f"emission_spread = {emission_spread}"),
        _finding("pump_beam_width > 0", pump_beam_width > 0,
                 f"pump_beam_width = {pump_beam_width}"),
        _finding("perturbative regime", 0 < pair_amplitude <= PERTURBATIVE_LIMIT,
                 f"pair_amplitude = {pair_amplitude} outside (0, {PERTURBATIVE_LIMIT}]"),
    ]


@dataclass(frozen=True)
class SpdcSource:
    """Down-conversion source.

    ``emission_spread`` is the full range of pair emission angles at the slit
    side of the crystal; ``pump_beam_width`` is the transverse extent of the
    region where pairs are born.  ``pump_phase_profile`` maps transverse
    position to pump phase; ``None`` means constant phase.  ``divergence`` is
    the beam divergence entering the first-order erasure check; ``None``
    falls back to ``emission_spread``.
    """

    pump_wavelength: float
    signal_wavelength: float
    idler_wavelength: float
    emission_spread: float
    pump_beam_width: float
    pair_amplitude: float = 1e-3
    pump_phase_profile: Optional[Callable] = None
    divergence: Optional[float] = None

    def __post_init__(self):
        _raise_on_fail(_source_findings(
            self.pump_wavelength, self.signal_wavelength, self.idler_wavelength,
            self.emission_spread, self.pump_beam_width, self.pair_amplitude, self.divergence))

    @property
    def beam_divergence(self) -> float:
        return self.emission_spread if self.divergence is None else self.divergence

    @property
    def energy_conserving(self) -> bool:
        return pm.energy_conserved(self.signal_wavelength, self.idler_wavelength,
                                   self.pump_wavelength)

    @property
    def degenerate(self) -> bool:
        return self.energy_conserving and math.isclose(
            self.signal_wavelength, self.idler_wavelength, rel_tol=pm.ENERGY_TOLERANCE)


# -- mask ---------------------------------------------------------------------

def _mask_findings(slit_width, slit_separation, n_slits, distance_from_crystal):
    found = [
        _finding("slit_width > 0", slit_width > 0, f"slit_width = {slit_width}"),
        _finding("n_slits in {1, 2}", n_slits in (1, 2), f"n_slits = {n_slits}"),
        _finding("distance_from_crystal >= 0", distance_from_crystal >= 0,
                 f"distance_from_crystal = {distance_from_crystal}"),
    ]
    if n_slits == 2:
        found.append(_finding("slit_separation > slit_width", slit_separation > slit_width,
                              f"slits overlap: separation {slit_separation} <= width {slit_width}"))
    return found


@dataclass(frozen=True)
class SlitMask:
    slit_width: float
    slit_separation: float = 0.0
    n_slits: int = 2
    distance_from_crystal: float = 0.0

    def __post_init__(self):
        _raise_on_fail(_mask_findings(self.slit_width, self.slit_separation,
                                      self.n_slits, self.distance_from_crystal))

    def slit_edges(self) -> list:
        """(left, right) transverse edges of each open slit, centered on x = 0."""
        half = self.slit_width / 2
        if self.n_slits == 1:
            return [(-half, half)]
        c = self.slit_separation / 2
        return [(-c - half, -c + half), (c - half, c + half)]

    def transmits(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros(x.shape, dtype=bool)
        for lo, hi in self.slit_edges():
            out |= (x >= lo) & (x <= hi)
        return out


# -- detection ----------------------------------------------------------------

def default_theta_grid(theta_max=DEFAULT_THETA_MAX, n_points=DEFAULT_N_POINTS):
    return np.linspace(-theta_max, theta_max, n_points)


def _detection_findings(theta_grid, photon_number, propagation_distance):
    theta = np.asarray(theta_grid, dtype=float)
    increasing = theta.ndim == 1 and theta.size >= 1 and bool(np.all(np.diff(theta) > 0))
    finite = bool(np.all(np.isfinite(theta))) if theta.size else False
    paraxial = finite and theta.size > 0 and float(np.max(np.abs(theta))) < PARAXIAL_LIMIT
    return [
        _finding("theta_grid strictly increasing", increasing and finite,
                 "theta_grid must be a non-empty, finite, strictly increasing 1-D list"),
        _finding("paraxial |theta| < 0.5 rad", paraxial,
                 f"theta_grid leaves the paraxial range (|theta| < {PARAXIAL_LIMIT} rad)"),
        _finding("photon_number >= 1", isinstance(photon_number, (int, np.integer))
                 and photon_number >= 1, f"photon_number = {photon_number!r}"),
        _finding("propagation_distance > 0", propagation_distance > 0,
                 f"propagation_distance = {propagation_distance}"),
    ]


@dataclass(frozen=True, eq=False)
class DetectionGeometry:
    theta_grid: np.ndarray = field(default_factory=default_theta_grid)
    photon_number: int = 2
    propagation_distance: float = 4.0

    def __post_init__(self):
        _raise_on_fail(_detection_findings(self.theta_grid, self.photon_number,
                                           self.propagation_distance))
        theta = np.array(self.theta_grid, dtype=float)
        theta.flags.writeable = False
        object.__setattr__(self, "theta_grid", theta)


# -- setup --------------------------------------------------------------------

def _setup_findings(source, mask, detection):
    found = []
    n = detection.photon_number
    conserving = source.energy_conserving
    if n == 2:
        found.append(_finding("energy conservation", conserving,
                              "photon_number = 2 needs w_s + w_i = w_p to 1e-6 relative"))
    else:
        found.append(_finding("energy conservation", conserving,
                              "source wavelengths are not energy conserving", soft=True))
    if mask.n_slits == 2:
        span = mask.slit_separation + mask.slit_width
        found.append(_finding("pump covers mask", source.pump_beam_width >= span,
                              f"pump_beam_width {source.pump_beam_width} < mask span {span}",
                              soft=True))
    fresnel = mask.slit_width ** 2 / source.signal_wavelength / detection.propagation_distance
    found.append(_finding("far field", fresnel <= FAR_FIELD_LIMIT,
                          f"(a^2/lambda)/L = {fresnel:.3g} > {FAR_FIELD_LIMIT}", soft=True))
    return found


def condition_reports(source, mask, threshold_ratio=pm.DEFAULT_THRESHOLD_RATIO) -> list:
    """Same-slit, diffraction and erasure reports for a source/mask pair.

    Divergence for the erasure check is the source's beam divergence.  The
    erasure condition is only meaningful for a double slit; for a single slit
    it is reported against ``slit_width`` so that the report list stays fixed.
    """
    D = mask.distance_from_crystal
    b = mask.slit_separation if mask.n_slits == 2 else mask.slit_width
    return [
        pm.check_same_slit(source.emission_spread, b, D, threshold_ratio),
        pm.check_diffraction(source.emission_spread, mask.slit_width, D, threshold_ratio),
        pm.check_erasure(source.beam_divergence, source.signal_wavelength, b),
    ]


@dataclass(frozen=True, eq=False)
class OpticalSetup:
    source: SpdcSource
    mask: SlitMask
    detection: DetectionGeometry = field(default_factory=DetectionGeometry)

    def __post_init__(self):
        _raise_on_fail(_setup_findings(self.source, self.mask, self.detection))

    @property
    def wavelength(self) -> float:
        """Single-photon (signal) wavelength used for detection."""
        return self.source.signal_wavelength

    def replace(self, **changes) -> "OpticalSetup":
        """Copy with fields of the source, mask or detection swapped out.

        Keys are field names of any of the three parts, e.g.
        ``setup.replace(distance_from_crystal=0.0, photon_number=1)``.
        """
        parts = {"source": self.source, "mask": self.mask, "detection": self.detection}
        updates = {k: {} for k in parts}
        for key, value in changes.items():
            for part_name, part in parts.items():
                if key in part.__dataclass_fields__:
                    updates[part_name][key] = value
                    break
            else:
                raise TypeError(f"unknown setup field {key!r}")
        new = {}
        for part_name, part in parts.items():
            if updates[part_name]:
                kwargs = {k: getattr(part, k) for k in part.__dataclass_fields__}
                kwargs.update(updates[part_name])
                new[part_name] = type(part)(**kwargs)
            else:
                new[part_name] = part
        return OpticalSetup(**new)


def reference_setup(**overrides) -> OpticalSetup:
    """Reference operating point: 458 nm pump, 916 nm pairs, a=0.13 mm, b=0.4 mm.

    Only the ratios of crystal-to-slit distance and emission spread to the
    slit dimensions are fixed by the geometry.  The defaults D = 5.2 mm (5 mm crystal plus a small gap) and 2.4 mrad give
    (b/D)/spread = 32 and (a/D)/spread = 10.4.  The 5 mrad beam divergence
    exceeds lambda/b = 2.29 mrad, so first-order fringes are erased.
    """
    source = SpdcSource(
        pump_wavelength=458e-9,
        signal_wavelength=916e-9,
        idler_wavelength=916e-9,
        emission_spread=2.4e-3,
        pump_beam_width=1e-3,
        pair_amplitude=1e-3,
        divergence=5e-3,
    )
    mask = SlitMask(slit_width=0.13e-3, slit_separation=0.4e-3, n_slits=2,
                    distance_from_crystal=5.2e-3)
    setup = OpticalSetup(source, mask, DetectionGeometry())
    return setup.replace(**overrides) if overrides else setup


# -- validation -----------------------------------------------------------------

def validate_setup(setup, threshold_ratio=pm.DEFAULT_THRESHOLD_RATIO) -> ValidationReport:
    """Check every invariant and validity condition; never raises on bad values.

    ``setup`` is an :class:`OpticalSetup` or a configuration mapping in the
    JSON layout understood by :func:`setup_from_dict`.  Hard invariant
    violations are ``fail`` findings; unmet validity conditions and far-field
    or beam-coverage concerns are ``warn``.
    """
    if isinstance(setup, OpticalSetup):
        src, mask, det = setup.source, setup.mask, setup.detection
        fields = (
            _source_fields(src), _mask_fields(mask), _detection_fields(det))
    else:
        try:
            fields = _parse_config(setup)
        except (UnitError, KeyError, TypeError, ValueError) as exc:
            return ValidationReport((Finding("config parse", FAIL, str(exc)),))

    source_f, mask_f, det_f = fields
    findings = (_source_findings(**{k: v for k, v in source_f.items() if k != "pump_phase_profile"})
                + _mask_findings(**mask_f)
                + _detection_findings(**det_f))
    if any(f.status == FAIL for f in findings):
        return ValidationReport(tuple(findings))

    src = SpdcSource(**source_f)
    mask = SlitMask(**mask_f)
    det = DetectionGeometry(**det_f)
    findings += _setup_findings(src, mask, det)
    for report in condition_reports(src, mask, threshold_ratio):
        findings.append(_finding(f"condition {report.condition_id}", report.passed,
                                 f"ratio {report.ratio:.4g} vs threshold {report.threshold_ratio:g}",
                                 soft=True))
    return ValidationReport(tuple(findings))


# -- configuration ----------------------------------------------------------------

def _source_fields(src):
    return {k: getattr(src, k) for k in SpdcSource.__dataclass_fields__}


def _mask_fields(mask):
    return {k: getattr(mask, k) for k in SlitMask.__dataclass_fields__}


def _detection_fields(det):
    return {k: getattr(det, k) for k in DetectionGeometry.__dataclass_fields__}


def _phase_from_dict(spec):
    if spec is None:
        return None
    kind = spec.get("kind", "constant")
    if kind == "constant":
        return None
    if kind == "linear":
        return LinearPhase(float(spec["slope"]), float(spec.get("offset", 0.0)))
    raise ValueError(f"unknown pump phase kind {kind!r}")


def _parse_config(config: Mapping):
    src = dict(config["source"])
    source = {
        "pump_wavelength": parse_length(src["pump_wavelength"]),
        "signal_wavelength": parse_length(src["signal_wavelength"]),
        "idler_wavelength": parse_length(src.get("idler_wavelength", src["signal_wavelength"])),
        "emission_spread": parse_angle(src.get("emission_spread", 0.0)),
        "pump_beam_width": parse_length(src.get("pump_beam_width", "1mm")),
        "pair_amplitude": float(src.get("pair_amplitude", 1e-3)),
        "pump_phase_profile": _phase_from_dict(src.get("pump_phase")),
        "divergence": None if src.get("divergence") is None else parse_angle(src["divergence"]),
    }
    m = dict(config["mask"])
    mask = {
        "slit_width": parse_length(m["slit_width"]),
        "slit_separation": parse_length(m.get("slit_separation", 0.0)),
        "n_slits": int(m.get("n_slits", 2)),
        "distance_from_crystal": parse_length(m.get("distance_from_crystal", 0.0)),
    }
    d = dict(config.get("detection", {}))
    if "theta_grid" in d:
        grid = np.array([parse_angle(t) for t in d["theta_grid"]], dtype=float)
    else:
        rng = d.get("theta_range", {})
        lo = parse_angle(rng.get("start", -DEFAULT_THETA_MAX))
        hi = parse_angle(rng.get("stop", DEFAULT_THETA_MAX))
        grid = np.linspace(lo, hi, int(rng.get("n_points", DEFAULT_N_POINTS)))
    detection = {
        "theta_grid": grid,
        "photon_number": int(d.get("photon_number", 2)),
        "propagation_distance": parse_length(d.get("propagation_distance", 4.0)),
    }
    return source, mask, detection


def setup_from_dict(config: Mapping) -> OpticalSetup:
    """Build an :class:`OpticalSetup` from a JSON-style mapping.

    Lengths and angles may be SI floats or suffixed strings (``"0.13mm"``,
    ``"2.4mrad"``).  The detection grid is either an explicit ``theta_grid``
    list or ``theta_range: {start, stop, n_points}`` (default +/-8 mrad,
    1601 points).
    """
    try:
        source, mask, detection = _parse_config(config)
    except KeyError as exc:
        raise InvalidParameterError(f"missing config key {exc}") from None
    setup = OpticalSetup(SpdcSource(**source), SlitMask(**mask), DetectionGeometry(**detection))
    return setup


def setup_to_dict(setup: OpticalSetup) -> dict:
    """Canonical serialized form: SI floats only, explicit theta grid."""
    src = setup.source
    phase = src.pump_phase_profile
    if phase is not None and not hasattr(phase, "to_dict"):
        raise InvalidParameterError("custom pump phase profiles cannot be serialized")
    source = {
        "pump_wavelength": src.pump_wavelength,
        "signal_wavelength": src.signal_wavelength,
        "idler_wavelength": src.idler_wavelength,
        "emission_spread": src.emission_spread,
        "pump_beam_width": src.pump_beam_width,
        "pair_amplitude": src.pair_amplitude,
    }
    if phase is not None:
        source["pump_phase"] = phase.to_dict()
    if src.divergence is not None:
        source["divergence"] = src.divergence
    return {
        "source": source,
        "mask": {
            "slit_width": setup.mask.slit_width,
            "slit_separation": setup.mask.slit_separation,
            "n_slits": setup.mask.n_slits,
            "distance_from_crystal": setup.mask.distance_from_crystal,
        },
        "detection": {
            "theta_grid": [float(t) for t in setup.detection.theta_grid],
            "photon_number": setup.detection.photon_number,
            "propagation_distance": setup.detection.propagation_distance,
        },
    }


# -- patterns -------------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Pattern:
    """Angular distribution sampled on a grid.

    ``value`` is a normalized coincidence rate or intensity.  With
    ``normalization == "peak-one"`` the maximum is exactly 1.  ``stderr`` is
    only present for Monte Carlo estimates.
    """

    theta: np.ndarray
    value: np.ndarray
    normalization: str = PEAK_ONE
    meta: dict = field(default_factory=dict)
    stderr: Optional[np.ndarray] = None

    def __post_init__(self):
        theta = np.array(self.theta, dtype=float)
        value = np.array(self.value, dtype=float)
        if theta.shape != value.shape or theta.ndim != 1:
            raise InvalidParameterError("theta and value must be 1-D arrays of equal length")
        if np.any(value < 0) or not np.all(np.isfinite(value)):
            raise InvalidParameterError("pattern values must be finite and nonnegative")
        if self.normalization not in (PEAK_ONE, ABSOLUTE_RATE):
            raise InvalidParameterError(f"unknown normalization {self.normalization!r}")
        if self.normalization == PEAK_ONE and abs(value.max() - 1.0) > 1e-12:
            raise InvalidParameterError(f"peak-one pattern has maximum {value.max()!r}")
        theta.flags.writeable = False
        value.flags.writeable = False
        object.__setattr__(self, "theta", theta)
        object.__setattr__(self, "value", value)
        if self.stderr is not None:
            err = np.array(self.stderr, dtype=float)
            if err.shape != value.shape:
                raise InvalidParameterError("stderr must match value in shape")
            err.flags.writeable = False
            object.__setattr__(self, "stderr", err)

    @classmethod
    def from_values(cls, theta, value, meta=None, stderr=None) -> "Pattern":
        """Peak-normalize ``value``; an all-zero input stays an absolute-rate pattern."""
        value = np.asarray(value, dtype=float)
        peak = value.max() if value.size else 0.0
        if peak <= 0:
            return cls(theta, value, ABSOLUTE_RATE, dict(meta or {}), stderr)
        err = None if stderr is None else np.asarray(stderr, dtype=float) / peak
        return cls(theta, value / peak, PEAK_ONE, dict(meta or {}), err)
