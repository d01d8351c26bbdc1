"""SPDC kinematics and the validity conditions for two-photon narrowing.

Angles are signed scalars in a single transverse plane.  Which side of the
pump a photon leaves on is the caller's business; the functions here only
relate magnitudes through the conservation laws.

The three conditions checked here are:

* ``same-slit``: ``emission_spread << b / D`` so both photons of a pair pass
  the same slit,
* ``diffraction``: ``emission_spread << a / D``, needed for the halved
  single-slit envelope,
* ``erasure``: beam divergence ``> lambda / b``, which washes out the
  first-order (single-photon) double-slit fringes.

"<<" is taken to mean "ratio at least ``threshold_ratio``" (10 by default).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .errors import InvalidParameterError, UnphysicalKinematicsError

ENERGY_TOLERANCE = 1e-6
DEFAULT_THRESHOLD_RATIO = 10.0

SAME_SLIT = "same-slit"
DIFFRACTION = "diffraction"
ERASURE = "erasure"


@dataclass(frozen=True)
class ConditionReport:
    condition_id: str
    ratio: float
    threshold_ratio: float
    passed: bool

    def to_dict(self) -> dict:
        # inf is not valid JSON; emit it as a string the loader understands
        d = asdict(self)
        if math.isinf(self.ratio):
            d["ratio"] = "inf"
        return d


def _require_positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise InvalidParameterError(f"{name} must be positive, got {v!r}")


def energy_conserved(lambda_s: float, lambda_i: float, lambda_p: float,
                     rtol: float = ENERGY_TOLERANCE) -> bool:
    """True iff ``1/lambda_s + 1/lambda_i == 1/lambda_p`` to relative ``rtol``."""
    _require_positive(lambda_s=lambda_s, lambda_i=lambda_i, lambda_p=lambda_p)
    mismatch = abs(1.0 / lambda_s + 1.0 / lambda_i - 1.0 / lambda_p)
    return mismatch <= rtol / lambda_p


def idler_wavelength(lambda_s: float, lambda_p: float) -> float:
    """Idler wavelength fixed by energy conservation."""
    _require_positive(lambda_s=lambda_s, lambda_p=lambda_p)
    if lambda_s <= lambda_p:
        raise UnphysicalKinematicsError(
            f"signal wavelength {lambda_s} must exceed pump wavelength {lambda_p}")
    return 1.0 / (1.0 / lambda_p - 1.0 / lambda_s)


def transverse_matched_internal_angle(k_s: float, alpha_s: float, k_i: float) -> float:
    """Idler internal angle from transverse momentum conservation.

    Solves ``k_s sin(alpha_s) = k_i sin(alpha_i)``.
    """
    _require_positive(k_s=k_s, k_i=k_i)
    sin_i = k_s * math.sin(alpha_s) / k_i
    if abs(sin_i) > 1.0:
        raise UnphysicalKinematicsError(
            f"no real idler angle: k_s sin(alpha_s) / k_i = {sin_i:.6g}")
    return math.asin(sin_i)


def exit_angle(lambda_s: float, beta_s: float, lambda_i: float) -> float:
    """Idler exit angle outside the crystal, ``w_s sin(beta_s) = w_i sin(beta_i)``.

    With frequencies expressed through wavelengths this is
    ``sin(beta_i) = (lambda_i / lambda_s) sin(beta_s)``.
    """
    _require_positive(lambda_s=lambda_s, lambda_i=lambda_i)
    sin_i = (lambda_i / lambda_s) * math.sin(beta_s)
    if abs(sin_i) > 1.0:
        raise UnphysicalKinematicsError(
            f"no real exit angle: (lambda_i/lambda_s) sin(beta_s) = {sin_i:.6g}")
    return math.asin(sin_i)


def _spread_ratio(size: float, delta_theta: float, distance: float) -> float:
    if distance == 0 or delta_theta == 0:
        return math.inf
    return (size / distance) / delta_theta


def _check_geometry(delta_theta, size, distance, size_name):
    if not size > 0:
        raise InvalidParameterError(f"{size_name} must be positive, got {size!r}")
    if distance < 0:
        raise InvalidParameterError(f"D must be nonnegative, got {distance!r}")
    if delta_theta < 0:
        raise InvalidParameterError(f"delta_theta must be nonnegative, got {delta_theta!r}")


def check_same_slit(delta_theta: float, b: float, D: float,
                    threshold_ratio: float = DEFAULT_THRESHOLD_RATIO) -> ConditionReport:
    """Both photons of a pair go through the same slit: ``(b/D)/delta_theta >= threshold``."""
    _check_geometry(delta_theta, b, D, "b")
    ratio = _spread_ratio(b, delta_theta, D)
    return ConditionReport(SAME_SLIT, ratio, threshold_ratio, ratio >= threshold_ratio)


def check_diffraction(delta_theta: float, a: float, D: float,
                      threshold_ratio: float = DEFAULT_THRESHOLD_RATIO) -> ConditionReport:
    """Two-photon single-slit diffraction condition: ``(a/D)/delta_theta >= threshold``."""
    _check_geometry(delta_theta, a, D, "a")
    ratio = _spread_ratio(a, delta_theta, D)
    return ConditionReport(DIFFRACTION, ratio, threshold_ratio, ratio >= threshold_ratio)


def check_erasure(divergence: float, lam: float, b: float) -> ConditionReport:
    """First-order fringes are erased when ``divergence > lam / b`` (strict).

    The report's ``ratio`` is ``divergence / (lam / b)`` with threshold 1.
    """
    _require_positive(lam=lam, b=b)
    if divergence < 0:
        raise InvalidParameterError(f"divergence must be nonnegative, got {divergence!r}")
    limit = lam / b
    return ConditionReport(ERASURE, divergence / limit, 1.0, divergence > limit)
