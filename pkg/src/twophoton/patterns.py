"""Closed-form far-field patterns and the metrics read off them.

Convention: ``sinc(x) = sin(x) / x`` with first zero at ``x = pi``.  This is
*not* numpy's normalized ``np.sinc(x) = sin(pi x) / (pi x)``; mixing the two
silently rescales every width by pi.  All formulas use ``sin(theta)``.

An N-photon entangled pattern is the classical pattern evaluated at the
effective wavelength ``lambda / N``: half the fringe period and half the
envelope width for pairs.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Optional

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import brentq, minimize_scalar

from .core import Pattern
from .errors import InvalidParameterError

ENVELOPE_ZERO_FRACTION = 1e-3
FRINGE_POWER_FRACTION = 0.05
CARRIER_FLOOR = 0.1


def sinc(x):
    """``sin(x)/x`` with the analytic limit 1 at ``x = 0``."""
    return np.sinc(np.asarray(x, dtype=float) / np.pi)


def _positive(**values):
    for name, v in values.items():
        if not v > 0:
            raise InvalidParameterError(f"{name} must be positive, got {v!r}")


def _envelope(theta, a, lam, n):
    return sinc(n * np.pi * a * np.sin(theta) / lam) ** 2


def _fringes(theta, b, lam, n):
    return np.cos(n * np.pi * b * np.sin(theta) / lam) ** 2


def _check_double(a, b, lam):
    _positive(a=a, lam=lam)
    if not b > a:
        raise InvalidParameterError(f"slit separation b={b!r} must exceed width a={a!r}")


def classical_single_slit(theta, a, lam):
    """Single-slit intensity ``sinc^2((pi a / lam) sin theta)``."""
    _positive(a=a, lam=lam)
    return _envelope(theta, a, lam, 1)


def classical_double_slit(theta, a, b, lam):
    """Young's double-slit intensity, single-slit envelope times ``cos^2((pi b / lam) sin theta)``."""
    _check_double(a, b, lam)
    return _envelope(theta, a, lam, 1) * _fringes(theta, b, lam, 1)


def biphoton_interference(theta, b, lam):
    """Two-photon coincidence fringes ``cos^2((2 pi b / lam) sin theta)``."""
    _positive(b=b, lam=lam)
    return _fringes(theta, b, lam, 2)


def biphoton_diffraction(theta, a, lam):
    """Two-photon single-slit coincidence rate ``sinc^2((2 pi a / lam) sin theta)``."""
    _positive(a=a, lam=lam)
    return _envelope(theta, a, lam, 2)


def biphoton_double_slit(theta, a, b, lam):
    """Two-photon double-slit coincidence rate: diffraction times interference."""
    _check_double(a, b, lam)
    return _envelope(theta, a, lam, 2) * _fringes(theta, b, lam, 2)


def nphoton_double_slit(theta, n, a, b, lam):
    """N-fold coincidence rate, ``sinc^2((N pi a/lam) sin theta) cos^2((N pi b/lam) sin theta)``.

    ``n = 1`` is the classical pattern and ``n = 2`` the biphoton pattern,
    bit for bit.
    """
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterError(f"photon number must be an integer >= 1, got {n!r}")
    _check_double(a, b, lam)
    return _envelope(theta, a, lam, n) * _fringes(theta, b, lam, n)


def nphoton_single_slit(theta, n, a, lam):
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidParameterError(f"photon number must be an integer >= 1, got {n!r}")
    _positive(a=a, lam=lam)
    return _envelope(theta, a, lam, n)


def closed_form_pattern(setup, n=None) -> Pattern:
    """Closed-form N-photon pattern for a setup's mask on its detection grid.

    ``n`` defaults to ``setup.detection.photon_number``.
    """
    n = setup.detection.photon_number if n is None else n
    theta = setup.detection.theta_grid
    mask = setup.mask
    lam = setup.wavelength
    if mask.n_slits == 2:
        value = nphoton_double_slit(theta, n, mask.slit_width, mask.slit_separation, lam)
        formula = "nphoton_double_slit"
    else:
        value = nphoton_single_slit(theta, n, mask.slit_width, lam)
        formula = "nphoton_single_slit"
    meta = {
        "formula": formula,
        "photon_number": int(n),
        "slit_width": mask.slit_width,
        "slit_separation": mask.slit_separation,
        "wavelength": lam,
    }
    return Pattern.from_values(theta, value, meta)


# -- metrics ------------------------------------------------------------------

@dataclass(frozen=True)
class PatternMetrics:
    """Fringe period and envelope widths in radians; ``None`` when undefined."""

    fringe_period: Optional[float]
    envelope_first_zero: Optional[float]
    envelope_fwhm: Optional[float]

    def to_dict(self) -> dict:
        return {
            "fringe_period": self.fringe_period,
            "envelope_first_zero": self.envelope_first_zero,
            "envelope_fwhm": self.envelope_fwhm,
        }


def _dtft(theta, y, freqs):
    return np.exp(-2j * np.pi * np.outer(freqs, theta)) @ y


def _dominant_fringe(theta, y, step):
    """Fringe frequency (cycles per radian) and phase, or ``None`` for no fringes.

    The Hann-tapered spectrum is scanned from DC; the envelope occupies the
    band up to the first spectral minimum, and the strongest bin beyond it is
    the fringe candidate.  It counts only if its magnitude exceeds
    ``FRINGE_POWER_FRACTION`` of the DC term.
    """
    if np.ptp(y) <= 1e-12 * np.max(np.abs(y)) or np.sum(y) <= 0:
        return None
    taper = np.hanning(theta.size + 2)[1:-1]
    yw = y * taper
    n_fft = 8 * theta.size
    mag = np.abs(np.fft.rfft(yw, n=n_fft))
    freqs = np.fft.rfftfreq(n_fft, d=step)
    rising = np.nonzero(np.diff(mag) > 0)[0]
    if rising.size == 0:
        return None
    start = rising[0]
    # argmax returns the first maximum, i.e. the lowest frequency on ties
    peak = start + int(np.argmax(mag[start:]))
    if mag[peak] < FRINGE_POWER_FRACTION * mag[0]:
        return None
    lo = freqs[max(peak - 1, 0)]
    hi = freqs[min(peak + 1, freqs.size - 1)]
    res = minimize_scalar(lambda f: -abs(_dtft(theta, yw, [f])[0]), bounds=(lo, hi),
                          method="bounded", options={"xatol": 1e-9 * freqs[peak]})
    f0 = float(res.x)
    phase = float(np.angle(_dtft(theta, yw, [f0])[0]))
    return f0, phase


def _first_zero(x, env, peak):
    """First local minimum of a sampled envelope that dips below the zero threshold."""
    if x.size < 4:
        return None
    spline = CubicSpline(x, env)
    fine = np.linspace(x[0], x[-1], 20 * x.size)
    ef = spline(fine)
    idx = np.nonzero((ef[1:-1] <= ef[:-2]) & (ef[1:-1] < ef[2:]))[0] + 1
    for i in idx:
        res = minimize_scalar(spline, bounds=(fine[i - 1], fine[i + 1]), method="bounded",
                              options={"xatol": 1e-12})
        if spline(res.x) < ENVELOPE_ZERO_FRACTION * peak:
            return float(res.x)
    return None


def _half_max(x, env, peak):
    above = env >= 0.5 * peak
    below = np.nonzero(~above)[0]
    if below.size == 0 or below[0] == 0:
        return None
    i = below[0]
    spline = CubicSpline(x, env - 0.5 * peak)
    return float(brentq(spline, x[i - 1], x[i]))


def pattern_metrics(p: Pattern) -> PatternMetrics:
    """Fringe period, envelope first zero and envelope FWHM of a sampled pattern.

    The grid must be uniform.  The period comes from the dominant spectral
    peak above the envelope band.  For fringed patterns the envelope is the
    pattern divided by the fitted ``cos^2`` fringe term, kept only where that
    term exceeds 0.1 and spline-interpolated across fringe nulls.  The first
    zero is the first local minimum of the envelope on the right of the
    central peak whose value is below 1e-3 of the peak.
    """
    theta = np.asarray(p.theta, dtype=float)
    y = np.asarray(p.value, dtype=float)
    if theta.size < 8:
        raise InvalidParameterError("pattern needs at least 8 samples")
    steps = np.diff(theta)
    step = float(np.mean(steps))
    if not np.allclose(steps, step, rtol=1e-6, atol=0):
        raise InvalidParameterError("pattern_metrics needs a uniform theta grid")

    fringe = _dominant_fringe(theta, y, step)
    period = None
    env_x, env_y = theta, y
    if fringe is not None:
        f0, phase = fringe
        period = 1.0 / f0
        if step > period / 10:
            warnings.warn(f"theta spacing {step:.3g} rad exceeds a tenth of the fringe "
                          f"period {period:.3g} rad; metrics are unreliable", stacklevel=2)
        carrier = np.cos(np.pi * f0 * theta + phase / 2) ** 2
        keep = carrier > CARRIER_FLOOR
        env_x, env_y = theta[keep], y[keep] / carrier[keep]

    center = float(theta[int(np.argmax(y))])
    right = env_x >= center
    x, env = env_x[right], env_y[right]
    if x.size == 0 or env.max() <= 0:
        return PatternMetrics(period, None, None)
    peak = float(env.max())
    if np.ptp(env) <= 1e-12 * peak:
        return PatternMetrics(period, None, None)
    zero = _first_zero(x, env, peak)
    half = _half_max(x, env, peak)
    return PatternMetrics(
        period,
        None if zero is None else zero - center,
        None if half is None else 2 * (half - center),
    )
