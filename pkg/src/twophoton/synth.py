"""Synthetic coincidence counts and effective-wavelength fitting.

Counts are Poisson draws around ``(peak_rate * pattern + background_rate) * t``.
Fits use the classical Young's double-slit model

    rate(theta) = amplitude * sinc^2(pi a sin(theta) / lam)
                            * cos^2(pi b sin(theta) / lam) + background

which depends on ``a / lam`` and ``b / lam`` only, so a, b and lam cannot
all be free at once.  Holding a and b at the mask geometry leaves a single
effective wavelength: the signal wavelength for classical light, half of it
for entangled pairs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .core import PEAK_ONE, Pattern, SlitMask
from .errors import InvalidParameterError
from .patterns import classical_double_slit, pattern_metrics

PARAMETERS = ("lambda_eff", "a_eff", "b_eff", "amplitude", "background")
ALIASES = {"lambda": "lambda_eff", "lam": "lambda_eff", "a": "a_eff", "b": "b_eff"}
DEFAULT_FIXED = frozenset({"a_eff", "b_eff"})
MIN_FRINGES = 6
MAX_EVALUATIONS = 2000
# sinc^2(x) = 1/2 at x = 1.39156...
SINC2_HALF_MAX = 1.3915573782515103


@dataclass(frozen=True)
class CountRecord:
    theta: float
    counts: int
    integration_time: float

    def __post_init__(self):
        if self.counts < 0 or int(self.counts) != self.counts:
            raise InvalidParameterError(f"counts must be a nonnegative integer, got {self.counts!r}")
        if not self.integration_time > 0:
            raise InvalidParameterError(
                f"integration_time must be positive, got {self.integration_time!r}")
        object.__setattr__(self, "counts", int(self.counts))


def simulate_counts(pattern: Pattern, peak_rate: float, background_rate: float,
                    integration_time: float, seed: int, noiseless: bool = False) -> list:
    """Poisson coincidence counts for a peak-normalized pattern.

    With ``noiseless=True`` each count is the rounded expectation instead of
    a draw; useful for self-consistency checks.
    """
    if pattern.normalization != PEAK_ONE:
        raise InvalidParameterError("simulate_counts needs a peak-one normalized pattern")
    if peak_rate < 0 or background_rate < 0:
        raise InvalidParameterError("rates must be nonnegative")
    if not integration_time > 0:
        raise InvalidParameterError(f"integration_time must be positive, got {integration_time!r}")
    mean = (peak_rate * pattern.value + background_rate) * integration_time
    if noiseless:
        counts = np.rint(mean).astype(np.int64)
    else:
        counts = np.random.default_rng(seed).poisson(mean)
    return [CountRecord(float(t), int(c), float(integration_time))
            for t, c in zip(pattern.theta, counts)]


def records_to_arrays(data):
    theta = np.array([r.theta for r in data], dtype=float)
    counts = np.array([r.counts for r in data], dtype=float)
    times = np.array([r.integration_time for r in data], dtype=float)
    return theta, counts, times


@dataclass(frozen=True)
class FitResult:
    lambda_eff: float
    a_eff: float
    b_eff: float
    amplitude: float
    background: float
    residual_norm: float
    converged: bool
    covariance_diag: dict = field(default_factory=dict)
    free: tuple = ()
    gradient_norm: float = math.nan
    n_evaluations: int = 0

    def stderr(self, name: str) -> float:
        return math.sqrt(self.covariance_diag.get(name, 0.0))

    def model(self, theta):
        """Background-free model rate at ``theta``."""
        return self.amplitude * classical_double_slit(theta, self.a_eff, self.b_eff, self.lambda_eff)

    def to_dict(self) -> dict:
        return {
            "lambda_eff": self.lambda_eff,
            "a_eff": self.a_eff,
            "b_eff": self.b_eff,
            "amplitude": self.amplitude,
            "background": self.background,
            "residual_norm": self.residual_norm,
            "converged": self.converged,
            "covariance_diag": dict(sorted(self.covariance_diag.items())),
            "free": list(self.free),
            "gradient_norm": self.gradient_norm,
            "n_evaluations": self.n_evaluations,
        }


def _normalize_fixed(fixed):
    names = set()
    for name in fixed:
        name = ALIASES.get(name, name)
        if name not in PARAMETERS:
            raise InvalidParameterError(f"unknown fit parameter {name!r}")
        names.add(name)
    if not {"lambda_eff", "a_eff", "b_eff"} & names:
        raise InvalidParameterError(
            "lambda_eff, a_eff and b_eff are degenerate; fix at least one of them")
    return names


def _model(theta, p):
    env = np.sinc(p["a_eff"] * np.sin(theta) / p["lambda_eff"]) ** 2
    fringe = np.cos(np.pi * p["b_eff"] * np.sin(theta) / p["lambda_eff"]) ** 2
    return p["amplitude"] * env * fringe + p["background"]


def _uniform(theta, rate):
    steps = np.diff(theta)
    if np.allclose(steps, steps.mean(), rtol=1e-6, atol=0):
        return theta, rate
    grid = np.linspace(theta[0], theta[-1], theta.size)
    return grid, np.interp(grid, theta, rate)


def estimate_ratios(theta, rate):
    """Model-free starting point: ``(b/lam, a/lam, amplitude, background)``.

    The dominant fringe frequency gives ``b / lam`` and the envelope first
    zero (or its FWHM when noise hides the zero) gives ``a / lam``; the latter
    is ``None`` when neither can be read off.
    """
    order = np.argsort(theta)
    theta, rate = theta[order], rate[order]
    grid, y = _uniform(theta, rate)
    background = max(float(np.percentile(rate, 2)), 0.0)
    peak = float(rate.max())
    if peak <= background:
        raise InvalidParameterError("data contain no signal above background")
    metrics = pattern_metrics(Pattern.from_values(grid, np.clip(y - background, 0, None)))
    if metrics.fringe_period is None:
        raise InvalidParameterError("no fringes found in the data")
    n_fringes = (grid[-1] - grid[0]) / metrics.fringe_period
    if n_fringes < MIN_FRINGES:
        raise InvalidParameterError(
            f"data span {n_fringes:.1f} fringe periods; at least {MIN_FRINGES} are needed")
    if metrics.envelope_first_zero is not None:
        a_over_lam = 1.0 / math.sin(metrics.envelope_first_zero)
    elif metrics.envelope_fwhm is not None:
        a_over_lam = 2 * SINC2_HALF_MAX / (math.pi * metrics.envelope_fwhm)
    else:
        a_over_lam = None
    return 1.0 / metrics.fringe_period, a_over_lam, peak - background, background


def initial_guess(theta, rate, mask: SlitMask, fixed, lambda_eff=None) -> dict:
    b_over_lam, a_over_lam, amplitude, background = estimate_ratios(theta, rate)
    if a_over_lam is None:
        a_over_lam = b_over_lam * mask.slit_width / mask.slit_separation
    if "lambda_eff" in fixed:
        lam = float(lambda_eff)
    elif "b_eff" in fixed:
        lam = mask.slit_separation / b_over_lam
    else:
        lam = mask.slit_width / a_over_lam
    return {
        "lambda_eff": lam,
        "a_eff": mask.slit_width if "a_eff" in fixed else a_over_lam * lam,
        "b_eff": mask.slit_separation if "b_eff" in fixed else b_over_lam * lam,
        "amplitude": amplitude,
        "background": background,
    }


def fit_pattern(data, mask: SlitMask, fixed=DEFAULT_FIXED, lambda_eff=None,
                max_evaluations=MAX_EVALUATIONS) -> FitResult:
    """Poisson-weighted least-squares fit of the classical double-slit model.

    ``fixed`` names parameters held constant (aliases ``a``, ``b``,
    ``lambda`` accepted); a and b are held at the mask values, and a fixed
    ``lambda_eff`` takes its value from the ``lambda_eff`` argument.
    Residuals are ``(counts - t * rate) / sqrt(max(counts, 1))``, minimized
    with Levenberg-Marquardt.  A fit that runs out of evaluations comes back
    with ``converged = False`` rather than raising.
    """
    fixed = _normalize_fixed(fixed)
    if "lambda_eff" in fixed and lambda_eff is None:
        raise InvalidParameterError("lambda_eff is fixed but no value was given")
    if mask.n_slits != 2:
        raise InvalidParameterError("the fringe model needs a double-slit mask")
    theta, counts, times = records_to_arrays(data)
    if theta.size < 8:
        raise InvalidParameterError("need at least 8 data points")
    start = initial_guess(theta, counts / times, mask, fixed, lambda_eff)

    free = tuple(p for p in PARAMETERS if p not in fixed)
    scale = np.array([abs(start[p]) if start[p] != 0 else 1.0 for p in free])
    if "background" in free:
        # background often starts at zero; scale it by the signal instead
        scale[free.index("background")] = max(1e-2 * start["amplitude"], abs(start["background"]))
    sigma = np.sqrt(np.maximum(counts, 1.0))

    def unpack(u):
        p = dict(start)
        for name, value in zip(free, u * scale):
            p[name] = value
        return p

    def residuals(u):
        return (counts - times * _model(theta, unpack(u))) / sigma

    u0 = np.array([start[p] for p in free]) / scale
    res = least_squares(residuals, u0, method="lm", xtol=1e-14, ftol=1e-14, gtol=1e-14,
                        max_nfev=max_evaluations)
    best = unpack(res.x)

    J = res.jac
    try:
        variances = np.diag(np.linalg.inv(J.T @ J)) * scale ** 2
    except np.linalg.LinAlgError:
        variances = np.full(len(free), np.inf)
    return FitResult(
        lambda_eff=float(best["lambda_eff"]),
        a_eff=float(best["a_eff"]),
        b_eff=float(best["b_eff"]),
        amplitude=float(best["amplitude"]),
        background=float(best["background"]),
        residual_norm=float(np.linalg.norm(res.fun)),
        converged=bool(res.success and res.status > 0),
        covariance_diag={name: float(v) for name, v in zip(free, variances)},
        free=free,
        gradient_norm=float(np.max(np.abs(J.T @ res.fun))),
        n_evaluations=int(res.nfev),
    )


# -- quantum vs classical ----------------------------------------------------------

@dataclass(frozen=True)
class Ratio:
    value: float
    uncertainty: float

    def to_dict(self) -> dict:
        return {"value": self.value, "uncertainty": self.uncertainty}


@dataclass(frozen=True)
class ComparisonReport:
    period_ratio: Ratio
    envelope_zero_ratio: Ratio
    lambda_ratio: Ratio
    quantum_fit: FitResult
    classical_fit: FitResult
    quantum_metrics: dict
    classical_metrics: dict

    def to_dict(self) -> dict:
        return {
            "period_ratio": self.period_ratio.to_dict(),
            "envelope_zero_ratio": self.envelope_zero_ratio.to_dict(),
            "lambda_ratio": self.lambda_ratio.to_dict(),
            "quantum_fit": self.quantum_fit.to_dict(),
            "classical_fit": self.classical_fit.to_dict(),
            "quantum_metrics": self.quantum_metrics,
            "classical_metrics": self.classical_metrics,
        }


def _fitted_metrics(fit: FitResult, theta):
    grid = np.linspace(theta.min(), theta.max(), max(theta.size, 1601))
    return pattern_metrics(Pattern.from_values(grid, fit.model(grid)))


def _ratio(num, den, rel_num, rel_den):
    value = num / den
    return Ratio(value, abs(value) * math.hypot(rel_num, rel_den))


def quantum_classical_comparison(quantum, classical, mask: SlitMask) -> ComparisonReport:
    """Fit both datasets with a and b held at the mask and compare widths.

    Fringe period and envelope first zero are read off each fitted
    (background-free) model; with a and b fixed both scale with the fitted
    wavelength, so their relative uncertainty is that of ``lambda_eff``.
    """
    fq = fit_pattern(quantum, mask)
    fc = fit_pattern(classical, mask)
    for label, fit in (("quantum", fq), ("classical", fc)):
        if not fit.converged:
            raise InvalidParameterError(f"{label} fit did not converge")
    theta_q = records_to_arrays(quantum)[0]
    theta_c = records_to_arrays(classical)[0]
    mq = _fitted_metrics(fq, theta_q)
    mc = _fitted_metrics(fc, theta_c)
    rel_q = fq.stderr("lambda_eff") / fq.lambda_eff
    rel_c = fc.stderr("lambda_eff") / fc.lambda_eff
    if mq.envelope_first_zero is None or mc.envelope_first_zero is None:
        raise InvalidParameterError("fitted model has no envelope zero inside the data range")
    return ComparisonReport(
        period_ratio=_ratio(mq.fringe_period, mc.fringe_period, rel_q, rel_c),
        envelope_zero_ratio=_ratio(mq.envelope_first_zero, mc.envelope_first_zero, rel_q, rel_c),
        lambda_ratio=_ratio(fq.lambda_eff, fc.lambda_eff, rel_q, rel_c),
        quantum_fit=fq,
        classical_fit=fc,
        quantum_metrics=mq.to_dict(),
        classical_metrics=mc.to_dict(),
    )
