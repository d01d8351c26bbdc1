"""Numeric two-photon amplitude propagation through a slit mask.

A pair is born at transverse position ``x0`` in the crystal plane with
emission angle ``psi``; the signal reaches the slit plane at
``x0 + D tan(psi)`` and the idler, leaving at the opposite angle, at
``x0 - D tan(psi)``.  With both detectors at the same far-field angle the
pair picks up the phase ``k (x_s + x_i) sin(theta) = 2 k x0 sin(theta)``, so
the joint amplitude is

    A(theta) = < T(x_s) T(x_i) exp(i 2 k x0 sin(theta) + i phi(x0)) >

averaged over uniformly distributed birth positions (pump beam width) and
emission angles (emission spread).  Pairs that straddle the two slits are
kept; they only vanish when the slit is close to the crystal.

Two independent estimators are provided: panelled Gauss-Legendre quadrature
(:func:`coincidence_pattern_numeric`) and Monte Carlo sampling
(:func:`monte_carlo_pattern`).
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .core import ABSOLUTE_RATE, OpticalSetup, Pattern
from .errors import ConvergenceError, InvalidParameterError
from .patterns import closed_form_pattern, pattern_metrics

DEFAULT_TOLERANCE = 1e-8
START_ORDER = 8
MAX_ORDER = 512
NODES_PER_CYCLE = 8
MC_CHUNK = 65536
MC_THETA_BLOCK = 64


@dataclass(frozen=True, eq=False)
class BiphotonAmplitude:
    """A batch of sampled pair contributions (arrays of equal length)."""

    birth_position: np.ndarray
    signal_offset: np.ndarray
    idler_offset: np.ndarray
    phase: np.ndarray
    emission_angle: np.ndarray


@dataclass(frozen=True, eq=False)
class PropagationResult:
    pattern: Pattern
    quadrature_order: int
    estimated_error: float
    absolute_peak: float


def _require_pairs(setup: OpticalSetup):
    if setup.detection.photon_number != 2:
        raise InvalidParameterError(
            f"numeric propagation models pairs; photon_number is {setup.detection.photon_number}")
    if not setup.source.degenerate:
        raise InvalidParameterError("numeric propagation needs a degenerate source (lambda_s = lambda_i)")


def _pump_phase(setup, x):
    profile = setup.source.pump_phase_profile
    if profile is None:
        return np.zeros_like(x)
    return np.asarray(profile(x), dtype=float)


def sample_biphotons(setup: OpticalSetup, n: int, rng: np.random.Generator) -> BiphotonAmplitude:
    """Draw ``n`` pairs: uniform birth position over the pump, uniform angle over the spread."""
    src = setup.source
    D = setup.mask.distance_from_crystal
    x0 = rng.uniform(-src.pump_beam_width / 2, src.pump_beam_width / 2, n)
    psi = rng.uniform(-src.emission_spread / 2, src.emission_spread / 2, n)
    walk = D * np.tan(psi)
    return BiphotonAmplitude(x0, x0 + walk, x0 - walk, _pump_phase(setup, x0), psi)


# -- quadrature -----------------------------------------------------------------

def _max_walk(setup):
    D = setup.mask.distance_from_crystal
    return D * math.tan(setup.source.emission_spread / 2)


def _kinks(setup):
    """Birth positions where the pair transmission weight changes slope.

    For signal slit j and idler slit k the allowed walk ``s`` lies between
    the lower bounds ``l_j - x0``, ``x0 - r_k``, ``-S`` and the upper bounds
    ``r_j - x0``, ``x0 - l_k``, ``S``.  Kinks sit where any two of these
    lines cross.
    """
    half_w = setup.source.pump_beam_width / 2
    edges = setup.mask.slit_edges()
    S = _max_walk(setup)
    points = {-half_w, half_w}
    if S == 0:
        for lo, hi in edges:
            points.update((lo, hi))
    else:
        for (lj, rj), (lk, rk) in itertools.product(edges, repeat=2):
            lines = [(lj, -1), (-rk, 1), (-S, 0), (rj, -1), (-lk, 1), (S, 0)]
            for (c1, s1), (c2, s2) in itertools.combinations(lines, 2):
                if s1 != s2:
                    points.add((c2 - c1) / (s1 - s2))
    pts = np.array(sorted(p for p in points if -half_w <= p <= half_w))
    keep = np.concatenate(([True], np.diff(pts) > 1e-15 * max(half_w, 1e-12)))
    return pts[keep]


def _pair_weight(setup, x0, order):
    """Probability that a pair born at ``x0`` passes the mask with both photons.

    The emission-angle integral runs over the allowed sub-interval of angles
    for each (signal slit, idler slit) combination with an ``order``-point
    Gauss-Legendre rule on the angular density.
    """
    spread = setup.source.emission_spread
    S = _max_walk(setup)
    D = setup.mask.distance_from_crystal
    edges = setup.mask.slit_edges()
    if S == 0:
        return setup.mask.transmits(x0).astype(float)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    total = np.zeros_like(x0)
    for (lj, rj), (lk, rk) in itertools.product(edges, repeat=2):
        lo = np.maximum.reduce([lj - x0, x0 - rk, np.full_like(x0, -S)])
        hi = np.minimum.reduce([rj - x0, x0 - lk, np.full_like(x0, S)])
        ok = hi > lo
        if not np.any(ok):
            continue
        p_lo = np.arctan(lo[ok] / D)
        p_hi = np.arctan(hi[ok] / D)
        half = (p_hi - p_lo) / 2
        mid = (p_hi + p_lo) / 2
        psi = mid[:, None] + half[:, None] * nodes[None, :]
        density = _emission_density(psi, spread)
        total[ok] += half * (density @ weights)
    return total


def _emission_density(psi, spread):
    # top-hat over the emission spread
    return np.where(np.abs(psi) <= spread / 2 * (1 + 1e-12), 1.0 / spread, 0.0)


def _nodes(setup, order, q_max):
    """Birth-position nodes and weights (including the 1/w pump average)."""
    pts = _kinks(setup)
    base, base_w = np.polynomial.legendre.leggauss(order)
    xs, ws = [], []
    for a, b in zip(pts[:-1], pts[1:]):
        cycles = q_max * (b - a) / (2 * np.pi)
        n = max(order, int(math.ceil(NODES_PER_CYCLE * cycles)))
        if n != order:
            nodes, weights = np.polynomial.legendre.leggauss(n)
        else:
            nodes, weights = base, base_w
        xs.append((a + b) / 2 + (b - a) / 2 * nodes)
        ws.append((b - a) / 2 * weights)
    x = np.concatenate(xs)
    w = np.concatenate(ws) / setup.source.pump_beam_width
    return x, w * _pair_weight(setup, x, order)


def _amplitude_at_order(setup, theta, order):
    k = 2 * np.pi / setup.wavelength
    q = 2 * k * np.sin(np.asarray(theta, dtype=float))
    q_max = float(np.max(np.abs(q))) if q.size else 0.0
    x, w = _nodes(setup, order, q_max)
    keep = w != 0
    x, w = x[keep], w[keep]
    phase = np.multiply.outer(q, x) + _pump_phase(setup, x)
    return np.exp(1j * phase) @ w


def _refine(setup, theta, tol, max_order):
    theta = np.atleast_1d(np.asarray(theta, dtype=float))
    order = START_ORDER
    amp = _amplitude_at_order(setup, theta, order)
    err = math.inf
    while order < max_order:
        order *= 2
        new = _amplitude_at_order(setup, theta, order)
        scale = max(np.max(np.abs(new) ** 2), np.finfo(float).tiny)
        err = float(np.sqrt(np.mean((np.abs(new) ** 2 - np.abs(amp) ** 2) ** 2)) / scale)
        amp = new
        if err < tol:
            return amp, order, err
    raise ConvergenceError(
        f"quadrature did not converge: RMS change {err:.3g} at order {order}",
        last_estimate=amp, estimated_error=err)


def joint_amplitude(setup: OpticalSetup, theta, tol=DEFAULT_TOLERANCE, max_order=MAX_ORDER):
    """Two-photon amplitude at detection angle(s) ``theta`` (both detectors at ``theta``).

    Normalized so that ``|A|`` is at most the probability that a pair passes
    the mask.  Scalar in, scalar out.
    """
    _require_pairs(setup)
    amp, _, _ = _refine(setup, theta, tol, max_order)
    return amp[0] if np.ndim(theta) == 0 else amp


def coincidence_pattern_numeric(setup: OpticalSetup, tol=DEFAULT_TOLERANCE,
                                max_order=MAX_ORDER) -> PropagationResult:
    """Peak-normalized ``|A(theta)|^2`` on the setup's detection grid.

    The quadrature order doubles until the RMS change of the normalized
    pattern drops below ``tol``.
    """
    _require_pairs(setup)
    theta = setup.detection.theta_grid
    amp, order, err = _refine(setup, theta, tol, max_order)
    rate = np.abs(amp) ** 2
    meta = {
        "formula": "numeric",
        "quadrature_order": order,
        "estimated_error": err,
        "distance_from_crystal": setup.mask.distance_from_crystal,
        "emission_spread": setup.source.emission_spread,
    }
    return PropagationResult(Pattern.from_values(theta, rate, meta), order, err,
                             float(rate.max()))


# -- Monte Carlo ----------------------------------------------------------------

def _mc_chunk(setup, q, n, seed_seq):
    rng = np.random.default_rng(seed_seq)
    pairs = sample_biphotons(setup, n, rng)
    passed = setup.mask.transmits(pairs.signal_offset) & setup.mask.transmits(pairs.idler_offset)
    x0 = pairs.birth_position[passed]
    phi = pairs.phase[passed]
    sums = np.zeros((4, q.size))
    amp = np.zeros(q.size, dtype=complex)
    for start in range(0, q.size, MC_THETA_BLOCK):
        block = slice(start, start + MC_THETA_BLOCK)
        z = np.exp(1j * (np.multiply.outer(q[block], x0) + phi))
        amp[block] = z.sum(axis=1)
        sums[0, block] = (z.real ** 2).sum(axis=1)
        sums[1, block] = (z.imag ** 2).sum(axis=1)
        sums[2, block] = (z.real * z.imag).sum(axis=1)
    sums[3] = x0.size
    return amp, sums


def monte_carlo_pattern(setup: OpticalSetup, n_samples: int, seed: int,
                        workers: int = 1) -> Pattern:
    """Monte Carlo estimate of ``|A(theta)|^2`` with per-point standard errors.

    Values are on the same absolute scale as
    :attr:`PropagationResult.absolute_peak` (normalization
    ``"absolute-rate"``).  ``|A|^2`` uses the unbiased pair estimator
    ``(|sum z|^2 - sum |z|^2) / (n (n - 1))`` clipped at zero.  Samples are
    drawn in fixed-size chunks, each from its own substream spawned off
    ``seed``, so results are bit-identical for any ``workers``.
    """
    _require_pairs(setup)
    if n_samples < 1000:
        raise InvalidParameterError(f"n_samples must be at least 1000, got {n_samples}")
    theta = setup.detection.theta_grid
    q = 2 * (2 * np.pi / setup.wavelength) * np.sin(theta)
    sizes = [MC_CHUNK] * (n_samples // MC_CHUNK)
    if n_samples % MC_CHUNK:
        sizes.append(n_samples % MC_CHUNK)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = list(zip(sizes, streams))
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(lambda job: _mc_chunk(setup, q, *job), jobs))
    else:
        parts = [_mc_chunk(setup, q, *job) for job in jobs]

    amp = np.zeros(q.size, dtype=complex)
    sums = np.zeros((4, q.size))
    for a, s in parts:
        amp += a
        sums += s
    n = float(n_samples)
    mean = amp / n
    n_pass = sums[3]
    value = np.maximum((np.abs(amp) ** 2 - n_pass) / (n * (n - 1)), 0.0)

    # covariance of the sample mean of (Re z, Im z)
    v_rr = (sums[0] / n - mean.real ** 2) / (n - 1)
    v_ii = (sums[1] / n - mean.imag ** 2) / (n - 1)
    v_ri = (sums[2] / n - mean.real * mean.imag) / (n - 1)
    linear = 4 * (mean.real ** 2 * v_rr + mean.imag ** 2 * v_ii + 2 * mean.real * mean.imag * v_ri)
    quadratic = 2 * (v_rr ** 2 + v_ii ** 2 + 2 * v_ri ** 2)
    stderr = np.sqrt(np.maximum(linear, 0.0) + quadratic)

    meta = {
        "formula": "monte-carlo",
        "n_samples": int(n_samples),
        "seed": int(seed),
        "distance_from_crystal": setup.mask.distance_from_crystal,
        "emission_spread": setup.source.emission_spread,
    }
    return Pattern(theta, value, ABSOLUTE_RATE, meta, stderr)


# -- distance sweep --------------------------------------------------------------

SWEEP_METRICS = ("envelope_first_zero", "envelope_fwhm")


def narrowing_ratio_vs_distance(setup: OpticalSetup, d_values, tol=DEFAULT_TOLERANCE,
                                metric="envelope_first_zero"):
    """Envelope width of the numeric pair pattern over the classical one, per D.

    ``metric`` is ``"envelope_first_zero"`` or ``"envelope_fwhm"``.  The
    classical reference is the closed-form single-photon pattern of the same
    mask at the signal wavelength.  Returns ``[(D, ratio), ...]``; the ratio
    is ``nan`` where the pair pattern no longer has the requested feature.
    """
    if metric not in SWEEP_METRICS:
        raise InvalidParameterError(f"metric must be one of {SWEEP_METRICS}, got {metric!r}")
    d_values = [float(d) for d in d_values]
    if any(d < 0 for d in d_values):
        raise InvalidParameterError("distances must be nonnegative")
    if any(b <= a for a, b in zip(d_values, d_values[1:])):
        raise InvalidParameterError("distances must be strictly increasing")
    classical = getattr(pattern_metrics(closed_form_pattern(setup, n=1)), metric)
    if classical is None:
        raise InvalidParameterError(f"classical pattern has no {metric} on this grid")
    out = []
    for D in d_values:
        result = coincidence_pattern_numeric(setup.replace(distance_from_crystal=D), tol=tol)
        width = getattr(pattern_metrics(result.pattern), metric)
        out.append((D, math.nan if width is None else width / classical))
    return out
