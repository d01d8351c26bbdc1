"""Acceptance suite: one test per criterion, each at its stated tolerance.

Every criterion records a PASS/FAIL line that is printed in the pytest
terminal summary (section "acceptance criteria").
"""

import json
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest

from twophoton import cli
from twophoton.core import Pattern, default_theta_grid, reference_setup
from twophoton.patterns import (
    biphoton_double_slit,
    classical_double_slit,
    closed_form_pattern,
    nphoton_double_slit,
    pattern_metrics,
)
from twophoton.propagator import (
    coincidence_pattern_numeric,
    monte_carlo_pattern,
    narrowing_ratio_vs_distance,
)
from twophoton.synth import fit_pattern, simulate_counts

from conftest import A, ACCEPTANCE_RESULTS, B, LAM

CONFIG = Path(__file__).resolve().parents[1] / "configs" / "reference.json"
MC_SEED = 20240601


@contextmanager
def criterion(number, title):
    detail = {}
    try:
        yield detail
    except BaseException as exc:
        ACCEPTANCE_RESULTS[number] = ("FAIL", title, f"{type(exc).__name__}: {exc}".splitlines()[0])
        raise
    ACCEPTANCE_RESULTS[number] = ("PASS", title, ", ".join(f"{k}={v}" for k, v in detail.items()))


def metrics_of(f, **kw):
    theta = default_theta_grid()
    return pattern_metrics(Pattern.from_values(theta, f(theta, a=A, b=B, lam=LAM, **kw)))


def rel(x, ref):
    return abs(x - ref) / ref


def test_01_quantum_fringe_period():
    with criterion(1, "quantum fringe period vs 0.001 rad (15%)") as d:
        start = time.perf_counter()
        period = metrics_of(biphoton_double_slit).fringe_period
        elapsed = time.perf_counter() - start
        d.update(period_mrad=f"{period * 1e3:.4f}", rel_dev=f"{rel(period, 1e-3):.3f}",
                 seconds=f"{elapsed:.3f}")
        assert period == pytest.approx(1.145e-3, rel=1e-3)
        assert rel(period, 1e-3) <= 0.15
        assert elapsed < 1.0


def test_02_quantum_envelope_zero():
    with criterion(2, "quantum envelope zero vs 0.003 rad (20%)") as d:
        start = time.perf_counter()
        zero = metrics_of(biphoton_double_slit).envelope_first_zero
        elapsed = time.perf_counter() - start
        d.update(zero_mrad=f"{zero * 1e3:.4f}", rel_dev=f"{rel(zero, 3e-3):.3f}",
                 seconds=f"{elapsed:.3f}")
        assert zero == pytest.approx(3.523e-3, rel=1e-3)
        assert rel(zero, 3e-3) <= 0.20
        assert elapsed < 1.0


def test_03_classical_counterparts():
    with criterion(3, "classical period vs 0.002 rad (15%), zero vs 0.006 rad (20%)") as d:
        start = time.perf_counter()
        m = metrics_of(classical_double_slit)
        elapsed = time.perf_counter() - start
        d.update(period_mrad=f"{m.fringe_period * 1e3:.4f}",
                 zero_mrad=f"{m.envelope_first_zero * 1e3:.4f}", seconds=f"{elapsed:.3f}")
        assert m.fringe_period == pytest.approx(2.290e-3, rel=1e-3)
        assert m.envelope_first_zero == pytest.approx(7.046e-3, rel=1e-3)
        assert rel(m.fringe_period, 2e-3) <= 0.15
        assert rel(m.envelope_first_zero, 6e-3) <= 0.20
        assert elapsed < 1.0


def test_04_effective_wavelength():
    with criterion(4, "fitted lambda_eff = 458 nm (noiseless 1e-6, Poisson 2% x 100 seeds)") as d:
        setup = reference_setup()
        quantum = closed_form_pattern(setup, n=2)
        # 1e9 counts at the peak: integer rounding stays far below 1e-6
        exact = simulate_counts(quantum, 1e7, 0.0, 100.0, 0, noiseless=True)
        fit = fit_pattern(exact, setup.mask)
        noiseless_err = rel(fit.lambda_eff, 458e-9)
        # 1 count/s for 100 s: 100 counts in the peak bin
        errors = []
        for seed in range(100):
            noisy = fit_pattern(simulate_counts(quantum, 1.0, 0.0, 100.0, seed), setup.mask)
            assert noisy.converged
            errors.append(rel(noisy.lambda_eff, 458e-9))
        d.update(noiseless_rel=f"{noiseless_err:.2e}", worst_poisson_rel=f"{max(errors):.4f}")
        assert fit.converged
        assert noiseless_err <= 1e-6
        assert max(errors) <= 0.02


def test_05_factor_n_identity():
    with criterion(5, "N-photon pattern = classical at lambda/N (1e-12)") as d:
        theta = default_theta_grid()
        worst = 0.0
        for n in (1, 2, 3, 4):
            diff = nphoton_double_slit(theta, n, A, B, LAM) - classical_double_slit(theta, A, B, LAM / n)
            worst = max(worst, float(np.max(np.abs(diff))))
        d.update(max_abs_diff=f"{worst:.1e}")
        assert worst <= 1e-12


def test_06_oracle_equivalence():
    with criterion(6, "numeric at D=0 RMS < 1e-3; Monte Carlo 1e6 within 3 SE") as d:
        start = time.perf_counter()
        at_crystal = reference_setup(distance_from_crystal=0.0)
        numeric = coincidence_pattern_numeric(at_crystal).pattern.value
        closed = closed_form_pattern(at_crystal).value
        rms = float(np.sqrt(np.mean((numeric - closed) ** 2)))

        setup = reference_setup(theta_grid=default_theta_grid(n_points=201))
        quad = coincidence_pattern_numeric(setup)
        mc = monte_carlo_pattern(setup, 1_000_000, MC_SEED)
        z = (mc.value - quad.pattern.value * quad.absolute_peak) / mc.stderr
        elapsed = time.perf_counter() - start
        d.update(rms=f"{rms:.1e}", max_abs_z=f"{np.max(np.abs(z)):.2f}", seconds=f"{elapsed:.1f}")
        assert rms < 1e-3
        assert np.max(np.abs(z)) <= 3
        assert elapsed < 60


def test_07_crossover():
    with criterion(7, "narrowing ratio starts at 0.50 +/- 0.01 and is nondecreasing") as d:
        setup = reference_setup()
        distances = [0.0, 0.0025, 0.005, 0.01, 0.015, 0.02, 0.03, 0.04, 0.05]
        sweep = narrowing_ratio_vs_distance(setup, distances)
        ratios = [r for _, r in sweep]
        fwhm = narrowing_ratio_vs_distance(setup, [0.0, 0.05, 0.1], metric="envelope_fwhm")
        d.update(start=f"{ratios[0]:.4f}", zero_ratio_at_5cm=f"{ratios[-1]:.3f}",
                 fwhm_ratio_at_10cm=f"{fwhm[-1][1]:.3f}")
        assert ratios[0] == pytest.approx(0.5, abs=0.01)
        assert all(np.isfinite(ratios))
        assert all(r2 >= r1 for r1, r2 in zip(ratios, ratios[1:]))


def test_08_null_control():
    with criterion(8, "zero rates give all-zero counts") as d:
        records = simulate_counts(closed_form_pattern(reference_setup()), 0.0, 0.0, 100.0, seed=1)
        total = sum(r.counts for r in records)
        d.update(points=len(records), total_counts=total)
        assert total == 0


def test_09_condition_suite(tmp_path, capsys):
    with criterion(9, "check exits 0 at the operating point, 1 at ratio-1 perturbations") as d:
        base = json.loads(CONFIG.read_text())
        assert cli.main(["check", "--config", str(CONFIG)]) == 0
        report = json.loads(capsys.readouterr().out)
        same, diff, erase = report["conditions"]
        assert same["ratio"] >= 30 and diff["ratio"] >= 10 and erase["passed"]

        perturbations = {
            "same-slit": ("mask", "distance_from_crystal", B / 2.4e-3),
            "diffraction": ("mask", "distance_from_crystal", A / 2.4e-3),
            "erasure": ("source", "divergence", LAM / B),
        }
        codes = {}
        for name, (part, key, value) in perturbations.items():
            config = json.loads(json.dumps(base))
            config[part][key] = value
            path = tmp_path / f"{name}.json"
            path.write_text(json.dumps(config))
            codes[name] = cli.main(["check", "--config", str(path)])
            failed = [c["condition_id"] for c in json.loads(capsys.readouterr().out)["conditions"]
                      if not c["passed"]]
            assert name in failed
        d.update(reference_ratios=f"{same['ratio']:.1f}/{diff['ratio']:.1f}", perturbed_exits=codes)
        assert all(code == 1 for code in codes.values())


def test_10_determinism(tmp_path):
    with criterion(10, "same config and seed give byte-identical outputs") as d:
        config = ["--config", str(CONFIG)]
        for run_dir in ("first", "second"):
            out = tmp_path / run_dir
            out.mkdir()
            commands = [
                ["simulate", "--mode", "monte-carlo", "--samples", "20000", "--seed", "11",
                 "--out", out / "mc.csv"],
                ["synth", "--mode", "biphoton", "--seed", "11", "--out", out / "q.csv"],
                ["synth", "--mode", "classical", "--seed", "12", "--out", out / "c.csv"],
                ["fit", out / "q.csv", "--out", out / "fit.json"],
                ["compare", out / "q.csv", out / "c.csv", "--out", out / "cmp.json"],
            ]
            for argv in commands:
                assert cli.main([str(a) for a in argv] + config) == 0
        # manifests record their own absolute paths, so only data files are compared
        names = sorted(p.name for p in (tmp_path / "first").iterdir()
                       if not p.name.endswith(".manifest.json"))
        identical = [(tmp_path / "first" / n).read_bytes() == (tmp_path / "second" / n).read_bytes()
                     for n in names]
        d.update(files_compared=len(identical))
        assert len(identical) == 6 and all(identical)
