"""Command-line entry point: ``twophoton {simulate,synth,check,fit,compare}``.

Exit codes: 0 success, 1 invalid input or failed condition, 2 numerical
failure (quadrature or fit did not converge).  Every run writes a
``<output>.manifest.json`` listing the files it produced and a digest of the
resolved configuration.  Output locations default to ``$TWOPHOTON_OUTPUT_DIR``
(or the working directory).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from pathlib import Path

from . import __version__
from .core import (PEAK_ONE, Pattern, condition_reports, setup_from_dict, setup_to_dict,
                   validate_setup)
from .errors import ConvergenceError, InvalidParameterError
from .io import ParseError, dumps_json, read_counts, write_counts, write_json, write_pattern
from .patterns import closed_form_pattern, pattern_metrics
from .propagator import coincidence_pattern_numeric, monte_carlo_pattern
from .synth import fit_pattern, quantum_classical_comparison, simulate_counts
from .units import UnitError, parse_duration

OUTPUT_ENV = "TWOPHOTON_OUTPUT_DIR"
MODES = ("classical", "biphoton", "nphoton", "numeric", "monte-carlo")

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NUMERIC = 2


class CliError(Exception):
    def __init__(self, message, code=EXIT_INPUT):
        super().__init__(message)
        self.code = code


def _load_config(path):
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise CliError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise CliError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from None
    # a run manifest can stand in for the config it was produced from
    if "resolved_config" in data:
        data = data["resolved_config"]
    return data


def _build_setup(config):
    report = validate_setup(config)
    if not report.ok:
        names = "; ".join(f"{f.name} ({f.message})" for f in report.failures())
        raise CliError(f"invalid config: {names}")
    try:
        return setup_from_dict(config)
    except (InvalidParameterError, UnitError, ValueError) as exc:
        raise CliError(f"invalid config: {exc}") from None


def _default_out(name):
    return Path(os.environ.get(OUTPUT_ENV, ".")) / name


def digest(resolved: dict) -> str:
    """SHA-256 of the canonical (sorted-key) JSON form; independent of key order."""
    canonical = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _write_manifest(command, out, resolved_config, options, artifacts, seed=None):
    resolved = {"config": resolved_config, "options": options}
    manifest = {
        "command": command,
        "config_digest": digest(resolved),
        "seed": seed,
        "artifacts": [str(p) for p in artifacts],
        "tool_version": __version__,
        "options": options,
        "resolved_config": resolved_config,
    }
    path = Path(str(out) + ".manifest.json")
    write_json(manifest, path)
    return path


def _pattern_for_mode(setup, mode, n, samples, seed):
    if mode == "classical":
        return closed_form_pattern(setup, n=1)
    if mode == "biphoton":
        return closed_form_pattern(setup, n=2)
    if mode == "nphoton":
        return closed_form_pattern(setup, n=n)
    pairs = setup.replace(photon_number=2)
    if mode == "numeric":
        return coincidence_pattern_numeric(pairs).pattern
    return monte_carlo_pattern(pairs, samples, seed)


def _resolved(setup):
    try:
        return setup_to_dict(setup)
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from None


def cmd_simulate(args):
    config = _load_config(args.config)
    setup = _build_setup(config)
    n = args.n if args.n is not None else setup.detection.photon_number
    out = Path(args.out) if args.out else _default_out(f"{args.mode}.csv")
    try:
        pattern = _pattern_for_mode(setup, args.mode, n, args.samples, args.seed)
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from None
    except ConvergenceError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    files = write_pattern(pattern, out)
    options = {"mode": args.mode, "n": n, "samples": args.samples, "seed": args.seed}
    _write_manifest("simulate", out, _resolved(setup), options, files, args.seed)
    metrics = pattern_metrics(pattern) if pattern.value.max() > 0 else None
    print(dumps_json({"output": str(out), "metrics": metrics.to_dict() if metrics else None}),
          end="")
    return EXIT_OK


def cmd_synth(args):
    config = _load_config(args.config)
    setup = _build_setup(config)
    acq = dict(config.get("acquisition", {}))
    peak = args.peak_rate if args.peak_rate is not None else float(acq.get("peak_rate", 1.0))
    background = (args.background_rate if args.background_rate is not None
                  else float(acq.get("background_rate", 0.0)))
    try:
        t = parse_duration(args.integration_time if args.integration_time is not None
                           else acq.get("integration_time", 100.0))
    except UnitError as exc:
        raise CliError(str(exc)) from None
    n = args.n if args.n is not None else setup.detection.photon_number
    out = Path(args.out) if args.out else _default_out(f"{args.mode}_counts.csv")
    try:
        pattern = _pattern_for_mode(setup, args.mode, n, args.samples, args.seed)
        if pattern.normalization != PEAK_ONE:
            # Monte Carlo estimates are absolute; counts are scaled from the peak
            pattern = Pattern.from_values(pattern.theta, pattern.value, pattern.meta)
        records = simulate_counts(pattern, peak, background, t, args.seed)
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from None
    except ConvergenceError as exc:
        raise CliError(str(exc), EXIT_NUMERIC) from None
    write_counts(records, out)
    options = {"mode": args.mode, "n": n, "samples": args.samples, "seed": args.seed,
               "peak_rate": peak, "background_rate": background, "integration_time": t}
    _write_manifest("synth", out, _resolved(setup), options, [out], args.seed)
    print(dumps_json({"output": str(out), "records": len(records)}), end="")
    return EXIT_OK


def cmd_check(args):
    config = _load_config(args.config)
    report = validate_setup(config, threshold_ratio=args.threshold)
    result = {"validation": report.to_dict(), "conditions": [], "passed": False}
    if report.ok:
        setup = setup_from_dict(config)
        conditions = condition_reports(setup.source, setup.mask, args.threshold)
        result["conditions"] = [c.to_dict() for c in conditions]
        result["passed"] = all(c.passed for c in conditions)
    text = dumps_json(result)
    print(text, end="")
    if args.out:
        out = Path(args.out)
        out.write_text(text, encoding="utf-8")
        resolved = setup_to_dict(setup_from_dict(config)) if report.ok else config
        _write_manifest("check", out, resolved, {"threshold": args.threshold}, [out])
    return EXIT_OK if result["passed"] else EXIT_INPUT


def _fixed(spec):
    return {s.strip() for s in spec.split(",") if s.strip()}


def _read(path):
    try:
        return read_counts(path)
    except ParseError as exc:
        raise CliError(str(exc)) from None
    except OSError as exc:
        raise CliError(f"cannot read {path}: {exc.strerror}") from None


def cmd_fit(args):
    config = _load_config(args.config)
    setup = _build_setup(config)
    data = _read(args.data)
    fixed = _fixed(args.fix)
    try:
        fit = fit_pattern(data, setup.mask, fixed, lambda_eff=setup.wavelength)
    except InvalidParameterError as exc:
        raise CliError(str(exc)) from None
    out = Path(args.out) if args.out else _default_out("fit.json")
    write_json(fit.to_dict(), out)
    _write_manifest("fit", out, _resolved(setup), {"data": str(args.data), "fix": sorted(fixed)},
                    [out])
    print(dumps_json(fit.to_dict()), end="")
    return EXIT_OK if fit.converged else EXIT_NUMERIC


def cmd_compare(args):
    config = _load_config(args.config)
    setup = _build_setup(config)
    quantum = _read(args.quantum)
    classical = _read(args.classical)
    try:
        report = quantum_classical_comparison(quantum, classical, setup.mask)
    except InvalidParameterError as exc:
        code = EXIT_NUMERIC if "converge" in str(exc) else EXIT_INPUT
        raise CliError(str(exc), code) from None
    out = Path(args.out) if args.out else _default_out("compare.json")
    write_json(report.to_dict(), out)
    _write_manifest("compare", out, _resolved(setup),
                    {"quantum": str(args.quantum), "classical": str(args.classical)}, [out])
    print(dumps_json(report.to_dict()), end="")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="twophoton", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, with_mode=True):
        p.add_argument("--config", required=True, help="JSON setup description")
        p.add_argument("--out", help="output path")
        if with_mode:
            p.add_argument("--mode", choices=MODES, default="biphoton")
            p.add_argument("--n", type=int, help="photon number for --mode nphoton")
            p.add_argument("--seed", type=int, default=0)
            p.add_argument("--samples", type=int, default=100_000,
                           help="Monte Carlo sample count")

    p = sub.add_parser("simulate", help="write a pattern CSV")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("synth", help="write synthetic coincidence counts")
    common(p)
    p.add_argument("--peak-rate", type=float, help="counts/s at the pattern peak")
    p.add_argument("--background-rate", type=float, help="flat counts/s")
    p.add_argument("--integration-time", help="per-point duration, e.g. 100s")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("check", help="validate a setup and its two-photon conditions")
    common(p, with_mode=False)
    p.add_argument("--threshold", type=float, default=10.0,
                   help="minimum ratio treated as 'much less than'")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("fit", help="fit the effective wavelength of count data")
    p.add_argument("data", help="CSV with theta_rad,counts,integration_time_s")
    common(p, with_mode=False)
    p.add_argument("--fix", default="a,b", help="comma-separated parameters to hold fixed")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("compare", help="compare quantum and classical datasets")
    p.add_argument("quantum")
    p.add_argument("classical")
    common(p, with_mode=False)
    p.set_defaults(func=cmd_compare)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CliError as exc:
        print(f"twophoton {args.command}: {exc}", file=sys.stderr)
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
