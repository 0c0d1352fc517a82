"""Command line front end.

    monodist fit --input data.csv --output fit.json
    monodist quantile --input fit.json --beta 0.25 --beta 0.75 --format csv
    monodist simulate --scenario smoke --n-grid 64,128 --reps 2
    monodist verify --suite isoreg

Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
from dataclasses import replace

import numpy as np

from .cdf_fit import fit_cdf_family, fit_from_json, fit_to_json
from .order_core import DesignGroups
from .quantile_fit import band_to_json, plugin_quantiles, quantile_band, smooth_band_curve
from .sim import harness
from .verify import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class InputError(Exception):
    """Bad user input; reported with exit code 2."""


def read_xy_csv(text: str) -> DesignGroups:
    """Parse CSV text with header ``x,y`` into design groups."""
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None:
        raise InputError("empty file")
    if [h.strip().lower() for h in header] != ["x", "y"]:
        raise InputError("line 1: expected header 'x,y'")
    xs, ys = [], []
    for row in rows:
        line = rows.line_num
        if not row or all(not f.strip() for f in row):
            continue
        if len(row) != 2:
            raise InputError(f"line {line}: expected 2 fields, got {len(row)}")
        try:
            x, y = float(row[0]), float(row[1])
        except ValueError:
            raise InputError(f"line {line}: non-numeric field in {','.join(row)!r}") from None
        if not (math.isfinite(x) and math.isfinite(y)):
            raise InputError(f"line {line}: values must be finite")
        xs.append(x)
        ys.append(y)
    if not xs:
        raise InputError("no data rows")
    return DesignGroups.from_arrays(np.array(xs), np.array(ys))


def _read(path: str) -> str:
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path) as fh:
            return fh.read()
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None


def _write(path: str | None, text: str) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        raise InputError(f"cannot write {path}: {exc.strerror}") from None


def _load_fit(path: str, interp: str):
    text = _read(path)
    if text.lstrip().startswith("{"):
        try:
            return fit_from_json(text)
        except (ValueError, KeyError, TypeError) as exc:
            raise InputError(f"invalid fit JSON: {exc}") from None
    return fit_cdf_family(read_xy_csv(text), interp)


def _interp(name: str) -> str:
    return name.replace("-", "_")


def cmd_fit(args) -> int:
    fit = fit_cdf_family(read_xy_csv(_read(args.input)), _interp(args.interp))
    vals = fit.values
    violation = max(
        float(np.max(np.diff(vals, axis=0), initial=0.0)),
        float(np.max(-np.diff(vals, axis=1), initial=0.0)),
    )
    _write(args.output, fit_to_json(fit) + "\n")
    print(
        f"n={fit.groups.n} m={fit.m} thresholds={fit.ell} max_monotonicity_violation={violation}",
        file=sys.stderr,
    )
    return EXIT_OK


def quantile_outputs(fit, betas):
    """Bands and smooth curves per level; the band must equal the plug-in quantiles."""
    out = []
    for beta in betas:
        band = quantile_band(fit.groups, beta)
        plug = plugin_quantiles(fit, beta)
        if not (np.array_equal(band.lower, plug.lower) and np.array_equal(band.upper, plug.upper)):
            raise RuntimeError(f"plug-in quantiles differ from the regression band at beta={beta}")
        out.append((band, smooth_band_curve(band)))
    return out


def cmd_quantile(args) -> int:
    betas = args.beta or [0.5]
    for b in betas:
        if not 0 < b < 1:
            raise InputError(f"beta must lie in (0, 1), got {b}")
    fit = _load_fit(args.input, _interp(args.interp))
    try:
        results = quantile_outputs(fit, betas)
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    if args.format == "json":
        text = json.dumps([band_to_json(b, s) for b, s in results], indent=1) + "\n"
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["beta", "x", "lower", "upper", "smooth"])
        for band, smooth in results:
            for row in zip(band.xs, band.lower, band.upper, smooth.knots):
                w.writerow([repr(band.beta)] + [repr(float(v)) for v in row])
        text = buf.getvalue()
    _write(args.output, text)
    return EXIT_OK


def _parse_grid(text: str) -> list[int]:
    try:
        grid = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"--n-grid must be a comma list of integers, got {text!r}") from None
    if not grid or min(grid) < 2:
        raise InputError("--n-grid values must be at least 2")
    return grid


def cmd_simulate(args) -> int:
    if args.scenario not in harness.SCENARIOS:
        raise InputError(f"unknown scenario {args.scenario!r}; choose from {sorted(harness.SCENARIOS)}")
    config = harness.SCENARIOS[args.scenario]
    changes = {"seed": args.seed}
    if args.reps is not None:
        changes["reps"] = args.reps
    if args.interp is not None:
        changes["interpolation"] = _interp(args.interp)
    config = replace(config, **changes)
    grid = _parse_grid(args.n_grid)
    try:
        results = harness.run_study(config, grid)
    except ValueError as exc:
        raise InputError(str(exc)) from None
    _write(args.output, harness.trials_to_csv(results))
    if len(set(grid)) >= 4:
        summary = harness.summary_to_json(harness.standard_rate_summaries(config, results))
    else:
        note = {"n_values": sorted(set(grid)), "slope": None, "note": "rate fits need 4 or more n"}
        summary = json.dumps(note)
    if args.summary:
        _write(args.summary, summary + "\n")
    else:
        print(summary, file=sys.stderr)
    return EXIT_OK


def cmd_verify(args) -> int:
    report = run_suite(args.suite, args.seed, args.reps)
    _write(args.output, report.to_json() + "\n")
    return EXIT_OK if report.passed else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="monodist",
        description="Stochastically ordered CDF and quantile estimation.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    interp_choices = ["linear", "step-left", "step-right"]

    f = sub.add_parser("fit", help="fit the CDF family from x,y CSV data")
    f.add_argument("--input", required=True, help="CSV with header x,y ('-' for stdin)")
    f.add_argument("--output", help="fit JSON (default stdout)")
    f.add_argument("--interp", choices=interp_choices, default="linear")
    f.set_defaults(func=cmd_fit)

    q = sub.add_parser("quantile", help="quantile bands and smooth curves")
    q.add_argument("--input", required=True, help="fit JSON or x,y CSV")
    q.add_argument("--beta", type=float, action="append", help="level in (0, 1); repeatable")
    q.add_argument("--format", choices=["csv", "json"], default="csv")
    q.add_argument("--output")
    q.add_argument("--interp", choices=interp_choices, default="linear")
    q.set_defaults(func=cmd_quantile)

    s = sub.add_parser("simulate", help="rate study over a grid of sample sizes")
    s.add_argument("--scenario", default="gaussian_shift", help=f"one of {sorted(harness.SCENARIOS)}")
    s.add_argument("--n-grid", default="256,512,1024,2048")
    s.add_argument("--reps", type=int)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--interp", choices=interp_choices)
    s.add_argument("--output", help="per-trial CSV (default stdout)")
    s.add_argument("--summary", help="rate summary JSON (default stderr)")
    s.set_defaults(func=cmd_simulate)

    v = sub.add_parser("verify", help="run a randomized property suite")
    v.add_argument("--suite", required=True, choices=sorted(SUITES))
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--reps", type=int)
    v.add_argument("--output", help="JSON report (default stdout)")
    v.set_defaults(func=cmd_verify)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
