"""Command-line entry point: ``spdchom {visibility,fit,toa,rates,tables}``.

Exit codes: 0 success, 1 numerical/model failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from dataclasses import replace

from . import counting, fit, tables, toa
from .config import ConfigError, RunConfig, parse_float_list, read_config
from .hom import REFERENCE_SETUP, VisibilityCurveError, visibility_curve
from .source import TruncationConfig

EXIT_OK, EXIT_NUMERIC, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _emit(text: str, path: str | None) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _fail(command: str, message: str) -> int:
    print(f"spdchom {command}: numeric failure: {message}", file=sys.stderr)
    return EXIT_NUMERIC


def _rows_csv(header, rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load(args) -> RunConfig:
    values = read_config(args.config) if args.config else {}
    cfg = RunConfig.from_mapping(values)
    if getattr(args, "output", None):
        cfg.output_path = args.output
    if getattr(args, "format", None):
        cfg.format = args.format
    trunc = cfg.truncation
    if getattr(args, "tail_tolerance", None) is not None:
        trunc = replace(trunc, tail_tolerance=args.tail_tolerance)
    if getattr(args, "n_max", None) is not None:
        trunc = replace(trunc, n_max=args.n_max)
    try:
        cfg.truncation = TruncationConfig(trunc.n_max, trunc.tail_tolerance, trunc.hard_cap)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return cfg


def cmd_visibility(args) -> int:
    cfg = _load(args)
    setup = cfg.setup
    if args.eta_m is not None:
        try:
            setup = setup.with_eta_m(args.eta_m)
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
    grid = args.p if args.p else (cfg.p_grid or list(tables.NVSV_P_GRID))
    bad = [p for p in grid if not p >= 0]
    if bad:
        raise ConfigError(f"p must be >= 0, got {bad[0]}")
    try:
        points = visibility_curve(
            grid, setup, cfg.truncation.tail_tolerance, n_max=cfg.truncation.n_max, workers=args.workers
        )
    except VisibilityCurveError as exc:
        return _fail("visibility", str(exc))
    if cfg.format == "json":
        text = json.dumps(
            [{"p": pt.p, "visibility": pt.clamped, "limit": pt.limit} for pt in points], indent=2
        ) + "\n"
    else:
        text = _rows_csv(["p", "visibility"], [[repr(pt.p), repr(pt.clamped)] for pt in points])
    _emit(text, cfg.output_path)
    return EXIT_OK


def cmd_fit(args) -> int:
    cfg = _load(args)
    try:
        points = fit.read_points_csv(args.data)
    except (OSError, ValueError, KeyError) as exc:
        raise ConfigError(f"cannot read {args.data}: {exc}") from exc
    bounds = tuple(args.bounds) if args.bounds else (
        float(cfg.extra.get("eta_m_lo", 0.90)),
        float(cfg.extra.get("eta_m_hi", 1.00)),
    )
    try:
        problem = fit.FitProblem(
            data=points,
            fixed_setup=cfg.setup,
            eta_m_bounds=bounds,
            weighting=args.weighting or cfg.extra.get("weighting", "uniform"),
            fit_p_scale=args.p_scale,
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    try:
        result = fit.fit_eta_m(problem, cfg.truncation.tail_tolerance)
    except (fit.FitError, ValueError) as exc:
        return _fail("fit", str(exc))
    _emit(result.to_json(), cfg.output_path)
    return EXIT_OK


_TOA_KEYS = {
    "rep_rate": float, "p": float, "eta_start": float, "eta_stop": float,
    "jitter_sigma": float, "system_resolution": float, "dark_rate": float,
    "bin_width": float, "duration": float, "seed": int, "window_periods": float,
}


def cmd_toa(args) -> int:
    values = read_config(args.config) if args.config else {}
    kw = {}
    try:
        for key, conv in _TOA_KEYS.items():
            if key in values:
                kw[key] = conv(values[key].split(",")[0])
            flag = getattr(args, key, None)
            if flag is not None:
                kw[key] = conv(flag)
        # unset fields fall back to the calibrated 30 mW operating point
        config = toa.calibrated_config(**kw)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    resolved = not args.unresolved
    hist = toa.simulate_histogram(config, workers=args.workers)
    output = args.output or values.get("output")
    if output:
        hist.to_csv(output)
    try:
        snr = toa.extract_snr(hist, config.rep_rate, resolved=resolved)
    except toa.PeakExtractionError as exc:
        return _fail("toa", f"SNR extraction: {exc}")
    peaks = toa.extract_peaks(hist, config.rep_rate, resolved=resolved)
    print(
        f"snr_db={snr:.3f} main={peaks.main:.0f} side={peaks.side:.1f} "
        f"total={int(hist.counts.sum())} resolved={str(resolved).lower()}"
    )
    return EXIT_OK


def cmd_rates(args) -> int:
    if args.p is None and args.cc is None:
        raise UsageError("rates needs --p or --cc")
    try:
        out = {}
        if args.p is not None:
            params = counting.RateParams(f=args.rep_rate, p=args.p, eta=args.eta, n_fold=args.n_fold)
            out["coincidence_rate_cps"] = counting.coincidence_rate(params)
            if args.p > 0:
                out["snr_model_db"] = counting.snr_model(args.p, args.floor_db)
        if args.cc is not None:
            out["estimated_p"] = counting.estimate_p(args.cc, args.rep_rate, args.eta)
        if args.main is not None and args.side is not None:
            out["snr_db"] = counting.snr_db(counting.PeakCounts(args.main, args.side))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    if args.format == "json":
        text = json.dumps(out, indent=2, sort_keys=True) + "\n"
    else:
        text = _rows_csv(["quantity", "value"], [[k, repr(v)] for k, v in out.items()])
    _emit(text, args.output)
    return EXIT_OK


def cmd_tables(args) -> int:
    for path in tables.write_tables(args.output, workers=args.workers):
        print(path)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="spdchom", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, fmt=True):
        p.add_argument("--config", metavar="PATH")
        p.add_argument("--output", metavar="PATH")
        if fmt:
            p.add_argument("--format", choices=("csv", "json"))
        p.add_argument("--tail-tolerance", type=float, metavar="REAL")

    p = sub.add_parser("visibility", help="HOM visibility versus p")
    common(p)
    p.add_argument("--p", type=float, nargs="+", metavar="P")
    p.add_argument("--eta-m", type=float)
    p.add_argument("--n-max", type=int, help="fixed pair-number cutoff")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_visibility)

    p = sub.add_parser("fit", help="fit eta_m to p,v[,sigma_v] data")
    p.add_argument("data", metavar="DATA_CSV")
    common(p, fmt=False)
    p.add_argument("--bounds", type=float, nargs=2, metavar=("LO", "HI"))
    p.add_argument("--weighting", choices=("uniform", "inverse-variance"))
    p.add_argument("--p-scale", action="store_true", help="also fit a global p multiplier")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("toa", help="simulate a ToA histogram and extract the SNR")
    p.add_argument("--config", metavar="PATH")
    p.add_argument("--output", metavar="PATH", help="histogram CSV (JSON sidecar next to it)")
    p.add_argument("--seed", type=int)
    for key in ("rep_rate", "p", "eta_start", "eta_stop", "dark_rate", "duration", "bin_width",
                "jitter_sigma", "system_resolution"):
        p.add_argument("--" + key.replace("_", "-"), dest=key, type=float)
    p.add_argument("--unresolved", action="store_true", help="side peaks merged into the main peak")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_toa)

    p = sub.add_parser("rates", help="coincidence rate, p estimate, SNR model")
    p.add_argument("--rep-rate", type=float, required=True)
    p.add_argument("--eta", type=float, required=True)
    p.add_argument("--p", type=float)
    p.add_argument("--n-fold", type=int, default=1)
    p.add_argument("--cc", type=float, help="measured coincidence rate to invert")
    p.add_argument("--floor-db", type=float)
    p.add_argument("--main", type=float, help="main peak counts")
    p.add_argument("--side", type=float, help="side peak counts")
    p.add_argument("--output", metavar="PATH")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.set_defaults(func=cmd_rates)

    p = sub.add_parser("tables", help="regenerate the reference tables")
    p.add_argument("--output", metavar="DIR", default="tables")
    p.add_argument("--workers", type=int)
    p.set_defaults(func=cmd_tables)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, UsageError) as exc:
        print(f"spdchom {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (ValueError, ArithmeticError, RuntimeError) as exc:
        return _fail(args.command, str(exc))


if __name__ == "__main__":
    sys.exit(main())
