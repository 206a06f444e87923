"""Command-line front end: ``minmaxtrend <command> [options]``.

Exit codes: 0 on success, 1 when a computation warning was raised under
``--strict``, 2 for usage and input errors. Outputs carry no run timestamps,
so repeated runs write byte-identical files.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import sys
import tempfile
import warnings
from dataclasses import fields
from pathlib import Path

import numpy as np

from .calibration import calibrate, default_grid, write_curve_csv
from .indicators import atr
from .market_data import DataError, load_csv, write_csv
from .sar_minmax import SarConfig, minmax_extrema, sar_process, write_extrema_csv
from .stats import (
    build_report,
    dynamic_histogram,
    reversed_cdf,
    situation_metrics,
    write_histogram_csv,
    write_reversed_cdf_csv,
)
from .synth import SynthSpec, generate, staircase_fixture
from .trend_engine import CENSORED, run_trend_indicator, write_situations_csv, write_trends_csv
from .wavelength import correlogram, dominant_wavelength, write_correlogram_csv

__all__ = ["main", "build_parser"]


class UsageError(Exception):
    pass


def _table(writer, obj, out_dir: Path, name: str, fmt: str, *extra) -> Path:
    """Write ``obj`` through a CSV writer, or re-encode the rows as JSON records."""
    if fmt == "csv":
        path = out_dir / f"{name}.csv"
        writer(obj, *extra, path)
        return path
    with tempfile.TemporaryDirectory() as tmp:
        tmp_path = Path(tmp) / "t.csv"
        writer(obj, *extra, tmp_path)
        text = tmp_path.read_text(encoding="utf-8")
    rows = [{k: _cell(v) for k, v in row.items()} for row in csv.DictReader(io.StringIO(text))]
    path = out_dir / f"{name}.json"
    path.write_text(json.dumps(rows, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _cell(text: str):
    if text == "":
        return None
    for conv in (int, float):
        try:
            v = conv(text)
        except ValueError:
            continue
        return v if conv is int or math.isfinite(v) else text
    return text


def _load(args):
    if not args.input:
        raise UsageError("--input is required")
    path = Path(args.input)
    if not path.is_file():
        raise UsageError(f"input file not found: {path}")
    return load_csv(path, symbol=args.symbol or "", aggregation=args.aggregation or "")


def _grid(args):
    return default_grid(args.t_start, args.t_stop, args.t_step)


def _timescale(args, series, summary: dict):
    if args.timescale is not None:
        return float(args.timescale)
    res = calibrate(series, args.n_min, args.n_max, _grid(args), args.delta_factor, args.atr_period, args.jobs)
    summary.update(n_star=res.n_star, phi_star=res.phi_star)
    return res.timescale


def _write_json(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, sort_keys=True, allow_nan=False) + "\n", encoding="utf-8")


def cmd_wavelength(args, out: Path) -> None:
    series = _load(args)
    cg = correlogram(series, args.n_min, args.n_max)
    n_star, phi = dominant_wavelength(cg)
    _table(write_correlogram_csv, cg, out, "correlogram", args.format)
    start, end = series.period()
    _write_json(out / "wavelength.json", {"n_star": n_star, "phi_star": phi, "symbol": series.symbol,
                                          "aggregation": series.aggregation, "start": start, "end": end})
    print(f"n*={n_star}, phi={phi:.4f}")


def cmd_calibrate(args, out: Path) -> None:
    series = _load(args)
    res = calibrate(series, args.n_min, args.n_max, _grid(args), args.delta_factor, args.atr_period, args.jobs)
    _table(write_correlogram_csv, res.correlogram, out, "correlogram", args.format)
    _table(write_curve_csv, res.curve, out, "curve", args.format)
    start, end = series.period()
    _write_json(out / "calibration.json", {
        "n_star": res.n_star, "phi_star": res.phi_star, "timescale": res.timescale,
        "symbol": series.symbol, "aggregation": series.aggregation, "start": start, "end": end})
    print(f"n*={res.n_star}, phi={res.phi_star:.4f}, t*={res.timescale:.1f}")


def _extrema(args, series, summary):
    t = _timescale(args, series, summary)
    values = atr(series, args.atr_period).values
    sar = sar_process(series, SarConfig(t, args.delta_factor, args.atr_period), atr_values=values)
    return t, values, minmax_extrema(series, sar)


def cmd_extrema(args, out: Path) -> None:
    series = _load(args)
    t, _, ext = _extrema(args, series, {})
    _table(write_extrema_csv, ext, out, "extrema", args.format)
    print(f"t={t:.1f}, extrema={len(ext)}")


def _trends(args, series, summary):
    t, values, ext = _extrema(args, series, summary)
    trends, records = run_trend_indicator(ext, series)
    return t, values, ext, trends, records


def _write_trend_tables(args, out, trends, records):
    _table(write_trends_csv, trends, out, "trends", args.format)
    for kind in ("s123", "s323", "s232"):
        _table(lambda r, p, k=kind: write_situations_csv(r, k, p), records, out, f"situations_{kind}", args.format)


def cmd_trends(args, out: Path) -> None:
    series = _load(args)
    t, _, _, trends, records = _trends(args, series, {})
    _write_trend_tables(args, out, trends, records)
    print(f"t={t:.1f}, trends={len(trends)}, situations={len(records)}")


def _axis(start: float, stop: float, step: float) -> np.ndarray:
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 10)


def cmd_stats(args, out: Path) -> None:
    series = _load(args)
    meta = {}
    t, values, _, trends, records = _trends(args, series, meta)
    meta["timescale"] = t
    report = build_report(series, trends, records, values, meta)
    _write_trend_tables(args, out, trends, records)
    (out / "report.json").write_text(report.to_json(), encoding="utf-8")
    (out / "report.txt").write_text(report.to_text(), encoding="utf-8")
    metrics = [m for r, m in zip(records, situation_metrics(records, values))
               if r.kind == "s232" and r.outcome != CENSORED and not m.degenerate]
    if metrics:
        hist = dynamic_histogram([m.dynamic for m in metrics], args.bin_width, args.cap)
        _table(write_histogram_csv, hist, out, "dynamic_histogram", args.format)
        x = _axis(0.0, args.cap, args.grid_step)
        y = _axis(1.0, args.cap, args.grid_step)
        samples = [(m.rel_dur_dynamic, m.dynamic) for m in metrics]
        _table(write_reversed_cdf_csv, reversed_cdf(samples, x, y), out, "reversed_cdf", args.format, x, y)
    else:
        warnings.warn("no confirmed 2-3-2 situation; histogram and reversed CDF skipped", RuntimeWarning)
    sys.stdout.write(report.to_text())


def cmd_synth(args, out: Path) -> None:
    spec = SynthSpec(kind=args.kind, length=args.length, seed=args.seed, period=args.period,
                     amplitude=args.amplitude, center=args.center, drift=args.drift,
                     noise_sigma=args.noise_sigma, walk_sigma=args.walk_sigma,
                     half_range=args.half_range, decimals=args.decimals, n_pivots=args.n_pivots)
    name = args.name or f"synth_{spec.kind}_{spec.seed}"
    if spec.kind == "trend_staircase":
        series, events = staircase_fixture(spec)
        write_extrema_csv(events, out / f"{name}_extrema.csv")
    else:
        series = generate(spec)
    write_csv(series, out / f"{name}.csv")
    print(f"wrote {len(series)} candles to {out / (name + '.csv')}")


_COMMANDS = {
    "wavelength": cmd_wavelength,
    "calibrate": cmd_calibrate,
    "extrema": cmd_extrema,
    "trends": cmd_trends,
    "stats": cmd_stats,
    "synth": cmd_synth,
}


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--input", help="candle CSV (timestamp, open, high, low, close)")
    p.add_argument("--out-dir", default=".", help="output directory (created if missing)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="format of tabular outputs")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--config", help="key=value file supplying defaults for any option")
    p.add_argument("--strict", action="store_true", help="exit 1 when a computation warning is raised")
    p.add_argument("--symbol", default="")
    p.add_argument("--aggregation", default="")
    p.add_argument("--n-min", type=int, default=2)
    p.add_argument("--n-max", type=int, default=300)
    p.add_argument("--t-start", type=float, default=0.4)
    p.add_argument("--t-stop", type=float, default=6.0)
    p.add_argument("--t-step", type=float, default=0.1)
    p.add_argument("--delta-factor", type=float, default=0.3)
    p.add_argument("--atr-period", type=int, default=100)
    p.add_argument("--timescale", type=float, default=None, help="skip calibration and use this timescale")
    p.add_argument("--bin-width", type=float, default=0.25)
    p.add_argument("--cap", type=float, default=4.0)
    p.add_argument("--grid-step", type=float, default=0.1, help="reversed CDF grid spacing")
    p.add_argument("--jobs", type=int, default=1, help="threads for the timescale sweep")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="minmaxtrend", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        _common(p)
        if name == "synth":
            defaults = {f.name: f.default for f in fields(SynthSpec)}
            p.add_argument("--kind", choices=("sine", "trend_staircase", "random_walk"), default="sine")
            p.add_argument("--length", type=int, default=defaults["length"])
            for flag in ("period", "amplitude", "center", "drift", "noise_sigma", "walk_sigma", "half_range"):
                p.add_argument("--" + flag.replace("_", "-"), type=float, default=defaults[flag])
            p.add_argument("--decimals", type=int, default=defaults["decimals"])
            p.add_argument("--n-pivots", type=int, default=defaults["n_pivots"])
            p.add_argument("--name", default="", help="output file stem")
    return parser


def read_config(path) -> dict[str, str]:
    """Parse ``key=value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    out = {}
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"config file not found: {p}")
    for lineno, line in enumerate(p.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{p}:{lineno}: expected key=value")
        k, v = (s.strip() for s in line.split("=", 1))
        out[k.replace("-", "_")] = v
    return out


def _apply_config(parser, argv, args):
    cfg = read_config(args.config)
    sub = parser._subparsers._group_actions[0].choices[args.command]
    known = {a.dest: a for a in sub._actions}
    defaults = {}
    for k, v in cfg.items():
        if k not in known or k in ("help", "config"):
            raise UsageError(f"unknown config key: {k}")
        action = known[k]
        if action.const is True and action.nargs == 0:
            defaults[k] = v.lower() in ("1", "true", "yes", "on")
        else:
            try:
                defaults[k] = action.type(v) if action.type else v
            except ValueError:
                raise UsageError(f"bad value for {k}: {v!r}") from None
            if action.choices and defaults[k] not in action.choices:
                raise UsageError(f"bad value for {k}: {v!r}")
    sub.set_defaults(**defaults)
    return parser.parse_args(argv)


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.config:
            args = _apply_config(parser, argv, args)
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            _COMMANDS[args.command](args, out)
    except (UsageError, DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    if caught and args.strict:
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
