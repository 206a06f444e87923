"""Per-situation metrics and the aggregate trend statistics report."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .calibration import calibrate, default_grid
from .indicators import atr as atr_series
from .market_data import CandleSeries, check_candles
from .sar_minmax import SarConfig, minmax_extrema, sar_process
from .trend_engine import ACTIVATED, CENSORED, PASSED, SituationRecord, Trend, run_trend_indicator, trend_state_series

__all__ = [
    "SituationMetrics",
    "Histogram",
    "StatsReport",
    "metrics_123",
    "metrics_323",
    "metrics_232",
    "situation_metrics",
    "probabilities",
    "dynamic_histogram",
    "reversed_cdf",
    "vector_expectations",
    "build_report",
    "write_histogram_csv",
    "write_reversed_cdf_csv",
    "TrendIndicator",
]


@dataclass(frozen=True)
class SituationMetrics:
    kind: str
    index: int
    degenerate: bool = False
    r_atr: float | None = None
    g_atr: float | None = None
    r_pct: float | None = None
    g_pct: float | None = None
    corr_to_move: float | None = None
    dynamic: float | None = None
    lagged_dynamic: float | None = None
    rel_dur_dynamic: float | None = None
    rel_dur_lagged: float | None = None
    rel_dur_break: float | None = None
    move_height_atr: float | None = None
    corr_height_atr: float | None = None
    move_height_rel: float | None = None
    corr_height_rel: float | None = None


def _atr_at(atr, i: int) -> float:
    return float(np.asarray(atr)[i])


def _risk_goal(rec: SituationRecord, low_pt, p2, prior, atr) -> SituationMetrics:
    # risk/goal measured in trend direction; equals the absolute values whenever
    # the identification close lies between the low point and P2
    d = rec.direction
    close = rec.close_at_identification
    a = _atr_at(atr, low_pt.at)
    risk = d * (close - low_pt.price)
    goal = d * (p2.price - close)
    span = d * (p2.price - low_pt.price)
    prior_span = abs(p2.price - prior.price)
    if not (span > 0 and a > 0 and prior_span > 0 and math.isfinite(a)):
        return SituationMetrics(rec.kind, rec.index, degenerate=True)
    r_pct = risk / span
    return SituationMetrics(rec.kind, rec.index, r_atr=risk / a, g_atr=goal / a, r_pct=r_pct,
                            g_pct=1.0 - r_pct, corr_to_move=span / prior_span)


def metrics_123(record: SituationRecord, atr) -> SituationMetrics:
    """Risk and goal of a 1-2-3, in ATR(P3) units and as a share of |P2 - P3|."""
    if record.kind != "s123":
        raise ValueError(f"expected an s123 record, got {record.kind}")
    p = record.points
    return _risk_goal(record, p["p3"], p["p2"], p["p1"], atr)


def metrics_323(record: SituationRecord, atr) -> SituationMetrics:
    if record.kind != "s323":
        raise ValueError(f"expected an s323 record, got {record.kind}")
    p = record.points
    return _risk_goal(record, p["p3_new"], p["p2"], p["p3"], atr)


def metrics_232(record: SituationRecord, atr, series: CandleSeries | None = None) -> SituationMetrics:
    """Dynamic, lagged dynamic, relative durations and normalized heights of a 2-3-2."""
    if record.kind != "s232":
        raise ValueError(f"expected an s232 record, got {record.kind}")
    p2, p3, p2n = record.points["p2"], record.points["p3"], record.points["p2_new"]
    corr = abs(p2.price - p3.price)
    move = abs(p2n.price - p3.price)
    base = p3.at - p2.at
    a = _atr_at(atr, p3.at)
    if not (corr > 0 and base > 0 and a > 0 and p3.price > 0):
        return SituationMetrics("s232", record.index, degenerate=True)
    if record.break_point is not None:
        t2_break = record.break_point[0]
    elif series is not None:
        fav = series.high if record.direction > 0 else -series.low
        hits = np.flatnonzero(fav[p3.at + 1:] > record.direction * p2.price)
        t2_break = p3.at + 1 + int(hits[0]) if hits.size else p2n.at
    else:
        raise ValueError("record has no break point and no series was given")
    return SituationMetrics(
        "s232", record.index,
        dynamic=move / corr,
        lagged_dynamic=abs(record.close_at_identification - p3.price) / corr,
        rel_dur_dynamic=(p2n.at - p3.at) / base,
        rel_dur_lagged=(p2n.identified_at - p3.at) / base,
        rel_dur_break=(t2_break - p3.at) / base,
        move_height_atr=move / a,
        corr_height_atr=corr / a,
        move_height_rel=move / p3.price,
        corr_height_rel=corr / p3.price,
    )


_METRIC_FN = {"s123": metrics_123, "s323": metrics_323, "s232": metrics_232}


def situation_metrics(records, atr) -> list[SituationMetrics]:
    return [_METRIC_FN[r.kind](r, atr) for r in records]


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else None


def probabilities(records, trends) -> dict[str, float | None]:
    """Outcome probabilities over uncensored records; None where undefined.

    ``p_pass_232`` uses 1 - #trends/#s232; ``p_pass_232_empirical`` counts
    outcomes. Both are formed as exact fractions before conversion, so on
    uncensored runs they agree bit for bit.
    """
    def tally(kind, good):
        done = [r for r in records if r.kind == kind and r.outcome != CENSORED]
        return sum(r.outcome == good for r in done), len(done)

    a, n123 = tally("s123", ACTIVATED)
    p, n323 = tally("s323", PASSED)
    q, n232 = tally("s232", PASSED)
    total_232 = sum(r.kind == "s232" for r in records)
    out = {
        "p_activate_123": _ratio(a, n123),
        "p_pass_323": _ratio(p, n323),
        "p_pass_232": (1 - Fraction(len(trends), total_232)) if total_232 else None,
        "p_pass_232_empirical": _ratio(q, n232),
    }
    return {k: (None if v is None else float(v)) for k, v in out.items()}


@dataclass(frozen=True)
class Histogram:
    lower: np.ndarray
    upper: np.ndarray
    frequency: np.ndarray
    count: int


def dynamic_histogram(values, bin_width: float = 0.25, cap: float = 4.0, start: float = 1.0) -> Histogram:
    """Relative frequencies on [start, start+w), ..., with a final bin [cap, inf)."""
    v = np.asarray(values, dtype=np.float64).ravel()
    if v.size == 0:
        raise ValueError("no values to bin")
    if bin_width <= 0 or cap <= start:
        raise ValueError("need bin_width > 0 and cap > start")
    if np.any(v < start):
        raise ValueError(f"values below the first bin edge {start}")
    n_regular = int(math.ceil((cap - start) / bin_width - 1e-9))
    lower = start + bin_width * np.arange(n_regular)
    upper = np.minimum(lower + bin_width, cap)
    idx = np.minimum(np.floor((v - start) / bin_width).astype(np.int64), n_regular - 1)
    idx[v >= cap] = n_regular
    counts = np.bincount(idx, minlength=n_regular + 1)
    return Histogram(np.append(lower, cap), np.append(upper, np.inf), counts / v.size, int(v.size))


def reversed_cdf(samples, x_grid, y_grid) -> np.ndarray:
    """F[i, j] = share of samples with rel_dur >= x_grid[i] and dynamic >= y_grid[j]."""
    s = np.asarray(samples, dtype=np.float64).reshape(-1, 2)
    if s.shape[0] == 0:
        raise ValueError("no samples")
    x = np.asarray(x_grid, dtype=np.float64)
    y = np.asarray(y_grid, dtype=np.float64)
    if np.any(np.diff(x) < 0) or np.any(np.diff(y) < 0):
        raise ValueError("grids must be sorted ascending")
    hit_x = s[None, :, 0] >= x[:, None]  # (nx, K)
    hit_y = s[None, :, 1] >= y[:, None]  # (ny, K)
    return (hit_x.astype(np.int64) @ hit_y.T.astype(np.int64)) / s.shape[0]


def vector_expectations(samples) -> dict[str, tuple[float, float]]:
    """Mean points (rel. duration, height ratio) for dynamic, break and lagged dynamic."""
    ms = [m for m in samples if not m.degenerate]
    if not ms:
        raise ValueError("no samples")

    def mean(attr):
        return float(np.mean([getattr(m, attr) for m in ms]))

    return {
        "dynamic": (mean("rel_dur_dynamic"), mean("dynamic")),
        "break": (mean("rel_dur_break"), 1.0),
        "lagged": (mean("rel_dur_lagged"), mean("lagged_dynamic")),
    }


_EXPECT = {
    "s123": ("r_atr", "g_atr", "r_pct", "corr_to_move"),
    "s323": ("r_atr", "g_atr", "r_pct", "corr_to_move"),
    "s232": ("rel_dur_break", "rel_dur_dynamic", "dynamic", "rel_dur_lagged", "lagged_dynamic",
             "move_height_atr", "corr_height_atr", "move_height_rel", "corr_height_rel"),
}


@dataclass
class StatsReport:
    meta: dict = field(default_factory=dict)
    counts: dict = field(default_factory=dict)
    probabilities: dict = field(default_factory=dict)
    expectations: dict = field(default_factory=dict)
    excluded: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_text(self) -> str:
        c, p, e = self.counts, self.probabilities, self.expectations

        def num(v, fmt="{:.2f}"):
            return "n/a" if v is None else fmt.format(v)

        rows = [
            ("underlying", self.meta.get("symbol", "")),
            ("time-unit", self.meta.get("aggregation", "")),
            ("period of time", f"{self.meta.get('start', '')} .. {self.meta.get('end', '')}"),
            ("timescale", num(self.meta.get("timescale"), "{:.1f}")),
            ("number of candles", str(c["candles"])),
            ("number of trends", str(c["trends"])),
            ("#(1-2-3)", str(c["s123"])),
            ("probability of activate a trend", num(p["p_activate_123"])),
            ("E(R_123,ATR)", num(e["s123"]["r_atr"])),
            ("E(G_123,ATR)", num(e["s123"]["g_atr"])),
            ("E(R_123,%)", num(e["s123"]["r_pct"])),
            ("E(corr. height / ini. move. height)", num(e["s123"]["corr_to_move"])),
            ("#(3-2-3)", str(c["s323"])),
            ("probability pass P2 after a 3-2-3", num(p["p_pass_323"])),
            ("E(R_323,ATR)", num(e["s323"]["r_atr"])),
            ("E(G_323,ATR)", num(e["s323"]["g_atr"])),
            ("E(R_323,%)", num(e["s323"]["r_pct"])),
            ("E(corr. height / move. height)", num(e["s323"]["corr_to_move"])),
            ("#(2-3-2)", str(c["s232"])),
            ("probability pass P2 after a 2-3-2", num(p["p_pass_232"])),
            ("  empirical", num(p["p_pass_232_empirical"])),
            ("E(rel. dur. of break)", num(e["s232"]["rel_dur_break"])),
            ("E(rel. dur. of dyn.)", num(e["s232"]["rel_dur_dynamic"])),
            ("E(dynamic)", num(e["s232"]["dynamic"])),
            ("E(rel. dur. of lag. dyn.)", num(e["s232"]["rel_dur_lagged"])),
            ("E(lag. dynamic)", num(e["s232"]["lagged_dynamic"])),
            ("E(move. height / ATR(P3))", num(e["s232"]["move_height_atr"])),
            ("E(corr. height / ATR(P3))", num(e["s232"]["corr_height_atr"])),
            ("E(move. height / low(P3))", num(e["s232"]["move_height_rel"], "{:.4f}")),
            ("E(corr. height / low(P3))", num(e["s232"]["corr_height_rel"], "{:.4f}")),
            ("E(number of movements)", num(e["movements"])),
        ]
        for kind, n in sorted(self.excluded.items()):
            rows.append((f"excluded {kind}", str(n)))
        width = max(len(r[0]) for r in rows)
        return "".join(f"{k:<{width}}  {v:>12}\n" for k, v in rows)


def _mean(values) -> float | None:
    return float(np.mean(values)) if values else None


def build_report(series: CandleSeries, trends: list[Trend], records: list[SituationRecord], atr,
                 meta: dict | None = None) -> StatsReport:
    """Assemble counts, probabilities and expectations for one calibrated run.

    Censored and degenerate records are left out of every expectation and
    counted under ``excluded``; counts include every recorded situation.
    """
    metrics = situation_metrics(records, atr)
    counts = {"candles": len(series), "trends": len(trends),
              "trends_broken": sum(t.broken_at is not None for t in trends)}
    excluded = {}
    expectations = {}
    for kind, attrs in _EXPECT.items():
        recs = [(r, m) for r, m in zip(records, metrics) if r.kind == kind]
        counts[kind] = len(recs)
        censored = sum(r.outcome == CENSORED for r, _ in recs)
        degenerate = sum(m.degenerate for r, m in recs if r.outcome != CENSORED)
        excluded[f"{kind}_censored"] = censored
        excluded[f"{kind}_degenerate"] = degenerate
        usable = [m for r, m in recs if r.outcome != CENSORED and not m.degenerate]
        expectations[kind] = {a: _mean([getattr(m, a) for m in usable]) for a in attrs}
        expectations[kind]["samples"] = len(usable)
    expectations["movements"] = _mean([t.movements for t in trends])
    usable_232 = [m for r, m in zip(records, metrics)
                  if r.kind == "s232" and r.outcome != CENSORED and not m.degenerate]
    expectations["vectors"] = (
        {k: list(v) for k, v in vector_expectations(usable_232).items()} if usable_232 else None)
    base_meta = {"symbol": series.symbol, "aggregation": series.aggregation}
    start, end = series.period()
    base_meta.update(start=start, end=end)
    base_meta.update(meta or {})
    return StatsReport(base_meta, counts, probabilities(records, trends), expectations, excluded)


def write_histogram_csv(hist: Histogram, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("lower", "upper", "frequency"))
        for lo, hi, f in zip(hist.lower, hist.upper, hist.frequency):
            w.writerow((repr(float(lo)), "inf" if math.isinf(hi) else repr(float(hi)), repr(float(f))))


def write_reversed_cdf_csv(grid: np.ndarray, x_grid, y_grid, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("rel_dur", "dynamic", "F"))
        for i, x in enumerate(x_grid):
            for j, y in enumerate(y_grid):
                w.writerow((repr(float(x)), repr(float(y)), repr(float(grid[i, j]))))


class TrendIndicator(BaseEstimator):
    """Calibrated 1-2-3 trend indicator with situation statistics.

    With ``timescale=None`` the timescale is calibrated on the fitted series
    first. Fitted attributes: ``timescale_``, ``calibration_`` (None when the
    timescale was given), ``extrema_``, ``trends_``, ``situations_``,
    ``metrics_`` and ``report_``. ``predict`` returns the per-bar trend label
    (+1 up, -1 down, 0 none) for the fitted series.
    """

    def __init__(self, timescale=None, delta_factor=0.3, atr_period=100, n_min=2, n_max=300,
                 t_start=0.4, t_stop=6.0, t_step=0.1, n_jobs=1):
        self.timescale = timescale
        self.delta_factor = delta_factor
        self.atr_period = atr_period
        self.n_min = n_min
        self.n_max = n_max
        self.t_start = t_start
        self.t_stop = t_stop
        self.t_step = t_step
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        series = check_candles(X)
        meta = {}
        self.calibration_ = None
        if self.timescale is None:
            res = calibrate(series, self.n_min, self.n_max,
                            default_grid(self.t_start, self.t_stop, self.t_step),
                            self.delta_factor, self.atr_period, self.n_jobs)
            self.calibration_ = res
            t = res.timescale
            meta.update(n_star=res.n_star, phi_star=res.phi_star)
        else:
            t = float(self.timescale)
        self.timescale_ = t
        meta["timescale"] = t
        a = atr_series(series, self.atr_period).values
        sar = sar_process(series, SarConfig(t, self.delta_factor, self.atr_period), atr_values=a)
        self.extrema_ = minmax_extrema(series, sar)
        self.trends_, self.situations_ = run_trend_indicator(self.extrema_, series)
        self.metrics_ = situation_metrics(self.situations_, a)
        self.report_ = build_report(series, self.trends_, self.situations_, a, meta)
        self.n_bars_ = len(series)
        return self

    def predict(self, X=None):
        check_is_fitted(self, "trends_")
        if X is not None and len(check_candles(X)) != self.n_bars_:
            raise ValueError("predict labels the fitted series; refit for a different series")
        return trend_state_series(self.trends_, self.n_bars_)

    def fit_predict(self, X, y=None):
        return self.fit(X).predict()
