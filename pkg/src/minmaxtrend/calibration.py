"""Timescale calibration: match the MinMax period length to the dominant wavelength."""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .indicators import atr
from .market_data import CandleSeries, check_candles, mid_price_series
from .sar_minmax import InsufficientExtremaError, SarConfig, average_period_length, minmax_extrema, sar_process
from .wavelength import Correlogram, correlogram, dominant_wavelength

__all__ = [
    "CalibrationCurve",
    "CalibrationResult",
    "default_grid",
    "period_length_curve",
    "select_timescale",
    "calibrate",
    "write_curve_csv",
    "TimescaleCalibrator",
    "WEAK_CORRELATION",
]

WEAK_CORRELATION = 0.02


@dataclass(frozen=True)
class CalibrationCurve:
    """Average period length per timescale; undefined points hold NaN."""

    timescales: np.ndarray
    period_lengths: np.ndarray
    extrema_counts: np.ndarray
    selected: float | None = None

    @property
    def defined(self) -> np.ndarray:
        return ~np.isnan(self.period_lengths)


def default_grid(start: float = 0.4, stop: float = 6.0, step: float = 0.1) -> np.ndarray:
    """Inclusive grid rounded to 10 decimals, e.g. 0.4, 0.5, ..., 6.0 (57 points)."""
    if step <= 0 or start <= 0 or stop < start:
        raise ValueError(f"invalid grid ({start}, {stop}, {step})")
    count = int(math.floor((stop - start) / step + 1e-9)) + 1
    return np.round(start + step * np.arange(count), 10)


def _point(series: CandleSeries, config: SarConfig, atr_values) -> tuple[float, int]:
    try:
        sar = sar_process(series, config, atr_values=atr_values)
    except ValueError:
        return math.nan, 0
    events = [e for e in minmax_extrema(series, sar) if not e.provisional]
    try:
        return average_period_length(events), len(events)
    except InsufficientExtremaError:
        return math.nan, len(events)


def period_length_curve(series: CandleSeries, grid=None, delta_factor: float = 0.3,
                        atr_period: int = 100, n_jobs: int = 1) -> CalibrationCurve:
    """Average MinMax period length over a timescale grid.

    Only confirmed (non-provisional) extrema enter the average. Grid points
    with too few extrema are NaN, never zero. ``n_jobs > 1`` evaluates
    grid points on a thread pool; results are merged in grid order.
    """
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.size == 0 or np.any(grid <= 0):
        raise ValueError("grid must be a non-empty list of positive timescales")
    grid = np.unique(grid)
    base = SarConfig(1.0, delta_factor, atr_period)
    atr_values = atr(series, atr_period).values
    configs = [replace(base, timescale=float(t)) for t in grid]
    if n_jobs > 1:
        with ThreadPoolExecutor(max_workers=n_jobs) as pool:
            points = list(pool.map(lambda c: _point(series, c, atr_values), configs))
    else:
        points = [_point(series, c, atr_values) for c in configs]
    lengths = np.array([p[0] for p in points])
    counts = np.array([p[1] for p in points], dtype=np.int64)
    if np.all(np.isnan(lengths)):
        raise ValueError("series too short for calibration: no grid point produced a period length")
    return CalibrationCurve(grid, lengths, counts)


def select_timescale(curve: CalibrationCurve, n_star: float) -> float:
    """Grid timescale whose period length is nearest n*; ties go to the smaller timescale."""
    order = np.argsort(curve.timescales, kind="stable")
    t = curve.timescales[order]
    p = curve.period_lengths[order]
    ok = ~np.isnan(p)
    if not ok.any():
        raise ValueError("calibration curve has no defined point")
    err = np.abs(p[ok] - n_star)
    t_star = float(t[ok][int(np.argmin(err))])
    defined_t = t[ok]
    if t_star in (defined_t[0], defined_t[-1]) and defined_t.size > 1:
        warnings.warn(f"selected timescale {t_star} lies on the grid edge", RuntimeWarning, stacklevel=2)
    return t_star


@dataclass(frozen=True)
class CalibrationResult:
    n_star: int
    phi_star: float
    timescale: float
    correlogram: Correlogram
    curve: CalibrationCurve


def calibrate(series: CandleSeries, n_min: int = 2, n_max: int = 300, grid=None,
              delta_factor: float = 0.3, atr_period: int = 100, n_jobs: int = 1) -> CalibrationResult:
    """Dominant wavelength, period-length curve and the matching timescale."""
    cg = correlogram(mid_price_series(series), n_min, n_max)
    n_star, phi_star = dominant_wavelength(cg)
    if phi_star < WEAK_CORRELATION:
        warnings.warn(f"weak dominant wavelength: phi*={phi_star:.4f} at n*={n_star}",
                      RuntimeWarning, stacklevel=2)
    curve = period_length_curve(series, grid, delta_factor, atr_period, n_jobs)
    t_star = select_timescale(curve, n_star)
    curve = replace(curve, selected=t_star)
    return CalibrationResult(n_star, phi_star, t_star, cg, curve)


def write_curve_csv(curve: CalibrationCurve, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("timescale", "avg_period_length", "extrema_count", "selected"))
        for t, p, c in zip(curve.timescales, curve.period_lengths, curve.extrema_counts):
            w.writerow((repr(float(t)), "" if math.isnan(p) else repr(float(p)), int(c),
                        int(curve.selected is not None and float(t) == curve.selected)))


class TimescaleCalibrator(BaseEstimator):
    """Fit the timescale t* whose MinMax period length matches the dominant wavelength.

    Fitted attributes: ``n_star_``, ``phi_star_``, ``timescale_``,
    ``correlogram_`` and ``curve_``.
    """

    def __init__(self, n_min=2, n_max=300, t_start=0.4, t_stop=6.0, t_step=0.1,
                 delta_factor=0.3, atr_period=100, n_jobs=1):
        self.n_min = n_min
        self.n_max = n_max
        self.t_start = t_start
        self.t_stop = t_stop
        self.t_step = t_step
        self.delta_factor = delta_factor
        self.atr_period = atr_period
        self.n_jobs = n_jobs

    def fit(self, X, y=None):
        series = check_candles(X)
        res = calibrate(series, self.n_min, self.n_max,
                        default_grid(self.t_start, self.t_stop, self.t_step),
                        self.delta_factor, self.atr_period, self.n_jobs)
        self.n_star_, self.phi_star_ = res.n_star, res.phi_star
        self.timescale_ = res.timescale
        self.correlogram_, self.curve_ = res.correlogram, res.curve
        return self

    def transform(self, X):
        """Extrema of X at the fitted timescale."""
        check_is_fitted(self, "timescale_")
        series = check_candles(X)
        config = SarConfig(self.timescale_, self.delta_factor, self.atr_period)
        return minmax_extrema(series, sar_process(series, config))
