"""Indicator kernels: EMA, MACD, true range, ATR and the centered moving average."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import lfilter

from .market_data import CandleSeries

__all__ = ["IndicatorSeries", "ema", "macd", "true_range", "atr", "centered_ma"]


@dataclass(frozen=True)
class IndicatorSeries:
    """Values aligned to candle index; entries outside [valid_from, valid_to) are NaN."""

    values: np.ndarray
    valid_from: int = 0
    valid_to: int | None = None

    def __post_init__(self):
        if self.valid_to is None:
            object.__setattr__(self, "valid_to", self.values.size)
        self.values.flags.writeable = False

    def __len__(self) -> int:
        return self.values.size

    def __getitem__(self, i):
        return self.values[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.values, dtype=dtype)

    @property
    def defined(self) -> np.ndarray:
        return self.values[self.valid_from:self.valid_to]


def _as_1d(x) -> np.ndarray:
    arr = np.asarray(x, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty sequence")
    return arr


def ema(x, period: int) -> IndicatorSeries:
    """Exponential moving average with alpha = 2/(period+1), seeded with x[0]."""
    if int(period) != period or period < 1:
        raise ValueError(f"period must be a positive integer, got {period!r}")
    x = _as_1d(x)
    alpha = 2.0 / (period + 1.0)
    # e_t = alpha*x_t + (1-alpha)*e_{t-1}; zi chosen so that e_0 = x_0
    y, _ = lfilter([alpha], [1.0, alpha - 1.0], x, zi=[(1.0 - alpha) * x[0]])
    return IndicatorSeries(y)


def macd(a, fast: int = 12, slow: int = 26, signal_period: int = 9):
    """Return (macd_line, signal_line) as IndicatorSeries."""
    if not 1 <= fast < slow:
        raise ValueError(f"need 1 <= fast < slow, got fast={fast}, slow={slow}")
    line = ema(a, fast).values - ema(a, slow).values
    return IndicatorSeries(line), ema(line, signal_period)


def true_range(series: CandleSeries) -> IndicatorSeries:
    h, l, c = series.high, series.low, series.close
    tr = h - l
    if tr.size > 1:
        prev = c[:-1]
        tr = tr.copy()
        tr[1:] = np.maximum.reduce([h[1:] - l[1:], h[1:] - prev, prev - l[1:]])
    return IndicatorSeries(tr)


def _trailing_mean(x: np.ndarray, period: int) -> np.ndarray:
    csum = np.concatenate(([0.0], np.cumsum(x)))
    idx = np.arange(x.size)
    start = np.maximum(idx + 1 - period, 0)
    return (csum[idx + 1] - csum[start]) / (idx + 1 - start)


def atr(series: CandleSeries, period: int = 100) -> IndicatorSeries:
    """Simple moving average of the true range.

    Bars before ``period - 1`` average over the bars available so far
    (expanding window), so the result is defined from bar 0.
    """
    if int(period) != period or period < 1:
        raise ValueError(f"period must be a positive integer, got {period!r}")
    tr = true_range(series).values
    return IndicatorSeries(np.maximum(_trailing_mean(tr, int(period)), 0.0))


def centered_ma(a, n: int) -> IndicatorSeries:
    """Centered average over 2*(n//2)+1 bars, defined on [n//2, M-1-n//2]."""
    if int(n) != n or n < 1:
        raise ValueError(f"n must be a positive integer, got {n!r}")
    a = _as_1d(a)
    h = int(n) // 2
    w = 2 * h + 1
    m = a.size
    if m < w:
        raise ValueError(f"series too short: need at least {w} values for n={n}, got {m}")
    # extended-precision prefix sums of the centered data keep window sums accurate
    shift = a.mean()
    csum = np.concatenate(([0.0], np.cumsum(a - shift, dtype=np.longdouble)))
    window = (csum[w:] - csum[:-w]) / w
    out = np.full(m, np.nan)
    out[h:m - h] = (window + shift).astype(np.float64)
    return IndicatorSeries(out, valid_from=h, valid_to=m - h)
