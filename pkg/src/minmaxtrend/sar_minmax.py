"""MACD-driven stop-and-reverse process and MinMax extrema extraction."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .indicators import atr, macd
from .market_data import CandleSeries, check_candles, mid_price_series

__all__ = [
    "UP",
    "DOWN",
    "UNDEFINED",
    "SarConfig",
    "SarSeries",
    "ExtremumEvent",
    "InsufficientExtremaError",
    "scaled_macd_params",
    "sar_process",
    "minmax_extrema",
    "average_period_length",
    "write_extrema_csv",
    "MinMaxExtractor",
]

UP, DOWN, UNDEFINED = 1, -1, 0


class InsufficientExtremaError(ValueError):
    """Too few extrema to measure a period length."""


@dataclass(frozen=True)
class SarConfig:
    timescale: float = 1.0
    delta_factor: float = 0.3
    atr_period: int = 100
    macd_defaults: tuple[int, int, int] = (12, 26, 9)

    def __post_init__(self):
        if not (math.isfinite(self.timescale) and self.timescale > 0):
            raise ValueError(f"timescale must be > 0, got {self.timescale!r}")
        if not (math.isfinite(self.delta_factor) and self.delta_factor >= 0):
            raise ValueError(f"delta_factor must be >= 0, got {self.delta_factor!r}")
        if int(self.atr_period) != self.atr_period or self.atr_period < 1:
            raise ValueError(f"atr_period must be a positive integer, got {self.atr_period!r}")


@dataclass(frozen=True)
class SarSeries:
    """Per-bar direction in {UP, DOWN, UNDEFINED}.

    ``flip_indices`` lists bars where the direction switched between UP and
    DOWN; the first transition out of the undefined warmup is ``first_defined``.
    """

    direction: np.ndarray
    flip_indices: tuple[int, ...]
    first_defined: int | None

    def __len__(self) -> int:
        return self.direction.size


@dataclass(frozen=True)
class ExtremumEvent:
    kind: str  # "min" or "max"
    at: int
    price: float
    identified_at: int
    provisional: bool = False

    def __post_init__(self):
        if self.kind not in ("min", "max"):
            raise ValueError(f"kind must be 'min' or 'max', got {self.kind!r}")
        if self.identified_at < self.at:
            raise ValueError("identified_at precedes the extremum")


def _round_half_up(x: float) -> int:
    return int(math.floor(x + 0.5))


def scaled_macd_params(config: SarConfig) -> tuple[int, int, int]:
    """MACD (fast, slow, signal) periods scaled by the timescale, each at least 1."""
    f0, s0, g0 = config.macd_defaults
    t = config.timescale
    fast = max(1, _round_half_up(f0 * t))
    slow = max(1, _round_half_up(s0 * t))
    signal = max(1, _round_half_up(g0 * t))
    if slow <= fast:
        slow = fast + 1
    return fast, slow, signal


def sar_process(series: CandleSeries, config: SarConfig = SarConfig(), *, atr_values=None) -> SarSeries:
    """Direction process from the MACD-minus-signal distance with ATR hysteresis.

    With d_t = macd_t - signal_t and delta_t = delta_factor * ATR_t, the state
    turns up on d_t >= delta_t and down on d_t <= -delta_t. A zero distance
    never sets a state, so flat stretches with delta_t = 0 cannot oscillate.
    ``atr_values`` may be supplied to reuse an ATR computed elsewhere.
    """
    fast, slow, signal = scaled_macd_params(config)
    m = len(series)
    if m <= slow:
        raise ValueError(f"series of {m} bars too short for slow EMA period {slow}")
    line, sig = macd(mid_price_series(series), fast, slow, signal)
    d = line.values - sig.values
    if atr_values is None:
        atr_values = atr(series, config.atr_period).values
    delta = config.delta_factor * np.asarray(atr_values, dtype=np.float64)

    # fire on every bar where a threshold is met; hold state in between
    state = np.zeros(m, dtype=np.int8)
    state[(d > 0) & (d >= delta)] = UP
    state[(d < 0) & (-d >= delta)] = DOWN
    fired = np.flatnonzero(state)
    if fired.size == 0:
        return SarSeries(np.zeros(m, dtype=np.int8), (), None)
    last = np.zeros(m, dtype=np.int64)
    last[fired] = fired
    np.maximum.accumulate(last, out=last)
    direction = state[last]
    first = int(fired[0])
    direction[:first] = UNDEFINED
    changes = np.flatnonzero(direction[first + 1:] != direction[first:-1]) + first + 1
    direction.flags.writeable = False
    return SarSeries(direction, tuple(int(i) for i in changes), first)


def minmax_extrema(series: CandleSeries, sar: SarSeries) -> list[ExtremumEvent]:
    """One extremum per maximal SAR run.

    An up run yields a maximum at its highest high, a down run a minimum at
    its lowest low (earliest bar on ties). The event is identified on the
    first bar of the next run; a run still open at the series end yields a
    provisional event identified on the last bar.
    """
    if len(sar) != len(series):
        raise ValueError("SAR series not aligned with candles")
    if sar.first_defined is None:
        return []
    starts = [sar.first_defined, *sar.flip_indices]
    ends = [*sar.flip_indices, len(series)]
    high, low = series.high, series.low
    events = []
    for s, e in zip(starts, ends):
        last_run = e == len(series)
        ident = e - 1 if last_run else e
        if sar.direction[s] == UP:
            j = s + int(np.argmax(high[s:e]))
            events.append(ExtremumEvent("max", j, float(high[j]), ident, last_run))
        else:
            j = s + int(np.argmin(low[s:e]))
            events.append(ExtremumEvent("min", j, float(low[j]), ident, last_run))
    return events


def average_period_length(extrema) -> float:
    """Mean spacing of consecutive same-kind extrema, minima and maxima pooled."""
    gaps = []
    for kind in ("min", "max"):
        at = [e.at for e in extrema if e.kind == kind]
        gaps.extend(b - a for a, b in zip(at, at[1:]))
    if not gaps:
        raise InsufficientExtremaError("insufficient extrema: need two of the same kind")
    return float(np.mean(gaps))


def write_extrema_csv(extrema, path) -> None:
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("kind", "at", "price", "identified_at", "provisional"))
        for e in extrema:
            w.writerow((e.kind, e.at, repr(e.price), e.identified_at, int(e.provisional)))


class MinMaxExtractor(TransformerMixin, BaseEstimator):
    """Extract alternating relevant extrema from candles at a fixed timescale.

    ``fit`` runs the extraction on the training series and stores ``sar_``,
    ``extrema_`` and ``period_length_`` (NaN when too few extrema).
    ``transform`` returns the list of :class:`ExtremumEvent` for any series.
    """

    def __init__(self, timescale=1.0, delta_factor=0.3, atr_period=100):
        self.timescale = timescale
        self.delta_factor = delta_factor
        self.atr_period = atr_period

    def _config(self) -> SarConfig:
        return SarConfig(float(self.timescale), float(self.delta_factor), int(self.atr_period))

    def fit(self, X, y=None):
        series = check_candles(X)
        self.sar_ = sar_process(series, self._config())
        self.extrema_ = minmax_extrema(series, self.sar_)
        confirmed = [e for e in self.extrema_ if not e.provisional]
        try:
            self.period_length_ = average_period_length(confirmed)
        except InsufficientExtremaError:
            self.period_length_ = float("nan")
        return self

    def transform(self, X):
        check_is_fitted(self, "extrema_")
        series = check_candles(X)
        return minmax_extrema(series, sar_process(series, self._config()))
