"""OHLC candle containers, CSV ingestion and the mid-price series."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

__all__ = [
    "Candle",
    "CandleSeries",
    "DataError",
    "load_csv",
    "write_csv",
    "mid_price_series",
    "check_candles",
]

FIELDS = ("timestamp", "open", "high", "low", "close")

_ALIASES = {
    "timestamp": ("timestamp", "time", "date", "datetime"),
    "open": ("open", "o"),
    "high": ("high", "h"),
    "low": ("low", "l"),
    "close": ("close", "c"),
}


class DataError(ValueError):
    """Raised when candle data is malformed or violates an OHLC invariant."""


@dataclass(frozen=True)
class Candle:
    index: int
    timestamp: int
    open: float
    high: float
    low: float
    close: float


def _check_row(o: float, h: float, l: float, c: float, where: str) -> None:
    for name, v in (("open", o), ("high", h), ("low", l), ("close", c)):
        if not math.isfinite(v):
            raise DataError(f"non-finite {name} at {where}")
        if v <= 0.0:
            raise DataError(f"non-positive {name} at {where}")
    if h < l:
        raise DataError(f"high < low at {where}")
    if l > min(o, c):
        raise DataError(f"low above open/close at {where}")
    if h < max(o, c):
        raise DataError(f"high below open/close at {where}")


class CandleSeries:
    """An immutable, validated sequence of OHLC candles indexed 0..M-1.

    Prices are held as read-only float64 arrays; ``candles`` materializes
    :class:`Candle` objects on demand. Timestamps are informational only.
    """

    def __init__(self, open, high, low, close, timestamps=None, symbol: str = "", aggregation: str = ""):
        arrays = [np.array(a, dtype=np.float64).ravel() for a in (open, high, low, close)]
        m = arrays[0].size
        if m == 0:
            raise DataError("empty series")
        if any(a.size != m for a in arrays):
            raise DataError("open/high/low/close lengths differ")
        if timestamps is None:
            ts = np.arange(m, dtype=np.int64)
        else:
            ts = np.array(timestamps, dtype=np.int64).ravel()
            if ts.size != m:
                raise DataError("timestamp length differs from price length")
        o, h, l, c = arrays
        bad = ~(np.isfinite(o) & np.isfinite(h) & np.isfinite(l) & np.isfinite(c))
        bad |= (o <= 0) | (h <= 0) | (l <= 0) | (c <= 0)
        bad |= (h < l) | (l > np.minimum(o, c)) | (h < np.maximum(o, c))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            _check_row(o[i], h[i], l[i], c[i], f"index {i}")
        if m > 1 and not np.all(np.diff(ts) > 0):
            i = int(np.flatnonzero(np.diff(ts) <= 0)[0]) + 1
            raise DataError(f"timestamps not strictly increasing at index {i}")
        for a in (o, h, l, c, ts):
            a.flags.writeable = False
        self._open, self._high, self._low, self._close, self._ts = o, h, l, c, ts
        self.symbol = symbol
        self.aggregation = aggregation

    open = property(lambda self: self._open)
    high = property(lambda self: self._high)
    low = property(lambda self: self._low)
    close = property(lambda self: self._close)
    timestamps = property(lambda self: self._ts)

    def __len__(self) -> int:
        return self._open.size

    def __getitem__(self, i):
        if isinstance(i, slice):
            return CandleSeries(self._open[i], self._high[i], self._low[i], self._close[i],
                                timestamps=self._ts[i], symbol=self.symbol, aggregation=self.aggregation)
        i = range(len(self))[i]
        return Candle(i, int(self._ts[i]), float(self._open[i]), float(self._high[i]),
                      float(self._low[i]), float(self._close[i]))

    @property
    def candles(self) -> list[Candle]:
        return [self[i] for i in range(len(self))]

    def __eq__(self, other) -> bool:
        if not isinstance(other, CandleSeries):
            return NotImplemented
        return (len(self) == len(other)
                and all(np.array_equal(a, b) for a, b in zip(self._arrays(), other._arrays())))

    def _arrays(self):
        return (self._ts, self._open, self._high, self._low, self._close)

    def __repr__(self) -> str:
        return f"CandleSeries(symbol={self.symbol!r}, aggregation={self.aggregation!r}, M={len(self)})"

    def period(self) -> tuple[str, str]:
        """First and last timestamp as ISO-8601 strings."""
        return _format_ts(int(self._ts[0])), _format_ts(int(self._ts[-1]))


def _parse_ts(text: str) -> int:
    text = text.strip()
    try:
        return int(round(float(text)))
    except ValueError:
        pass
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    dt = datetime.fromisoformat(text)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return int(round(dt.timestamp()))


def _format_ts(ts: int) -> str:
    return datetime.fromtimestamp(ts, tz=timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def _resolve_columns(header: Sequence[str], fmt: Mapping[str, str] | None) -> dict[str, int]:
    lowered = {h.strip().lower(): i for i, h in enumerate(header)}
    cols = {}
    for field in FIELDS:
        if fmt and field in fmt:
            name = fmt[field].strip().lower()
            if name not in lowered:
                raise DataError(f"column {fmt[field]!r} for {field} not in header")
            cols[field] = lowered[name]
            continue
        for alias in _ALIASES[field]:
            if alias in lowered:
                cols[field] = lowered[alias]
                break
        else:
            raise DataError(f"no column for {field} in header {list(header)}")
    return cols


def load_csv(path, format: Mapping[str, str] | None = None, symbol: str = "",
             aggregation: str = "") -> CandleSeries:
    """Read a candle CSV (header row required) into a validated series.

    ``format`` maps the canonical field names (timestamp, open, high, low,
    close) to header names; unmapped fields fall back to common aliases.
    Rows are sorted by timestamp; duplicate timestamps are rejected. Errors
    name the offending line of the file.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise DataError("empty series")
        cols = _resolve_columns(header, format)
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            where = f"row {lineno}"
            try:
                ts = _parse_ts(row[cols["timestamp"]])
                o, h, l, c = (float(row[cols[f]]) for f in ("open", "high", "low", "close"))
            except (IndexError, ValueError) as exc:
                raise DataError(f"parse failure at {where}: {exc}") from None
            _check_row(o, h, l, c, where)
            rows.append((ts, o, h, l, c, lineno))
    if not rows:
        raise DataError("empty series")
    rows.sort(key=lambda r: r[0])
    for prev, cur in zip(rows, rows[1:]):
        if prev[0] == cur[0]:
            raise DataError(f"duplicate timestamp at row {cur[5]} (also row {prev[5]})")
    ts, o, h, l, c, _ = zip(*rows)
    return CandleSeries(o, h, l, c, timestamps=ts, symbol=symbol or path.stem, aggregation=aggregation)


def write_csv(series: CandleSeries, path) -> None:
    """Write ``series`` in the dialect read by :func:`load_csv`."""
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(FIELDS)
        for ts, o, h, l, c in zip(*series._arrays()):
            w.writerow((_format_ts(int(ts)), repr(float(o)), repr(float(h)), repr(float(l)), repr(float(c))))


def mid_price_series(series: CandleSeries) -> np.ndarray:
    """Return a_t = (high_t + low_t) / 2 for every candle."""
    return (series.high + series.low) / 2.0


def check_candles(X) -> CandleSeries:
    """Coerce estimator input to a :class:`CandleSeries`.

    Accepts a CandleSeries, a DataFrame-like object with open/high/low/close
    columns, or an array of shape (M, 4) in open, high, low, close order.
    """
    if isinstance(X, CandleSeries):
        return X
    if hasattr(X, "columns"):
        cols = {str(c).lower(): c for c in X.columns}
        try:
            o, h, l, c = (np.asarray(X[cols[k]], dtype=float) for k in ("open", "high", "low", "close"))
        except KeyError as exc:
            raise DataError(f"missing column {exc}") from None
        ts = None
        for alias in _ALIASES["timestamp"]:
            if alias in cols:
                raw = np.asarray(X[cols[alias]])
                if np.issubdtype(raw.dtype, np.datetime64):
                    ts = raw.astype("datetime64[s]").astype(np.int64)
                elif np.issubdtype(raw.dtype, np.number):
                    ts = raw.astype(np.int64)
                break
        return CandleSeries(o, h, l, c, timestamps=ts)
    arr = np.asarray(X, dtype=float)
    if arr.ndim != 2 or arr.shape[1] != 4:
        raise DataError(f"expected array of shape (M, 4) [open, high, low, close], got {arr.shape}")
    return CandleSeries(arr[:, 0], arr[:, 1], arr[:, 2], arr[:, 3])
