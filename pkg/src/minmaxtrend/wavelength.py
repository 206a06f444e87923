"""Dominant wavelength of a chart from shift cross-correlations of the detrended mid-price."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .indicators import centered_ma
from .market_data import CandleSeries, check_candles, mid_price_series

__all__ = [
    "Correlogram",
    "detrended_series",
    "correlation",
    "cross_correlation",
    "correlogram",
    "dominant_wavelength",
    "write_correlogram_csv",
    "WavelengthEstimator",
]


@dataclass(frozen=True)
class Correlogram:
    shifts: np.ndarray
    phi: np.ndarray

    @property
    def best(self) -> tuple[int, float]:
        return dominant_wavelength(self)

    def __len__(self) -> int:
        return self.shifts.size


def _prices(a) -> np.ndarray:
    """Mid-prices of candle input, or a 1-D price sequence as given."""
    if isinstance(a, CandleSeries) or hasattr(a, "columns") or np.ndim(a) == 2:
        return mid_price_series(check_candles(a))
    arr = np.asarray(a, dtype=np.float64).ravel()
    if arr.size == 0:
        raise ValueError("empty sequence")
    return arr


def detrended_series(a, n: int) -> np.ndarray:
    """X^n_t = a_t - b^n_t for t in [n//2, M-1-n//2] (length M - 2*(n//2))."""
    a = _prices(a)
    b = centered_ma(a, n)
    return a[b.valid_from:b.valid_to] - b.defined


def correlation(x, y, centered: bool = False) -> float:
    """<x, y> / (|x| |y|). Uncentered unless ``centered`` is set."""
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.size != y.size or x.size == 0:
        raise ValueError("vectors must have equal, non-zero length")
    if centered:
        x = x - x.mean()
        y = y - y.mean()
    nx = np.sqrt(np.dot(x, x))
    ny = np.sqrt(np.dot(y, y))
    if nx == 0.0 or ny == 0.0:
        raise ValueError("degenerate vector: zero norm")
    return float(np.clip(np.dot(x, y) / nx / ny, -1.0, 1.0))


def _overlap(m: int, n: int) -> int:
    return m - n - 2 * (n // 2)


def cross_correlation(a, n: int, centered: bool = False) -> float:
    """phi_n: correlation of X^n_t with X^n_{t+n}, t = n//2 .. N - n//2, N = M - n - 1."""
    a = _prices(a)
    if int(n) != n or n < 1:
        raise ValueError(f"shift must be a positive integer, got {n!r}")
    n = int(n)
    m = a.size
    length = _overlap(m, n)
    if length < 2:
        raise ValueError(f"shift too large for series: n={n}, M={m}")
    x = detrended_series(a, n)  # x[0] is X_{n//2}
    return correlation(x[:length], x[n:n + length], centered=centered)


def correlogram(a, n_min: int = 2, n_max: int = 300, centered: bool = False) -> Correlogram:
    """phi_n for every admissible shift in [n_min, n_max].

    Shifts too large for the series are dropped with a warning; an entirely
    inadmissible range is an error.
    """
    a = _prices(a)
    if not 1 <= n_min <= n_max:
        raise ValueError(f"need 1 <= n_min <= n_max, got [{n_min}, {n_max}]")
    shifts = [n for n in range(int(n_min), int(n_max) + 1) if _overlap(a.size, n) >= 2]
    if not shifts:
        raise ValueError(f"no admissible shift in [{n_min}, {n_max}] for series of length {a.size}")
    if shifts[-1] < n_max:
        warnings.warn(f"shift range truncated to [{n_min}, {shifts[-1]}] for series of length {a.size}",
                      RuntimeWarning, stacklevel=2)
    phi = np.array([cross_correlation(a, n, centered) for n in shifts])
    return Correlogram(np.array(shifts, dtype=np.int64), phi)


def dominant_wavelength(cg: Correlogram) -> tuple[int, float]:
    """Smallest shift attaining the maximal correlation."""
    if len(cg) == 0:
        raise ValueError("empty correlogram")
    i = int(np.argmax(cg.phi))
    return int(cg.shifts[i]), float(cg.phi[i])


def write_correlogram_csv(cg: Correlogram, path) -> None:
    n_star, _ = dominant_wavelength(cg)
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("n", "phi", "dominant"))
        for n, p in zip(cg.shifts, cg.phi):
            w.writerow((int(n), repr(float(p)), int(n == n_star)))


class WavelengthEstimator(BaseEstimator):
    """Estimate the dominant wavelength n* of a candle or price series.

    After ``fit``: ``correlogram_``, ``dominant_wavelength_`` and
    ``correlation_`` (the correlation at n*).
    """

    def __init__(self, n_min=2, n_max=300, centered=False):
        self.n_min = n_min
        self.n_max = n_max
        self.centered = centered

    def fit(self, X, y=None):
        self.correlogram_ = correlogram(_prices(X), self.n_min, self.n_max, self.centered)
        self.dominant_wavelength_, self.correlation_ = dominant_wavelength(self.correlogram_)
        return self

    def score(self, X, y=None) -> float:
        """Correlation of X at the fitted wavelength."""
        check_is_fitted(self, "dominant_wavelength_")
        return cross_correlation(_prices(X), self.dominant_wavelength_, self.centered)
