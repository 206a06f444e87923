"""Seeded synthetic charts with known structure.

Randomness comes from a SplitMix64 counter generator evaluated with wrapping
uint64 arithmetic. Uniforms are ``(z >> 11) * 2**-53``; normals are the
Irwin-Hall sum of twelve uniforms minus six, accumulated left to right. Every
step is exact or correctly rounded IEEE arithmetic, and prices are rounded
to ``decimals`` places, so fixtures are identical across platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .market_data import CandleSeries
from .sar_minmax import ExtremumEvent

__all__ = [
    "SynthSpec",
    "splitmix64",
    "uniforms",
    "normals",
    "generate",
    "staircase_fixture",
    "random_pivots",
]

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_EPOCH0 = 946684800  # 2000-01-01T00:00:00Z
_DAY = 86400

KINDS = ("sine", "trend_staircase", "random_walk")


def splitmix64(seed: int, count: int, stream: int = 0) -> np.ndarray:
    """``count`` SplitMix64 outputs for counters 1..count of the given stream."""
    base = np.uint64((int(seed) + (int(stream) << 48)) & 0xFFFFFFFFFFFFFFFF)
    with np.errstate(over="ignore"):
        z = base + np.arange(1, count + 1, dtype=np.uint64) * _GAMMA
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, count: int, stream: int = 0) -> np.ndarray:
    return (splitmix64(seed, count, stream) >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def normals(seed: int, count: int, stream: int = 0) -> np.ndarray:
    u = uniforms(seed, 12 * count, stream).reshape(count, 12)
    acc = u[:, 0].copy()
    for j in range(1, 12):
        acc += u[:, j]
    return acc - 6.0


@dataclass(frozen=True)
class SynthSpec:
    kind: str = "sine"
    length: int = 5000
    seed: int = 0
    period: float = 50.0
    amplitude: float = 10.0
    center: float = 100.0
    drift: float = 0.0
    noise_sigma: float = 0.0
    walk_sigma: float = 0.0
    half_range: float = 0.2
    decimals: int = 6
    pivots: tuple[tuple[int, float], ...] = field(default=())
    n_pivots: int = 20

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"kind must be one of {KINDS}, got {self.kind!r}")
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.kind == "sine" and self.period < 2:
            raise ValueError("period must be >= 2 for sine")
        if self.noise_sigma < 0 or self.walk_sigma < 0 or self.half_range < 0:
            raise ValueError("noise_sigma, walk_sigma and half_range must be >= 0")
        if self.seed < 0:
            raise ValueError("seed must be unsigned")


def _rounded(x: np.ndarray, decimals: int) -> np.ndarray:
    return np.array([round(float(v), decimals) for v in x])


def _band_candles(mid: np.ndarray, spec: SynthSpec) -> CandleSeries:
    mid = _rounded(mid, spec.decimals)
    high = _rounded(mid + spec.half_range, spec.decimals)
    low = _rounded(mid - spec.half_range, spec.decimals)
    prev = np.concatenate((mid[:1], mid[:-1]))
    open_ = np.minimum(np.maximum(prev, low), high)
    if np.any(low <= 0):
        raise ValueError("generated non-positive prices; raise center or lower the noise")
    ts = _EPOCH0 + _DAY * np.arange(mid.size, dtype=np.int64)
    return CandleSeries(open_, high, low, mid, timestamps=ts, symbol=f"synth-{spec.kind}", aggregation="1d")


def random_pivots(seed: int, n: int, start: float = 200.0, swing=(1.0, 10.0), gap=(2, 8),
                  decimals: int = 4) -> list[tuple[int, float]]:
    """Alternating min/max pivots beginning with a minimum at bar 0."""
    u = uniforms(seed, 2 * n, stream=3)
    pivots = [(0, round(start, decimals))]
    for k in range(1, n):
        t = pivots[-1][0] + gap[0] + int(u[2 * k] * (gap[1] - gap[0] + 1))
        step = swing[0] + u[2 * k + 1] * (swing[1] - swing[0])
        sign = 1.0 if k % 2 else -1.0
        pivots.append((t, round(pivots[-1][1] + sign * step, decimals)))
    return pivots


def _path(pivots) -> np.ndarray:
    at = np.array([p[0] for p in pivots], dtype=np.float64)
    price = np.array([p[1] for p in pivots], dtype=np.float64)
    if np.any(np.diff(at) < 1):
        raise ValueError("pivot bars must be strictly increasing")
    return np.interp(np.arange(int(at[-1]) + 1), at, price)


def staircase_fixture(spec: SynthSpec) -> tuple[CandleSeries, list[ExtremumEvent]]:
    """Piecewise-linear candles through the pivots plus the true extrema.

    Each candle opens at the previous path value and closes at the current
    one, so pivot maxima (minima) are exact candle highs (lows). Pivots
    alternate kinds; the first kind is inferred from the first two prices.
    Identification lags are drawn so that every pivot is identified after it
    occurs and no later than the next pivot.
    """
    pivots = list(spec.pivots) or random_pivots(spec.seed, spec.n_pivots)
    if len(pivots) < 2:
        raise ValueError("staircase needs at least two pivots")
    mid = _rounded(_path(pivots), spec.decimals)
    tail = max(spec.length - mid.size, 1)
    mid = np.concatenate((mid, np.full(tail, mid[-1])))
    if np.any(mid <= 0):
        raise ValueError("pivot prices must be positive")
    prev = np.concatenate((mid[:1], mid[:-1]))
    high, low = np.maximum(prev, mid), np.minimum(prev, mid)
    ts = _EPOCH0 + _DAY * np.arange(mid.size, dtype=np.int64)
    series = CandleSeries(prev, high, low, mid, timestamps=ts, symbol="synth-trend_staircase", aggregation="1d")

    first_max = pivots[0][1] > pivots[1][1]
    u = uniforms(spec.seed, len(pivots), stream=4)
    events = []
    for k, (at, price) in enumerate(pivots):
        limit = pivots[k + 1][0] if k + 1 < len(pivots) else mid.size - 1
        span = max(limit - at, 1)
        ident = min(at + 1 + int(u[k] * span), mid.size - 1)
        kind = "max" if (k % 2 == 0) == first_max else "min"
        events.append(ExtremumEvent(kind, int(at), float(mid[at]), int(ident)))
    return series, events


def generate(spec: SynthSpec) -> CandleSeries:
    """Deterministic candle series for ``spec``."""
    t = np.arange(spec.length, dtype=np.float64)
    if spec.kind == "trend_staircase":
        return staircase_fixture(spec)[0]
    mid = spec.center + spec.drift * t
    if spec.kind == "sine":
        w = 2.0 * math.pi / spec.period
        mid = mid + spec.amplitude * np.array([math.sin(w * k) for k in range(spec.length)])
        if spec.noise_sigma > 0:
            mid = mid + spec.noise_sigma * normals(spec.seed, spec.length, stream=1)
        if spec.walk_sigma > 0:
            mid = mid + np.cumsum(spec.walk_sigma * normals(spec.seed, spec.length, stream=2))
    else:
        if spec.noise_sigma > 0:
            mid = mid + np.cumsum(spec.noise_sigma * normals(spec.seed, spec.length, stream=2))
    return _band_candles(mid, spec)
