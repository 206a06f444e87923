import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_candles
from minmaxtrend import SynthSpec, generate
from minmaxtrend.sar_minmax import (
    DOWN,
    UP,
    ExtremumEvent,
    InsufficientExtremaError,
    MinMaxExtractor,
    SarConfig,
    average_period_length,
    minmax_extrema,
    sar_process,
    scaled_macd_params,
)


@pytest.mark.parametrize("t, want", [
    (1.0, (12, 26, 9)),
    (2.0, (24, 52, 18)),
    (0.5, (6, 13, 5)),  # 4.5 rounds half up
    (0.4, (5, 10, 4)),  # 4.8, 10.4, 3.6
    (0.05, (1, 2, 1)),  # clamped to 1, slow bumped above fast
])
def test_scaled_params(t, want):
    assert scaled_macd_params(SarConfig(timescale=t)) == want


def test_config_validation():
    with pytest.raises(ValueError):
        SarConfig(timescale=0)
    with pytest.raises(ValueError):
        SarConfig(delta_factor=-1)
    with pytest.raises(ValueError):
        SarConfig(atr_period=0)


def test_short_series_rejected():
    s = random_candles(0, 20)
    with pytest.raises(ValueError, match="too short"):
        sar_process(s, SarConfig(timescale=1.0))


def test_flat_series_never_flips():
    m = 300
    x = np.full(m, 5.0)
    from minmaxtrend import CandleSeries
    s = CandleSeries(x, x, x, x)
    sar = sar_process(s)
    assert sar.first_defined is None and sar.flip_indices == ()
    assert minmax_extrema(s, sar) == []


def _check_extrema(series, ext):
    for a, b in zip(ext, ext[1:]):
        assert a.kind != b.kind
        assert a.at < b.at
        assert a.identified_at <= b.identified_at
    for e in ext:
        assert e.identified_at >= e.at
        price = series.high[e.at] if e.kind == "max" else series.low[e.at]
        assert e.price == price
    assert all(not e.provisional for e in ext[:-1])


@given(st.integers(0, 10_000), st.sampled_from([0.4, 1.0, 2.3]))
@settings(max_examples=25, deadline=None)
def test_extrema_alternate_and_lag(seed, t):
    s = random_candles(seed, 600)
    sar = sar_process(s, SarConfig(timescale=t))
    ext = minmax_extrema(s, sar)
    _check_extrema(s, ext)
    if ext:
        assert ext[-1].provisional
    # each extremum is the extreme of its run
    for e, start, end in zip(ext, [sar.first_defined, *sar.flip_indices], [*sar.flip_indices, len(s)]):
        seg = s.high[start:end] if e.kind == "max" else s.low[start:end]
        assert e.price == (seg.max() if e.kind == "max" else seg.min())


def test_hysteresis_reduces_flips():
    s = random_candles(11, 2000)
    loose = sar_process(s, SarConfig(delta_factor=0.0))
    tight = sar_process(s, SarConfig(delta_factor=0.3))
    assert len(tight.flip_indices) <= len(loose.flip_indices)


def test_sine_directions():
    s = generate(SynthSpec(kind="sine", period=50, amplitude=10, length=1000))
    sar = sar_process(s)
    d = sar.direction[sar.first_defined:]
    assert set(np.unique(d)) == {UP, DOWN}


def test_average_period_length():
    ext = [ExtremumEvent("min", 0, 1.0, 1), ExtremumEvent("max", 5, 2.0, 6),
           ExtremumEvent("min", 10, 1.0, 11), ExtremumEvent("max", 19, 2.0, 20)]
    # gaps 10 (min) and 14 (max)
    assert average_period_length(ext) == 12.0
    with pytest.raises(InsufficientExtremaError):
        average_period_length(ext[:2])


def test_extremum_event_validation():
    with pytest.raises(ValueError):
        ExtremumEvent("min", 5, 1.0, 4)
    with pytest.raises(ValueError):
        ExtremumEvent("low", 5, 1.0, 6)


def test_period_length_tracks_sine():
    s = generate(SynthSpec(kind="sine", period=50, amplitude=10, length=3000))
    est = MinMaxExtractor(timescale=1.0).fit(s)
    assert abs(est.period_length_ - 50) < 1
    assert est.transform(s) == est.extrema_
    assert est.get_params() == {"timescale": 1.0, "delta_factor": 0.3, "atr_period": 100}
