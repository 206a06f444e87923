import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import random_candles
from oracles import brute_atr, brute_ema
from minmaxtrend.indicators import atr, centered_ma, ema, macd, true_range


@given(st.lists(st.floats(1, 1000), min_size=1, max_size=200), st.integers(1, 50))
@settings(max_examples=60, deadline=None)
def test_ema_matches_recursion(xs, period):
    np.testing.assert_allclose(ema(xs, period).values, brute_ema(xs, period), rtol=1e-12, atol=1e-9)


def test_ema_constant_is_fixed_point():
    np.testing.assert_allclose(ema(np.full(50, 3.5), 9).values, 3.5, rtol=1e-14)


def test_macd_shapes():
    x = np.linspace(1, 2, 100)
    line, signal = macd(x)
    assert len(line) == len(signal) == 100
    # rising series: fast EMA above slow EMA after the seed bar
    assert np.all(line.values[1:] > 0)


def test_true_range_and_atr_against_brute():
    s = random_candles(3, 400)
    tr = true_range(s).values
    assert tr[0] == s.high[0] - s.low[0]
    want = brute_atr(s.high.tolist(), s.low.tolist(), s.close.tolist(), 100)
    np.testing.assert_allclose(atr(s, 100).values, want, rtol=1e-12)


def test_atr_nonnegative():
    s = random_candles(4, 300)
    assert np.all(atr(s, 14).values >= 0)


@pytest.mark.parametrize("n", [1, 2, 3, 10, 11])
def test_centered_ma_window(n):
    a = np.arange(30, dtype=float) ** 1.5
    b = centered_ma(a, n)
    h = n // 2
    assert b.valid_from == h and len(b.defined) == 30 - 2 * h
    for i, t in enumerate(range(h, 30 - h)):
        assert b.defined[i] == pytest.approx(a[t - h:t + h + 1].mean(), rel=1e-14)


def test_centered_ma_too_short():
    with pytest.raises(ValueError):
        centered_ma(np.ones(5), 6)
