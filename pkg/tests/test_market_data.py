import numpy as np
import pytest

from minmaxtrend.market_data import CandleSeries, DataError, check_candles, load_csv, mid_price_series, write_csv


def _write(tmp_path, text):
    p = tmp_path / "c.csv"
    p.write_text(text)
    return p


def test_mid_price():
    s = CandleSeries([1.2], [1.5], [1.0], [1.3])
    assert mid_price_series(s)[0] == 1.25


def test_candle_invariants_rejected():
    with pytest.raises(DataError):
        CandleSeries([1.0], [0.9], [1.0], [1.0])  # high < low
    with pytest.raises(DataError):
        CandleSeries([2.0], [1.5], [1.0], [1.2])  # open above high
    with pytest.raises(DataError):
        CandleSeries([1.0], [1.0], [0.0], [1.0])  # non-positive
    with pytest.raises(DataError):
        CandleSeries([], [], [], [])


def test_load_csv_reports_row(tmp_path):
    p = _write(tmp_path, "timestamp,open,high,low,close\n"
                         "2020-01-01,1,2,0.5,1.5\n"
                         "2020-01-02,1,2,2.5,1.5\n")
    with pytest.raises(DataError, match="row 3"):
        load_csv(p)


def test_load_csv_sorts_and_rejects_duplicates(tmp_path):
    p = _write(tmp_path, "Date,Open,High,Low,Close\n"
                         "2020-01-02,1,2,0.5,1.5\n"
                         "2020-01-01,1.1,2.1,0.6,1.6\n")
    s = load_csv(p)
    assert s.open.tolist() == [1.1, 1.0]
    p2 = _write(tmp_path, "timestamp,open,high,low,close\n"
                          "2020-01-01,1,2,0.5,1.5\n"
                          "2020-01-01,1,2,0.5,1.5\n")
    with pytest.raises(DataError, match="duplicate"):
        load_csv(p2)


def test_empty_file(tmp_path):
    with pytest.raises(DataError, match="empty"):
        load_csv(_write(tmp_path, "timestamp,open,high,low,close\n"))


def test_round_trip(tmp_path):
    s = CandleSeries([1.0, 1.1], [1.2, 1.3], [0.9, 1.0], [1.1, 1.2], timestamps=[0, 86400])
    p = tmp_path / "x.csv"
    write_csv(s, p)
    back = load_csv(p)
    assert back == s
    assert back.period() == ("1970-01-01T00:00:00Z", "1970-01-02T00:00:00Z")


def test_arrays_read_only():
    s = CandleSeries([1.0], [1.2], [0.9], [1.1])
    with pytest.raises(ValueError):
        s.high[0] = 5.0


def test_check_candles_array():
    arr = np.array([[1.0, 1.2, 0.9, 1.1], [1.1, 1.3, 1.0, 1.2]])
    s = check_candles(arr)
    assert len(s) == 2 and s.close[1] == 1.2
    with pytest.raises((DataError, ValueError)):
        check_candles(np.ones((3, 3)))


def test_slicing_keeps_metadata():
    s = CandleSeries([1.0, 1.1, 1.2], [1.2, 1.3, 1.4], [0.9, 1.0, 1.1], [1.1, 1.2, 1.3],
                     timestamps=[0, 60, 120], symbol="X", aggregation="1m")
    part = s[1:]
    assert len(part) == 2 and part.symbol == "X" and part.timestamps.tolist() == [60, 120]
    assert s[-1].close == 1.3
