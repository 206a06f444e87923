import math
import warnings

import numpy as np
import pytest

from oracles import brute_spearman
from minmaxtrend.calibration import (
    CalibrationCurve,
    TimescaleCalibrator,
    calibrate,
    default_grid,
    period_length_curve,
    select_timescale,
    write_curve_csv,
)
from minmaxtrend import SynthSpec, generate


def test_default_grid():
    g = default_grid()
    assert g.size == 57 and g[0] == 0.4 and g[-1] == 6.0
    assert g[3] == 0.7
    with pytest.raises(ValueError):
        default_grid(1.0, 0.5, 0.1)


def test_select_nearest_with_small_tie():
    curve = CalibrationCurve(np.array([0.4, 0.5, 0.6, 0.7]), np.array([30.0, 40.0, 60.0, 70.0]),
                             np.zeros(4, dtype=int))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert select_timescale(curve, 50) == 0.5  # tie 40 / 60 goes to the smaller timescale
    with pytest.warns(RuntimeWarning, match="edge"):
        assert select_timescale(curve, 100) == 0.7


def test_select_requires_defined_point():
    curve = CalibrationCurve(np.array([1.0]), np.array([np.nan]), np.zeros(1, dtype=int))
    with pytest.raises(ValueError):
        select_timescale(curve, 5)


def test_too_short_series():
    s = generate(SynthSpec(kind="sine", length=40))
    with pytest.raises(ValueError, match="too short"):
        period_length_curve(s, [1.0, 2.0])


def test_curve_monotone_and_match(calib_series):
    res = calibrate(calib_series)
    p = res.curve.period_lengths
    assert res.curve.defined.all()
    rho = brute_spearman(res.curve.timescales.tolist(), p.tolist())
    assert rho >= 0.95
    assert res.n_star == 50
    i = int(np.flatnonzero(res.curve.timescales == res.timescale)[0])
    assert abs(p[i] - res.n_star) <= 5


def test_parallel_sweep_is_identical(calib_series):
    grid = default_grid(0.5, 2.0, 0.3)
    a = period_length_curve(calib_series, grid)
    b = period_length_curve(calib_series, grid, n_jobs=3)
    np.testing.assert_array_equal(a.period_lengths, b.period_lengths)


def test_weak_wavelength_warning():
    s = generate(SynthSpec(kind="random_walk", noise_sigma=0.5, length=2000, seed=5))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = calibrate(s, grid=default_grid(0.5, 1.5, 0.5))
    if res.phi_star < 0.02:
        assert any("weak" in str(w.message) for w in caught)


def test_estimator_and_csv(tmp_path, calib_series):
    est = TimescaleCalibrator(t_start=0.6, t_stop=1.2, t_step=0.2).fit(calib_series)
    assert est.timescale_ in (0.6, 0.8, 1.0, 1.2)
    ext = est.transform(calib_series)
    assert ext and not math.isnan(ext[0].price)
    write_curve_csv(est.curve_, tmp_path / "c.csv")
    lines = (tmp_path / "c.csv").read_text().splitlines()
    assert lines[0] == "timescale,avg_period_length,extrema_count,selected"
    assert sum(line.endswith(",1") for line in lines[1:]) == 1
