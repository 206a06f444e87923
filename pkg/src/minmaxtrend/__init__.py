"""MinMax trend toolkit: wavelength-calibrated extrema, 1-2-3 trends and their statistics."""

from .calibration import (
    CalibrationCurve,
    CalibrationResult,
    TimescaleCalibrator,
    calibrate,
    default_grid,
    period_length_curve,
    select_timescale,
)
from .indicators import IndicatorSeries, atr, centered_ma, ema, macd, true_range
from .market_data import Candle, CandleSeries, DataError, load_csv, mid_price_series, write_csv
from .sar_minmax import (
    DOWN,
    UP,
    ExtremumEvent,
    InsufficientExtremaError,
    MinMaxExtractor,
    SarConfig,
    SarSeries,
    average_period_length,
    minmax_extrema,
    sar_process,
)
from .stats import (
    Histogram,
    SituationMetrics,
    StatsReport,
    TrendIndicator,
    build_report,
    dynamic_histogram,
    probabilities,
    reversed_cdf,
    vector_expectations,
)
from .synth import SynthSpec, generate, staircase_fixture
from .trend_engine import SituationRecord, Trend, run_trend_indicator, trend_state_series
from .wavelength import Correlogram, WavelengthEstimator, correlogram, cross_correlation, dominant_wavelength

__version__ = "0.1.0"
