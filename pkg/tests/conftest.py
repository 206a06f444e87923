import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from minmaxtrend import CandleSeries, SynthSpec, generate  # noqa: E402

# sine plus a slow random walk: the walk gives the calibration curve a
# timescale dependence that a pure sine lacks
CALIBRATION_SPEC = SynthSpec(kind="sine", period=50, amplitude=10, length=5000, seed=1,
                             walk_sigma=2.0, center=1000)
SINE_SPEC = SynthSpec(kind="sine", period=50, amplitude=10, length=5000, seed=1)


@pytest.fixture(scope="session")
def sine_series():
    return generate(SINE_SPEC)


@pytest.fixture(scope="session")
def calib_series():
    return generate(CALIBRATION_SPEC)


def random_candles(seed: int, m: int, scale: float = 1.0) -> CandleSeries:
    rng = np.random.default_rng(seed)
    mid = 100.0 + np.cumsum(rng.normal(0, scale, m))
    mid -= min(mid.min() - 10.0, 0.0)
    half = rng.uniform(0.05, 0.5, m) * scale
    close = mid + rng.uniform(-1, 1, m) * half
    open_ = mid + rng.uniform(-1, 1, m) * half
    return CandleSeries(open_, mid + half, mid - half, close)


# acceptance criteria outcomes, filled by test_acceptance and printed at the end
ACCEPTANCE: dict[int, tuple[str, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        status, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {status}  {detail}")
