import json
from pathlib import Path

import pytest

from minmaxtrend import SynthSpec, generate, write_csv
from minmaxtrend.cli import main, read_config

from conftest import CALIBRATION_SPEC

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture(scope="module")
def sine_csv(tmp_path_factory):
    p = tmp_path_factory.mktemp("data") / "sine.csv"
    write_csv(generate(CALIBRATION_SPEC), p)
    return p


def _files(d: Path) -> dict[str, bytes]:
    return {p.name: p.read_bytes() for p in sorted(d.iterdir())}


def test_wavelength_stdout(sine_csv, tmp_path, capsys):
    assert main(["wavelength", "--input", str(sine_csv), "--out-dir", str(tmp_path)]) == 0
    assert capsys.readouterr().out.strip() == "n*=50, phi=0.7281"
    assert (tmp_path / "correlogram.csv").exists()


def test_overrides_and_config(sine_csv, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# shift range\nn-min = 10\nn_max=100\n")
    out = tmp_path / "o"
    assert main(["wavelength", "--input", str(sine_csv), "--config", str(cfg), "--out-dir", str(out)]) == 0
    lines = (out / "correlogram.csv").read_text().splitlines()
    assert lines[1].startswith("10,") and lines[-1].startswith("100,")
    # explicit flags beat the config file
    assert main(["wavelength", "--input", str(sine_csv), "--config", str(cfg), "--n-min", "20",
                 "--out-dir", str(out)]) == 0
    assert (out / "correlogram.csv").read_text().splitlines()[1].startswith("20,")


def test_error_exit_codes(tmp_path, capsys):
    assert main(["wavelength", "--input", str(tmp_path / "missing.csv")]) == 2
    assert "not found" in capsys.readouterr().err
    assert main(["wavelength"]) == 2
    assert main(["nonsense"]) == 2
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour=red\n")
    assert main(["synth", "--config", str(bad), "--out-dir", str(tmp_path)]) == 2
    assert read_config(tmp_path / "bad.cfg") == {"colour": "red"}


def test_strict_escalates_warnings(tmp_path):
    p = tmp_path / "short.csv"
    write_csv(generate(SynthSpec(kind="sine", length=400, period=50, walk_sigma=1.0, seed=2, center=500)), p)
    args = ["calibrate", "--input", str(p), "--out-dir", str(tmp_path / "c"), "--n-max", "300"]
    assert main(args) == 0
    assert main(args + ["--strict"]) == 1


def test_stats_with_explicit_timescale(sine_csv, tmp_path):
    assert main(["stats", "--input", str(sine_csv), "--timescale", "2.2", "--out-dir", str(tmp_path)]) == 0
    rep = json.loads((tmp_path / "report.json").read_text())
    assert rep["meta"]["timescale"] == 2.2 and "n_star" not in rep["meta"]


def test_stats_matches_golden(sine_csv, tmp_path):
    assert main(["stats", "--input", str(sine_csv), "--out-dir", str(tmp_path)]) == 0
    got = json.loads((tmp_path / "report.json").read_text())
    want = json.loads((GOLDEN / "sine_walk_report.json").read_text())
    got["meta"].pop("symbol")
    want["meta"].pop("symbol")
    assert _close(got, want)


def _close(a, b):
    if isinstance(a, dict):
        return isinstance(b, dict) and a.keys() == b.keys() and all(_close(a[k], b[k]) for k in a)
    if isinstance(a, list):
        return isinstance(b, list) and len(a) == len(b) and all(map(_close, a, b))
    if isinstance(a, float) and isinstance(b, float):
        return a == pytest.approx(b, rel=1e-9, abs=1e-12)
    return a == b


@pytest.mark.parametrize("command, extra", [
    ("wavelength", []),
    ("calibrate", ["--t-start", "0.6", "--t-stop", "1.2"]),
    ("extrema", ["--timescale", "0.8"]),
    ("trends", ["--timescale", "0.8"]),
    ("stats", ["--timescale", "0.8"]),
    ("stats", ["--timescale", "0.8", "--format", "json"]),
])
def test_byte_identical_reruns(sine_csv, tmp_path, command, extra):
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert main([command, "--input", str(sine_csv), "--out-dir", str(d), *extra]) == 0
    fa, fb = _files(a), _files(b)
    assert fa and fa == fb


@pytest.mark.parametrize("kind", ["sine", "random_walk", "trend_staircase"])
def test_synth_command(tmp_path, kind):
    for d in ("a", "b"):
        assert main(["synth", "--kind", kind, "--seed", "4", "--noise-sigma", "0.3", "--length", "700",
                     "--out-dir", str(tmp_path / d)]) == 0
    assert _files(tmp_path / "a") == _files(tmp_path / "b")
    name = f"synth_{kind}_4.csv"
    assert (tmp_path / "a" / name).exists()
