import json

import numpy as np
import pytest

from pegrisk.cli import main, meta_path
from pegrisk.errors import ConfigError, DataFormatError
from pegrisk.io import atomic_write, format_float, read_csv, read_json, to_json, write_csv
from pegrisk.pipeline import PLOT_FILES
from pegrisk.simulator import builtin_scenario, simulate

from .conftest import pair


def write(tmp_path, text, name="in.csv"):
    p = tmp_path / name
    p.write_text(text)
    return p


def test_csv_round_trip_is_exact(tmp_path):
    rng = np.random.default_rng(0)
    src = pair(1 + 1e-3 * rng.standard_normal(50), 100 + np.cumsum(rng.standard_normal(50)))
    path = tmp_path / "x.csv"
    write_csv(src, path)
    back = read_csv(path)
    np.testing.assert_array_equal(back.dates, src.dates)
    assert back.peg.tobytes() == src.peg.tobytes()
    assert back.green.tobytes() == src.green.tobytes()
    assert path.read_text().splitlines()[0] == "date,peg,green"


@pytest.mark.parametrize(
    "body, line",
    [
        ("date,peg,grn\n2024-01-01,1,2\n", 1),
        ("date,peg,green\n2024-01-01,1,2\n2024-01-02,1\n", 3),
        ("date,peg,green\n2024-01-01,1,2\n2024/01/02,1,2\n", 3),
        ("date,peg,green\n2024-01-01,1,2\n2024-02-30,1,2\n", 3),
        ("date,peg,green\n2024-01-01,1,2\n2024-01-01,1,2\n", 3),
        ("date,peg,green\n2024-01-02,1,2\n2024-01-01,1,2\n", 3),
        ("date,peg,green\n2024-01-01,1,2\n2024-01-02,abc,2\n", 3),
        ("date,peg,green\n2024-01-01,1,nan\n", 2),
        ("date,peg,green\n2024-01-01,1,inf\n", 2),
        ('date,peg,green\n2024-01-01,"1,000",2\n', 2),
    ],
)
def test_csv_errors_name_the_line(tmp_path, body, line):
    with pytest.raises(DataFormatError) as info:
        read_csv(write(tmp_path, body))
    assert info.value.line == line
    assert f"line {line}" in str(info.value)


def test_csv_missing_or_empty(tmp_path):
    with pytest.raises(DataFormatError):
        read_csv(tmp_path / "absent.csv")
    with pytest.raises(DataFormatError):
        read_csv(write(tmp_path, "date,peg,green\n"))
    with pytest.raises(DataFormatError):
        read_csv(write(tmp_path, ""))


def test_json_is_canonical(tmp_path):
    doc = {"b": [1.0, 0.1], "a": {"z": None, "y": "s"}}
    text = to_json(doc)
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == doc
    with pytest.raises(ValueError):
        to_json({"x": float("nan")})
    atomic_write(tmp_path / "d.json", text)
    assert read_json(tmp_path / "d.json") == doc
    with pytest.raises(ConfigError):
        read_json(write(tmp_path, "{", "bad.json"))


def test_format_float_round_trips():
    for x in (0.1, 1 / 3, 1e-300, -2.5e17, 0.9999999999999999):
        assert float(format_float(x)) == x
    with pytest.raises(ValueError):
        format_float(float("inf"))


def test_failed_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / "out.json"

    class Boom:
        def __str__(self):
            raise RuntimeError("boom")

    with pytest.raises(TypeError):
        atomic_write(target, Boom())
    assert not target.exists()
    assert list(tmp_path.iterdir()) == []
    with pytest.raises(ConfigError):
        atomic_write(tmp_path / "missing" / "x.json", "{}")


@pytest.fixture(scope="module")
def simulated(tmp_path_factory):
    d = tmp_path_factory.mktemp("sim")
    path = d / "genius.csv"
    assert main(["simulate", "--scenario", "genius-2025", "--seed", "42", "--out", str(path)]) == 0
    return path


def test_simulate_writes_data_and_meta(simulated):
    meta = read_json(meta_path(simulated))
    assert meta["scenario"] == "genius-2025"
    assert meta["data_seed"] == 42
    expected, _ = simulate(builtin_scenario("genius-2025"), 42)
    got = read_csv(simulated)
    assert got.peg.tobytes() == expected.peg.tobytes()


@pytest.mark.parametrize("command", ["fit", "irf", "fevd", "tail", "diagnose"])
def test_json_commands(simulated, command, capsys):
    assert main([command, "--in", str(simulated)]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc


def test_fevd_and_forecast_outputs(simulated, tmp_path, capsys):
    assert main(["fevd", "--in", str(simulated), "--horizon", "12"]) == 0
    f = json.loads(capsys.readouterr().out)
    assert f["horizons"] == list(range(1, 13))
    np.testing.assert_allclose(np.add(f["share_green"], f["share_own"]), 1.0, atol=1e-9)

    out = tmp_path / "fan.json"
    args = ["forecast", "--in", str(simulated), "--paths", "1000", "--seed", "3", "--out", str(out)]
    assert main(args) == 0
    fan = read_json(out)
    bands = np.array(fan["quantile_bands"])
    assert np.all(np.diff(bands, axis=0) >= 0)
    assert len(fan["point"]) == 10
    first = out.read_bytes()
    assert main(args) == 0
    assert out.read_bytes() == first


def test_report_round_trip_is_byte_identical(simulated, tmp_path):
    def run(tag):
        out, plots = tmp_path / f"{tag}.json", tmp_path / f"plots_{tag}"
        argv = ["report", "--in", str(simulated), "--out", str(out), "--plots", str(plots), "--paths", "1000"]
        assert main(argv) == 0
        return out, plots

    out1, p1 = run("a")
    out2, p2 = run("b")
    assert out1.read_bytes() == out2.read_bytes()
    assert sorted(f.name for f in p1.iterdir()) == sorted(PLOT_FILES)
    assert len(PLOT_FILES) == 13
    for name in PLOT_FILES:
        assert (p1 / name).read_bytes() == (p2 / name).read_bytes()
    doc = read_json(out1)
    assert doc["provenance"]["scenario"] == "genius-2025"

    fevd_rows = (p1 / "fevd.csv").read_text().splitlines()[1:]
    for row in fevd_rows:
        _, g, o = row.split(",")
        assert abs(float(g) + float(o) - 1.0) < 1e-9
    fc = [list(map(float, r.split(",")[2:])) for r in (p1 / "forecast.csv").read_text().splitlines()[1:]]
    for row in fc:
        quantiles = row[1:-1]
        assert quantiles == sorted(quantiles)


def test_exit_codes(tmp_path, simulated, capsys):
    assert main([]) == 2
    assert main(["fit"]) == 2
    assert main(["fit", "--in", str(simulated), "--lags", "x"]) == 2
    assert main(["frobnicate"]) == 2
    assert main(["fit", "--in", str(tmp_path / "absent.csv")]) == 1
    short = write(tmp_path, "date,peg,green\n" + "".join(f"2024-01-{d:02d},1.0,{100 + d}\n" for d in range(1, 11)))
    assert main(["fit", "--in", str(short)]) == 1
    assert main(["simulate", "--scenario", "nope", "--out", str(tmp_path / "s.csv")]) == 1
    assert main(["forecast", "--in", str(simulated), "--paths", "0"]) == 1
    err = capsys.readouterr().err
    assert "pegrisk: error:" in err
