import xml.etree.ElementTree as ET

import numpy as np
import pytest

from faultsim.config import parse_config
from faultsim.core import Trajectory
from faultsim.harness import run_scenario
from faultsim.io import emit_csv, emit_report, emit_svg, read_csv, read_report

SVG = "{http://www.w3.org/2000/svg}"


def test_two_row_csv(tmp_path):
    traj = Trajectory([0.0, 0.1], {"a": [1.0, 2.0], "b": [0.1 + 0.2, -1e-300]})
    path = tmp_path / "t.csv"
    emit_csv(traj, path)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("# faultsim trajectory schema_version=1")
    assert lines[1] == "t,a,b"
    assert len(lines) == 4
    back, meta = read_csv(path)
    assert meta["schema_version"] == "1"
    assert back["b"][0] == 0.1 + 0.2
    assert back["b"][1] == -1e-300


def test_round_trip_is_lossless(tmp_path):
    rng = np.random.default_rng(1)
    vals = rng.normal(size=(50, 3)) * 10.0 ** rng.integers(-12, 12, size=(50, 3))
    traj = Trajectory(np.arange(50) * 0.002, {f"c{k}": vals[:, k] for k in range(3)})
    emit_csv(traj, tmp_path / "r.csv")
    back, _ = read_csv(tmp_path / "r.csv")
    for k in range(3):
        np.testing.assert_array_equal(back[f"c{k}"], vals[:, k])


def test_bad_files(tmp_path):
    p = tmp_path / "x.csv"
    p.write_text("t,a\n0,1\n")
    with pytest.raises(ValueError):
        read_csv(p)
    with pytest.raises(OSError) as info:
        emit_csv(Trajectory([0.0], {}), tmp_path / "missing" / "x.csv")
    assert "missing" in str(info.value)


def test_svg_structure(tmp_path):
    traj, metrics = run_scenario(parse_config("[grid]\ntf = 2\n[faults]\nevents = 3:0.5:1.5\n"))
    path = tmp_path / "b.svg"
    emit_svg(traj, ["beta"], path)
    root = ET.parse(path).getroot()
    panels = root.findall(f"{SVG}g")
    assert len(panels) == 1
    series = panels[0].findall(f"{SVG}polyline")
    assert [s.get("data-name") for s in series] == ["beta_1", "beta_2", "beta_3"]
    emit_svg(traj, ["beta", "pitch", "rotor"], path)
    assert len(ET.parse(path).getroot().findall(f"{SVG}g")) == 3
    with pytest.raises(ValueError):
        emit_svg(traj, ["nonsense"], path)


def test_report(tmp_path):
    _, metrics = run_scenario(parse_config("[grid]\ntf = 2\n"))
    emit_report(metrics, tmp_path / "m.txt", {"seed": 7})
    rep = read_report(tmp_path / "m.txt")
    assert rep["seed"] == "7"
    assert float(rep["l2_gain_emp"]) == metrics.l2_gain_emp
