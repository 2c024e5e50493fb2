import os

import pytest

from faultsim.cli import main


def test_dump_config(capsys):
    assert main(["dump-config"]) == 0
    out = capsys.readouterr().out
    assert "[rotor]" in out and "k1 = 61" in out


def test_check_gains(capsys, tmp_path):
    assert main(["check-gains"]) == 0
    out = capsys.readouterr().out
    assert "k1_threshold = 58.38" in out
    assert "k1_satisfied = true" in out
    assert "k2_satisfied = false" in out
    assert main(["check-gains", "--strict"]) == 3
    cfg = tmp_path / "low.ini"
    cfg.write_text("[gains]\nk1 = 58\n")
    assert main(["check-gains", "--config", str(cfg)]) == 0
    assert "k1_satisfied = false" in capsys.readouterr().out


def test_config_error_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[wind]\nw_min = 30\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 2
    assert "wind" in capsys.readouterr().err
    assert main(["dump-config", "--config", str(tmp_path / "nope.ini")]) == 2


def test_strict_simulate_exit_code(tmp_path):
    cfg = tmp_path / "k.ini"
    cfg.write_text("[gains]\nk1 = 58\n")
    assert main(["simulate", "--config", str(cfg), "--strict", "--out", str(tmp_path / "o")]) == 3


def test_integration_failure_exit_code(tmp_path):
    cfg = tmp_path / "dt.ini"
    cfg.write_text("[grid]\ndt = 0.02\ntf = 20\n")
    assert main(["simulate", "--config", str(cfg), "--out", str(tmp_path / "o")]) == 4


def test_simulate_and_plot(tmp_path, capsys):
    cfg = tmp_path / "s.ini"
    cfg.write_text("[grid]\ntf = 4\n[faults]\nevents = 3:1:3\n")
    out = tmp_path / "run"
    assert main(["simulate", "--config", str(cfg), "--seed", "3", "--out", str(out)]) == 0
    for name in ("trajectory.csv", "metrics.txt", "config.ini", "channels.svg", "rotor.svg",
                 "rotor_fault_window.svg"):
        assert (out / name).exists(), name
    assert "seed=3" in (out / "trajectory.csv").read_text().splitlines()[0]
    svg = tmp_path / "p.svg"
    assert main(["plot", "--traj", str(out / "trajectory.csv"), "--channels", "beta,phi",
                 "--out", str(svg), "--window", "0.5,3.5"]) == 0
    assert svg.read_text().count("<polyline") == 5


def test_sweep(tmp_path, capsys):
    d = tmp_path / "cfgs"
    d.mkdir()
    for k in (1, 2):
        (d / f"seed{k}.ini").write_text(f"[grid]\ntf = 5\n[faults]\nevents =\n[wind]\nseed = {k}\n")
    out = tmp_path / "out"
    assert main(["sweep", "--config-dir", str(d), "--out", str(out)]) == 0
    table = (out / "sweep.csv").read_text().splitlines()
    assert len(table) == 3
    assert {row.split(",")[0] for row in table[1:]} == {"seed1", "seed2"}
    assert (out / "seed1" / "trajectory.csv").exists()
