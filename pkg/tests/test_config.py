import pytest

from faultsim.config import (ConfigError, GainCheckError, SCHEMA, dump_config, parse_config)


def test_empty_file_gives_reference_scenario():
    cfg = parse_config("")
    assert cfg.high.k1 == 61.0
    assert cfg.rotor.J == 43784700.0
    assert cfg.wind.w0 == 22.0
    assert [(e.actuator, e.t_on, e.t_off) for e in cfg.faults.events] == [(3, 75.0, 125.0)]
    assert cfg.fault_target.wn2 == 11.6964
    assert cfg.allocator.tau == 0.02
    assert cfg.grid.n_steps == 100000


def test_dump_contains_reference_constants():
    text = dump_config(parse_config(""))
    for line in ("m1 = 5.4184", "m2 = 0.0682", "m3 = 0.029", "c = 960000", "J = 43784700",
                 "P0 = 5296610", "z0 = 1.267", "w0 = 22", "w_min = 11.4", "w_max = 25",
                 "k1 = 61", "gamma = 0.3", "alpha = 3", "h_bar_z = 2.54", "l_bar_w = 7.8",
                 "k2 = 50, 1, 50, 1, 50, 1", "wn2 = 123.4321", "two_zeta_wn = 13.332",
                 "d_w = 111.7357", "d_z = 10.254", "events = 3:75:125"):
        assert line in text.splitlines(), line


def test_dump_round_trips():
    cfg = parse_config("[wind]\nseed = 3\nsigma = 0.5\n[faults]\nevents = 1:10:20:2.5, 3:75:125\n")
    again = parse_config(dump_config(cfg))
    assert again.values == cfg.values


def test_strict_rejects_low_k1():
    with pytest.raises(GainCheckError) as info:
        parse_config("[scenario]\nstrict = true\n[gains]\nk1 = 58\n")
    assert info.value.key == "gains.k1"
    assert info.value.line == 4
    # non-strict only warns
    assert parse_config("[gains]\nk1 = 58\n").high.k1 == 58


def test_strict_also_checks_k2():
    with pytest.raises(GainCheckError) as info:
        parse_config("[scenario]\nstrict = true\n")
    assert info.value.key == "gains.k2"
    ok = parse_config("[scenario]\nstrict = true\n[gains]\n"
                      "k2 = 0, 41.1440333, 0, 41.1440333, 0, 41.1440333\n")
    assert ok.strict


def test_invariant_error_for_wind_bounds():
    with pytest.raises(ConfigError) as info:
        parse_config("[wind]\nw_min = 30\n")
    assert "w_min" in str(info.value)


@pytest.mark.parametrize("text,line,key", [
    ("[rotor]\nm1 = 1\nbogus = 2\n", 3, "rotor.bogus"),
    ("[gains]\nk1 = fast\n", 2, "gains.k1"),
    ("[nowhere]\n", 1, "nowhere"),
    ("[allocator]\nhysteresis = maybe\n", 2, "allocator.hysteresis"),
    ("[gains]\nk1 = 61\nk1 = 62\n", 3, "gains.k1"),
])
def test_errors_carry_line_and_key(text, line, key):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert info.value.line == line
    assert info.value.key == key


def test_event_validation():
    with pytest.raises(ConfigError):
        parse_config("[faults]\nevents = 4:75:125\n")
    with pytest.raises(ConfigError):
        parse_config("[faults]\nevents = 3:75.0001:125\n")
    with pytest.raises(ConfigError):
        parse_config("[faults]\nevents = 3:75\n")
    assert parse_config("[faults]\nevents =\n").faults.events == ()


def test_per_actuator_defaults_follow_count():
    cfg = parse_config("[actuators]\ncount = 4\n")
    assert cfg.high.l0 == (-1.0,) * 4
    assert len(cfg.low.k2) == 8
    with pytest.raises(ConfigError):
        parse_config("[actuators]\ncount = 2\n[gains]\nl0 = 1, 1, 1\n")


def test_overrides_revalidate():
    cfg = parse_config("")
    assert cfg.with_overrides(**{"wind.seed": 5}).seed == 5
    with pytest.raises(ConfigError):
        cfg.with_overrides(**{"wind.nothing": 5})


def test_comments_and_dotted_keys():
    cfg = parse_config("# comment\n[gains] \nk1 = 70   # inline\n")
    assert cfg.high.k1 == 70
    assert set(SCHEMA) >= {"rotor", "actuators", "faults", "wind", "gains", "estimator",
                           "allocator", "grid", "outputs", "scenario", "metrics"}
