"""Scenario configuration: an INI-style file of [section] and key = value
lines, validated against a fixed schema."""

import math
from dataclasses import dataclass

from faultsim.allocator import MODES, AllocatorConfig
from faultsim.controller import (GainConfigError, HighLevelGains, LowLevelGains,
                                 check_k1, check_k2)
from faultsim.core import TimeGrid
from faultsim.estimator import DeviationConfig, EstimatorConfig
from faultsim.io import GROUPS
from faultsim.plant import ActuatorParams, FaultEvent, FaultSchedule, RotorParams
from faultsim.wind import WindConfig


class ConfigError(ValueError):
    def __init__(self, message, line=None, key=None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(key)
        prefix = f"[{', '.join(where)}] " if where else ""
        super().__init__(prefix + message)
        self.line = line
        self.key = key


class GainCheckError(ConfigError):
    pass


# (type, default); "floats"/"ints" are comma separated lists
SCHEMA = {
    "scenario": {
        "name": ("str", "default"),
        "strict": ("bool", False),
    },
    "grid": {
        "t0": ("float", 0.0),
        "tf": ("float", 200.0),
        "dt": ("float", 0.002),
    },
    "rotor": {
        "m1": ("float", 5.4184),
        "m2": ("float", 0.0682),
        "m3": ("float", 0.029),
        "c": ("float", 9.6e5),
        "J": ("float", 43784700.0),
        "P0": ("float", 5296610.0),
        "z0": ("float", 1.267),
        "coupling_sign": ("float", -1.0),
        "z_min": ("float", 0.05),
    },
    "actuators": {
        "count": ("int", 3),
        "wn2": ("float", 123.4321),
        "two_zeta_wn": ("float", 13.332),
        "fault_wn2": ("float", 11.6964),
        "fault_two_zeta_wn": ("float", 3.078),
    },
    "faults": {
        # actuator:t_on:t_off[:ramp], comma separated; empty for none
        "events": ("events", ((3, 75.0, 125.0, 0.0),)),
    },
    "wind": {
        "w0": ("float", 22.0),
        "w_min": ("float", 11.4),
        "w_max": ("float", 25.0),
        "tau_c": ("float", 10.0),
        "sigma": ("float", 0.8),
        "seed": ("int", 7),
        "dt": ("float", 0.01),
        "trace": ("str", ""),
    },
    "gains": {
        "k1": ("float", 61.0),
        "eta": ("float", 1.0),
        "l0": ("floats", (-1.0, -1.0, -1.0)),
        "gamma": ("float", 0.3),
        "alpha": ("float", 3.0),
        "h_bar_z": ("float", 2.54),
        "l_bar_w": ("float", 7.8),
        "k2": ("floats", (50.0, 1.0, 50.0, 1.0, 50.0, 1.0)),
        "alpha_l": ("float", 1.0),
        "lambda1": ("float?", None),
        "lambda2": ("float?", None),
    },
    "estimator": {
        "af": ("float", 20.0),
        "mu0": ("float", 50.0),
        "k0": ("float", 50.0),
        "p_init": ("float", 10.0),
        "pd_floor": ("float", 1e-8),
        "d_w": ("float", 111.7357),
        "d_z": ("float", 10.254),
        "probe_amplitude": ("float", 0.5),
        "probe_frequency": ("float", 3.0),
    },
    "allocator": {
        "mode": ("str", "splitter"),
        "tau": ("float", 0.02),
        "hysteresis": ("bool", False),
        "tau_off": ("float", 0.01),
        "known_faulty": ("ints", (3,)),
    },
    "metrics": {
        "e_tol": ("float", 0.05),
        "guard": ("float", 5.0),
        "z_threshold": ("float", 0.03),
        "phi_threshold": ("float", 100.0),
        "hold": ("float", 5.0),
    },
    "outputs": {
        "csv_stride": ("int", 5),
        "svg": ("strs", ("beta", "pitch", "estimates", "theta_check", "rotor")),
    },
}

_TRUE = {"true", "yes", "on", "1"}
_FALSE = {"false", "no", "off", "0"}


def _parse_events(text):
    out = []
    for tok in filter(None, (s.strip() for s in text.split(","))):
        parts = tok.split(":")
        if len(parts) not in (3, 4):
            raise ValueError(f"fault event {tok!r} is not actuator:t_on:t_off[:ramp]")
        ramp = float(parts[3]) if len(parts) == 4 else 0.0
        out.append((int(parts[0]), float(parts[1]), float(parts[2]), ramp))
    return tuple(out)


def _convert(kind, text):
    text = text.strip()
    if kind == "float":
        v = float(text)
        if not math.isfinite(v):
            raise ValueError("must be finite")
        return v
    if kind == "float?":
        return None if text == "" else _convert("float", text)
    if kind == "int":
        return int(text)
    if kind == "bool":
        low = text.lower()
        if low in _TRUE:
            return True
        if low in _FALSE:
            return False
        raise ValueError(f"expected a boolean, got {text!r}")
    if kind == "str":
        return text
    if kind == "floats":
        return tuple(_convert("float", s) for s in text.split(",") if s.strip())
    if kind == "ints":
        return tuple(int(s) for s in text.split(",") if s.strip())
    if kind == "strs":
        return tuple(s.strip() for s in text.split(",") if s.strip())
    if kind == "events":
        return _parse_events(text)
    raise AssertionError(kind)


def _format(kind, value):
    if value is None:
        return ""
    if kind in ("float", "float?"):
        if value == int(value) and abs(value) < 1e15:
            return str(int(value))
        return repr(value)
    if kind == "bool":
        return "true" if value else "false"
    if kind in ("floats", "ints"):
        return ", ".join(_format("float", float(v)) if kind == "floats" else str(v)
                         for v in value)
    if kind == "strs":
        return ", ".join(value)
    if kind == "events":
        toks = []
        for a, on, off, ramp in value:
            tok = f"{a}:{_format('float', on)}:{_format('float', off)}"
            if ramp:
                tok += f":{_format('float', ramp)}"
            toks.append(tok)
        return ", ".join(toks)
    return str(value)


def default_values():
    return {f"{sec}.{key}": default
            for sec, keys in SCHEMA.items() for key, (_, default) in keys.items()}


def _kind(path):
    sec, key = path.split(".", 1)
    return SCHEMA[sec][key][0]


@dataclass
class ScenarioConfig:
    values: dict
    rotor: RotorParams
    nominal: tuple
    fault_target: ActuatorParams
    faults: FaultSchedule
    wind: WindConfig
    high: HighLevelGains
    low: LowLevelGains
    estimator: EstimatorConfig
    deviation: DeviationConfig
    allocator: AllocatorConfig
    grid: TimeGrid

    @property
    def name(self):
        return self.values["scenario.name"]

    @property
    def strict(self):
        return self.values["scenario.strict"]

    @property
    def seed(self):
        return self.values["wind.seed"]

    @property
    def n(self):
        return self.values["actuators.count"]

    def get(self, path):
        return self.values[path]

    def with_overrides(self, **updates):
        """Copy with dotted keys replaced, e.g. with_overrides(**{"wind.seed": 3})."""
        vals = dict(self.values)
        for k, v in updates.items():
            if k not in vals:
                raise ConfigError("unknown key", key=k)
            vals[k] = v
        return build_config(vals)


def build_config(values, lines=None):
    """Validate raw values and assemble the component objects."""
    lines = lines or {}
    v = values

    def fail(msg, key):
        raise ConfigError(msg, lines.get(key), key)

    def make(key, fn):
        try:
            return fn()
        except (ValueError, TypeError) as exc:
            if isinstance(exc, ConfigError):
                raise
            fail(str(exc), key)

    n = v["actuators.count"]
    if n < 1:
        fail("must be >= 1", "actuators.count")
    rotor = make("rotor", lambda: RotorParams(
        v["rotor.m1"], v["rotor.m2"], v["rotor.m3"], v["rotor.c"], v["rotor.J"],
        v["rotor.P0"], v["rotor.coupling_sign"]))
    if not v["rotor.z0"] > v["rotor.z_min"] >= 0:
        fail("need z0 > z_min >= 0", "rotor.z0")
    nom = make("actuators.wn2", lambda: ActuatorParams(
        v["actuators.wn2"], v["actuators.two_zeta_wn"]))
    target = make("actuators.fault_wn2", lambda: ActuatorParams(
        v["actuators.fault_wn2"], v["actuators.fault_two_zeta_wn"]))
    grid = make("grid.dt", lambda: TimeGrid(v["grid.t0"], v["grid.tf"], v["grid.dt"]))

    events = []
    for a, on, off, ramp in v["faults.events"]:
        ev = make("faults.events", lambda: FaultEvent(a, on, off, target, ramp))
        for t in (on, off):
            if not grid.on_grid(t):
                fail(f"event time {t} is not on the integration grid", "faults.events")
        events.append(ev)
    faults = FaultSchedule(tuple(events))
    make("faults.events", lambda: faults.validate(n))

    wind = make("wind", lambda: WindConfig(
        v["wind.w0"], v["wind.w_min"], v["wind.w_max"], v["wind.tau_c"],
        v["wind.sigma"], v["wind.seed"], v["wind.dt"]))
    if v["wind.seed"] < 0:
        fail("must be >= 0", "wind.seed")

    l0 = v["gains.l0"]
    if len(l0) != n:
        fail(f"needs {n} entries", "gains.l0")
    k2 = v["gains.k2"]
    if len(k2) != 2 * n:
        fail(f"needs {2 * n} entries", "gains.k2")
    high = make("gains", lambda: HighLevelGains(
        v["gains.k1"], v["gains.eta"], tuple(l0), v["gains.gamma"], v["gains.alpha"],
        v["gains.h_bar_z"], v["gains.l_bar_w"]))
    low = make("gains", lambda: LowLevelGains(
        tuple(k2), v["gains.alpha_l"], v["gains.lambda1"], v["gains.lambda2"]))

    est = make("estimator", lambda: EstimatorConfig(
        v["estimator.af"], v["estimator.mu0"], v["estimator.k0"], v["estimator.p_init"],
        v["estimator.pd_floor"], v["estimator.probe_amplitude"],
        v["estimator.probe_frequency"]))
    dev = make("estimator", lambda: DeviationConfig(
        nom.wn2, nom.two_zeta_wn, v["estimator.d_w"], v["estimator.d_z"]))

    if v["allocator.mode"] not in MODES:
        fail(f"must be one of {', '.join(MODES)}", "allocator.mode")
    alloc = make("allocator", lambda: AllocatorConfig(
        v["allocator.tau"], v["allocator.mode"], v["allocator.hysteresis"],
        v["allocator.tau_off"], tuple(v["allocator.known_faulty"])))
    for i in alloc.known_faulty:
        if not 1 <= i <= n:
            fail(f"index {i} out of range", "allocator.known_faulty")

    for key in ("metrics.e_tol", "metrics.z_threshold", "metrics.phi_threshold"):
        if not v[key] > 0:
            fail("must be positive", key)
    for key in ("metrics.guard", "metrics.hold"):
        if v[key] < 0:
            fail("must be >= 0", key)
    if v["outputs.csv_stride"] < 1:
        fail("must be >= 1", "outputs.csv_stride")
    for group in v["outputs.svg"]:
        if group not in GROUPS:
            fail(f"unknown plot group {group!r}", "outputs.svg")

    cfg = ScenarioConfig(dict(v), rotor, (nom,) * n, target, faults, wind, high, low,
                         est, dev, alloc, grid)
    if v["scenario.strict"]:
        enforce_gain_checks(cfg, lines)
    return cfg


def gain_reports(cfg):
    k1 = check_k1(cfg.high)
    beta = [1.0 / cfg.n] * cfg.n
    k2 = check_k2(cfg.nominal, beta, cfg.low.k2_array, cfg.low.alpha_l)
    return k1, k2


def enforce_gain_checks(cfg, lines=None):
    lines = lines or {}
    k1, k2 = gain_reports(cfg)
    if not k1.satisfied:
        raise GainCheckError(
            f"k1 = {k1.k1:g} does not exceed the threshold {k1.threshold:.4f}",
            lines.get("gains.k1"), "gains.k1")
    if not k2.satisfied:
        raise GainCheckError(
            f"k2 condition fails: largest eigenvalue {k2.max_eig:.6g} > 0",
            lines.get("gains.k2"), "gains.k2")


def parse_config(text, strict=None):
    """Parse config text; unset keys take their defaults."""
    values = default_values()
    lines = {}
    section = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {raw.strip()!r}", lineno)
            section = line[1:-1].strip()
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, section)
            continue
        if "=" not in line:
            raise ConfigError(f"expected key = value, got {raw.strip()!r}", lineno)
        key, val = (s.strip() for s in line.split("=", 1))
        if "." in key and section is None:
            section, key = key.split(".", 1)
            if section not in SCHEMA:
                raise ConfigError(f"unknown section [{section}]", lineno, section)
        if section is None:
            raise ConfigError("key outside of any section", lineno, key)
        path = f"{section}.{key}"
        if key not in SCHEMA[section]:
            raise ConfigError("unknown key", lineno, path)
        if path in lines:
            raise ConfigError(f"duplicate key (first set on line {lines[path]})", lineno, path)
        try:
            values[path] = _convert(_kind(path), val)
        except ValueError as exc:
            raise ConfigError(f"type mismatch: {exc}", lineno, path) from None
        lines[path] = lineno
    if strict is not None:
        values["scenario.strict"] = bool(strict)
    # per-actuator defaults follow the actuator count
    n = values["actuators.count"]
    if "gains.l0" not in lines:
        values["gains.l0"] = (-1.0,) * n
    if "gains.k2" not in lines:
        values["gains.k2"] = (50.0, 1.0) * n
    try:
        return build_config(values, lines)
    except GainConfigError as exc:
        raise ConfigError(str(exc)) from None


def load_config(path, strict=None):
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from None
    return parse_config(text, strict=strict)


def dump_config(cfg):
    out = []
    for sec, keys in SCHEMA.items():
        out.append(f"[{sec}]")
        for key, (kind, _) in keys.items():
            out.append(f"{key} = {_format(kind, cfg.values[f'{sec}.{key}'])}")
        out.append("")
    return "\n".join(out)
