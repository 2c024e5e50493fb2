"""Bounded Ornstein-Uhlenbeck wind speed and external wind traces."""

import math
from dataclasses import dataclass

import numpy as np

RNG_ALGORITHM = "numpy.random.PCG64/standard_normal"


@dataclass(frozen=True)
class WindConfig:
    w0: float = 22.0
    w_min: float = 11.4
    w_max: float = 25.0
    tau_c: float = 10.0
    sigma: float = 0.8
    seed: int = 7
    dt: float = 0.01   # sampling period of the wind process

    def __post_init__(self):
        if not (self.w_min < self.w0 < self.w_max):
            raise ValueError("wind bounds must satisfy w_min < w0 < w_max")
        if not self.tau_c > 0:
            raise ValueError("wind.tau_c must be positive")
        if not self.sigma >= 0:
            raise ValueError("wind.sigma must be >= 0")
        if not self.dt > 0:
            raise ValueError("wind.dt must be positive")


def make_rng(seed):
    return np.random.Generator(np.random.PCG64(seed))


def _coeffs(dt, cfg):
    a = math.exp(-dt / cfg.tau_c)
    # exact transition of dw = -(w - w0)/tau dt + sigma dW
    sd = cfg.sigma * math.sqrt(0.5 * cfg.tau_c * (1.0 - a * a))
    return a, sd


def wind_step(w, dt, cfg, rng):
    a, sd = _coeffs(dt, cfg)
    nxt = cfg.w0 + (w - cfg.w0) * a + sd * rng.standard_normal()
    return min(cfg.w_max, max(cfg.w_min, nxt))


def wind_series(cfg, t0, tf, w_init=None):
    """Samples at spacing cfg.dt covering [t0, tf]; returns (t, w)."""
    n = int(math.ceil((tf - t0) / cfg.dt - 1e-9))
    t = t0 + cfg.dt * np.arange(n + 1)
    a, sd = _coeffs(cfg.dt, cfg)
    noise = make_rng(cfg.seed).standard_normal(n)
    w = np.empty(n + 1)
    w[0] = cfg.w0 if w_init is None else w_init
    lo, hi, w0 = cfg.w_min, cfg.w_max, cfg.w0
    for k in range(n):
        v = w0 + (w[k] - w0) * a + sd * noise[k]
        w[k + 1] = hi if v > hi else (lo if v < lo else v)
    return t, w


def read_wind_trace(path):
    """Two-column CSV (t, w); a header line is allowed."""
    rows = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [s.strip() for s in line.split(",")]
            try:
                rows.append((float(parts[0]), float(parts[1])))
            except (ValueError, IndexError):
                if rows:
                    raise ValueError(f"{path}:{lineno}: bad wind sample {line!r}")
    if len(rows) < 2:
        raise ValueError(f"{path}: wind trace needs at least two samples")
    arr = np.array(rows)
    if np.any(np.diff(arr[:, 0]) <= 0):
        raise ValueError(f"{path}: wind trace times must increase")
    return arr[:, 0], arr[:, 1]


def interp_wind(t_knots, w_knots, t):
    """Linear interpolation, held constant outside the knots."""
    return np.interp(t, t_knots, w_knots)
