"""Post-processing of simulated trajectories."""

import math
from dataclasses import asdict, dataclass, field

import numpy as np


def _trapz(y, dt):
    y = np.asarray(y, dtype=float)
    if y.size < 2:
        return 0.0
    return float(dt * (y.sum() - 0.5 * (y[0] + y[-1])))


def empirical_l2_gain(rho, w_tilde, dt):
    """sqrt(int rho^2 / int w_tilde^2) by the trapezoid rule."""
    den = _trapz(np.square(w_tilde), dt)
    if not den > 0:
        raise ValueError("disturbance has zero energy; gain is undefined")
    return math.sqrt(_trapz(np.square(rho), dt) / den)


def exclusion_mask(t, windows, guard):
    """True where t lies in any [t_on, t_off + guard)."""
    t = np.asarray(t)
    out = np.zeros(t.shape, dtype=bool)
    for t_on, t_off in windows:
        out |= (t >= t_on) & (t < t_off + guard)
    return out


@dataclass
class DissipationResult:
    residual: np.ndarray   # NaN at the two end samples
    mask: np.ndarray       # samples where the certificate applies
    max_masked: float
    max_all: float

    @property
    def n_masked(self):
        return int(self.mask.sum())


def dissipation_residual(t, rho, z_tilde_I, w_tilde, e_norm, gamma, eta,
                         e_tol=0.05, windows=(), guard=5.0):
    """Residual Vdot - (gamma^2 w^2 - rho^2) with V = rho^2/2 + eta^2 zI^2/2.

    Vdot uses central differences. The residual is only meaningful where
    the actuator tracking error is small, so the mask keeps samples with
    |e| < e_tol outside fault windows (plus a guard after each).
    """
    t = np.asarray(t, dtype=float)
    V = 0.5 * np.square(rho) + 0.5 * eta ** 2 * np.square(z_tilde_I)
    vdot = np.full(t.shape, np.nan)
    vdot[1:-1] = (V[2:] - V[:-2]) / (t[2:] - t[:-2])
    res = vdot - (gamma ** 2 * np.square(w_tilde) - np.square(rho))
    valid = np.isfinite(res) & ~exclusion_mask(t, windows, guard)
    mask = valid & (np.asarray(e_norm) < e_tol)
    max_masked = float(res[mask].max()) if mask.any() else math.nan
    max_all = float(res[valid].max()) if valid.any() else math.nan
    return DissipationResult(res, mask, max_masked, max_all)


def recovery_time(t, dev, t_event, threshold, hold=5.0):
    """Seconds after t_event until |dev| stays below threshold for `hold`
    seconds. Censored at the end of the record."""
    t = np.asarray(t)
    dev = np.abs(np.asarray(dev))
    after = t >= t_event
    ts, ds = t[after], dev[after]
    if ts.size == 0:
        return 0.0
    if np.all(ds < threshold):
        return 0.0
    # earliest start of a calm stretch of length `hold`
    calm_start = None
    for k in range(ts.size):
        if ds[k] < threshold:
            if calm_start is None:
                calm_start = k
            if ts[k] - ts[calm_start] >= hold:
                return float(ts[calm_start] - t_event)
        else:
            calm_start = None
    return float(ts[-1] - t_event)


def tracking_stats(z, z0, t=None, threshold=None, t_event=None, hold=5.0):
    dev = np.asarray(z, dtype=float) - z0
    out = {"rms": float(np.sqrt(np.mean(np.square(dev)))),
           "max_dev": float(np.max(np.abs(dev)))}
    if threshold is not None and t is not None and t_event is not None:
        out["recovery_time"] = recovery_time(t, dev, t_event, threshold, hold)
    return out


@dataclass
class RunMetrics:
    l2_gain_emp: float
    max_dissipation_residual: float
    dissipation_residual_all: float
    dissipation_samples: int
    z_rms_dev: float
    z_max_dev: float
    phi_track_rms: float
    z_recovery_time: float
    phi_recovery_time: float
    fault_window_stats: dict = field(default_factory=dict)

    def flat(self):
        d = asdict(self)
        windows = d.pop("fault_window_stats")
        for key, val in windows.items():
            d[f"fault_window.{key}"] = val
        return d


def compare_runs(a, b):
    """Rows (metric, a, b, b - a, percent change) over shared scalar metrics."""
    fa, fb = a.flat(), b.flat()
    rows = []
    for key in fa:
        if key not in fb:
            continue
        va, vb = float(fa[key]), float(fb[key])
        delta = vb - va
        pct = 100.0 * delta / abs(va) if va != 0 else math.nan
        rows.append((key, va, vb, delta, pct))
    return rows


def format_comparison(rows, label_a="a", label_b="b"):
    lines = [f"{'metric':<34} {label_a:>14} {label_b:>14} {'delta':>14} {'pct':>9}"]
    for key, va, vb, d, p in rows:
        lines.append(f"{key:<34} {va:>14.6g} {vb:>14.6g} {d:>14.6g} {p:>8.2f}%")
    return "\n".join(lines)
