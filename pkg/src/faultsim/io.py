"""Trajectory CSV, metrics report and SVG chart output."""

import math
import os
from xml.sax.saxutils import escape

import numpy as np

from faultsim.core import Trajectory
from faultsim.wind import RNG_ALGORITHM

SCHEMA_VERSION = 1
CSV_MAGIC = "# faultsim trajectory"


def _open(path, mode):
    try:
        return open(path, mode, newline="")
    except OSError as exc:
        raise OSError(f"{path}: {exc.strerror}") from None


def emit_csv(traj, path, meta=None):
    """Write every row with shortest round-trip float text."""
    header = f"{CSV_MAGIC} schema_version={SCHEMA_VERSION}"
    if meta:
        header += " " + " ".join(f"{k}={v}" for k, v in meta.items())
    names = ("t",) + traj.names
    data = np.column_stack([traj.t] + [traj[n] for n in traj.names])
    with _open(path, "w") as fh:
        fh.write(header + "\n")
        fh.write(",".join(names) + "\n")
        for row in data.tolist():
            fh.write(",".join(map(repr, row)) + "\n")


def read_csv(path):
    """Inverse of emit_csv. Returns (Trajectory, meta dict)."""
    with _open(path, "r") as fh:
        first = fh.readline().rstrip("\n")
        if not first.startswith(CSV_MAGIC):
            raise ValueError(f"{path}: not a trajectory file")
        meta = dict(tok.split("=", 1) for tok in first[len(CSV_MAGIC):].split() if "=" in tok)
        if int(meta.get("schema_version", -1)) != SCHEMA_VERSION:
            raise ValueError(f"{path}: unsupported schema version {meta.get('schema_version')}")
        names = fh.readline().rstrip("\n").split(",")
        if names[0] != "t":
            raise ValueError(f"{path}: first column must be t")
        rows = [list(map(float, line.split(","))) for line in fh if line.strip()]
    data = np.array(rows, dtype=float).reshape(-1, len(names))
    return Trajectory(data[:, 0], {n: data[:, i] for i, n in enumerate(names) if i}), meta


def emit_report(metrics, path, meta=None):
    with _open(path, "w") as fh:
        for k, v in (meta or {}).items():
            fh.write(f"{k} = {v}\n")
        for k, v in metrics.flat().items():
            fh.write(f"{k} = {v!r}\n")


def read_report(path):
    out = {}
    with _open(path, "r") as fh:
        for line in fh:
            if "=" in line:
                k, v = (s.strip() for s in line.split("=", 1))
                out[k] = v
    return out


# channel groups for plotting: group -> column prefixes (suffix _i per actuator)
GROUPS = {
    "beta": ("beta",),
    "pitch": ("x1",),
    "estimates": ("wn2_hat", "wn2"),
    "damping": ("tzw_hat", "tzw"),
    "theta_check": ("theta_check",),
    "rotor": ("z",),
    "rho": ("rho",),
    "phi": ("phi", "phi_ref"),
    "wind": ("w",),
    "input": ("u",),
}

PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b",
           "#17becf", "#7f7f7f")


def group_columns(traj, group):
    if group in GROUPS:
        cols = []
        for prefix in GROUPS[group]:
            if prefix in traj:
                cols.append(prefix)
            else:
                cols += [c for c in traj.names
                         if c.startswith(prefix + "_") and c[len(prefix) + 1:].isdigit()]
        return cols
    if group in traj:
        return [group]
    raise ValueError(f"unknown channel or group {group!r}")


def _ticks(lo, hi, count=5):
    if hi <= lo:
        hi = lo + 1.0
    raw = (hi - lo) / count
    mag = 10 ** math.floor(math.log10(raw))
    step = min((m * mag for m in (1, 2, 5, 10) if m * mag >= raw), default=raw)
    start = math.ceil(lo / step) * step
    return [start + k * step for k in range(int((hi - start) / step + 1e-9) + 1)]


def _decimate(t, y, max_points):
    if t.size <= max_points:
        return t, y
    idx = np.unique(np.linspace(0, t.size - 1, max_points).astype(int))
    return t[idx], y[idx]


def emit_svg(traj, channels, path, t_range=None, width=720, panel_height=220,
             max_points=2000):
    """One stacked panel per channel group, each with axes and a legend."""
    if t_range is not None:
        traj = traj.window(t_range[0], t_range[1] + 1e-12)
    if len(traj) == 0:
        raise ValueError("no samples in the requested time range")
    t = traj.t
    ml, mr, mt, mb = 70, 130, 28, 36
    pw, ph = width - ml - mr, panel_height - mt - mb
    parts = []
    for p_idx, group in enumerate(channels):
        cols = group_columns(traj, group)
        y0 = p_idx * panel_height
        ys = np.concatenate([traj[c] for c in cols])
        lo, hi = float(np.nanmin(ys)), float(np.nanmax(ys))
        if hi - lo < 1e-12:
            lo, hi = lo - 0.5, hi + 0.5
        pad = 0.05 * (hi - lo)
        lo, hi = lo - pad, hi + pad
        tlo, thi = float(t[0]), float(t[-1]) if t[-1] > t[0] else float(t[0]) + 1.0

        def sx(v):
            return ml + (v - tlo) / (thi - tlo) * pw

        def sy(v):
            return y0 + mt + (hi - v) / (hi - lo) * ph

        g = [f'<g class="panel" data-group="{escape(group)}">',
             f'<text x="{ml}" y="{y0 + 18}" font-size="13">{escape(group)}</text>',
             f'<rect x="{ml}" y="{y0 + mt}" width="{pw}" height="{ph}" fill="none" stroke="#444"/>']
        for tk in _ticks(lo, hi):
            yy = sy(tk)
            g.append(f'<line x1="{ml - 4}" y1="{yy:.2f}" x2="{ml}" y2="{yy:.2f}" stroke="#444"/>')
            g.append(f'<text x="{ml - 6}" y="{yy + 4:.2f}" font-size="10" '
                     f'text-anchor="end">{tk:.4g}</text>')
        for tk in _ticks(tlo, thi):
            xx = sx(tk)
            g.append(f'<line x1="{xx:.2f}" y1="{y0 + mt + ph}" x2="{xx:.2f}" '
                     f'y2="{y0 + mt + ph + 4}" stroke="#444"/>')
            g.append(f'<text x="{xx:.2f}" y="{y0 + mt + ph + 16}" font-size="10" '
                     f'text-anchor="middle">{tk:.4g}</text>')
        g.append(f'<text x="{ml + pw / 2}" y="{y0 + panel_height - 4}" font-size="10" '
                 f'text-anchor="middle">t [s]</text>')
        for k, col in enumerate(cols):
            colour = PALETTE[k % len(PALETTE)]
            tt, yy = _decimate(t, traj[col], max_points)
            pts = " ".join(f"{sx(a):.2f},{sy(b):.2f}" for a, b in zip(tt, yy))
            g.append(f'<polyline class="series" data-name="{escape(col)}" fill="none" '
                     f'stroke="{colour}" stroke-width="1.2" points="{pts}"/>')
            ly = y0 + mt + 12 + 16 * k
            g.append(f'<line x1="{ml + pw + 10}" y1="{ly}" x2="{ml + pw + 30}" y2="{ly}" '
                     f'stroke="{colour}" stroke-width="2"/>')
            g.append(f'<text x="{ml + pw + 34}" y="{ly + 4}" font-size="11">{escape(col)}</text>')
        g.append("</g>")
        parts.append("\n".join(g))
    height = panel_height * len(channels)
    svg = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
           f'viewBox="0 0 {width} {height}">\n'
           f'<rect width="100%" height="100%" fill="white"/>\n'
           + "\n".join(parts) + "\n</svg>\n")
    with _open(path, "w") as fh:
        fh.write(svg)


def run_meta(cfg):
    return {"scenario": cfg.name, "seed": cfg.seed, "rng": RNG_ALGORITHM,
            "dt": repr(cfg.grid.dt)}


def write_outputs(cfg, traj, metrics, out_dir):
    """CSV, report and plots for one scenario into out_dir."""
    from faultsim.config import dump_config
    os.makedirs(out_dir, exist_ok=True)
    meta = run_meta(cfg)
    emit_csv(traj.thin(cfg.get("outputs.csv_stride")), os.path.join(out_dir, "trajectory.csv"),
             meta)
    emit_report(metrics, os.path.join(out_dir, "metrics.txt"), meta)
    with _open(os.path.join(out_dir, "config.ini"), "w") as fh:
        fh.write(dump_config(cfg))
    groups = [g for g in cfg.get("outputs.svg") if g != "rotor"]
    if groups:
        emit_svg(traj, groups, os.path.join(out_dir, "channels.svg"))
    if "rotor" in cfg.get("outputs.svg"):
        emit_svg(traj, ["rotor"], os.path.join(out_dir, "rotor.svg"))
        for t_on, t_off in sorted((e.t_on, e.t_off) for e in cfg.faults.events)[:1]:
            lo = max(cfg.grid.t0, t_on - 5.0)
            hi = min(cfg.grid.tf, t_off + 5.0)
            emit_svg(traj, ["rotor"], os.path.join(out_dir, "rotor_fault_window.svg"),
                     t_range=(lo, hi))
