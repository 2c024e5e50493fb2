"""Closed-loop assembly: builds the joint state, runs the compiled RK4
loop, and turns the result into a trajectory table and run metrics."""

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from faultsim import _kernel as K
from faultsim.allocator import Splitter
from faultsim.controller import control_input, filtered_error, low_level_error, probe_signal
from faultsim.core import IntegrationError, StateVector, Trajectory, integrate
from faultsim.estimator import (deviation_indicator, estimator_deriv, filter_deriv,
                                project_pd, regressor)
from faultsim.metrics import (RunMetrics, dissipation_residual, empirical_l2_gain,
                              exclusion_mask, recovery_time)
from faultsim.plant import (actuator_deriv, fault_params_at, phi, rotor_deriv,
                            solve_operating_point)
from faultsim.wind import interp_wind, read_wind_trace, wind_series

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
PER_ACTUATOR = ("x1", "x2", "u", "beta", "wn2_hat", "tzw_hat", "theta_check",
                "p_norm", "wn2", "tzw")


class RotorStallError(IntegrationError):
    pass


def state_names(n):
    names = ["z", "zI"]
    for i in range(1, n + 1):
        names += [f"x1_{i}", f"x2_{i}"]
    for i in range(1, n + 1):
        names += [f"x1f_{i}", f"x2f_{i}"]
    names += [f"uf_{i}" for i in range(1, n + 1)]
    for i in range(1, n + 1):
        names += [f"wn2_hat_{i}", f"tzw_hat_{i}"]
    for i in range(1, n + 1):
        names += [f"p11_{i}", f"p12_{i}", f"p21_{i}", f"p22_{i}"]
    return tuple(names)


def trajectory_columns(n):
    cols = ["w", "z", "rho", "z_tilde_I", "phi", "phi_ref", "e_norm", "q"]
    for i in range(1, n + 1):
        cols += [f"{name}_{i}" for name in PER_ACTUATOR]
    return tuple(cols)


def operating_point(cfg):
    return solve_operating_point(cfg.rotor, cfg.get("rotor.z0"), cfg.wind.w0, cfg.n)


def initial_state(cfg, op):
    """Operating point with filters settled and estimates at nominal."""
    n = cfg.n
    s = np.zeros(K.state_size(n))
    s[0] = op.z0
    s[2:2 + 2 * n] = op.x0
    s[2 + 2 * n:2 + 4 * n] = op.x0
    s[2 + 4 * n:2 + 5 * n] = op.y0
    for i, th in enumerate(cfg.nominal):
        s[2 + 5 * n + 2 * i] = th.wn2
        s[2 + 5 * n + 2 * i + 1] = th.two_zeta_wn
        s[2 + 7 * n + 4 * i] = cfg.estimator.p_init
        s[2 + 7 * n + 4 * i + 3] = cfg.estimator.p_init
    return s


def wind_knots(cfg):
    path = cfg.get("wind.trace")
    if path:
        return read_wind_trace(path)
    return wind_series(cfg.wind, cfg.grid.t0, cfg.grid.tf)


def kernel_inputs(cfg, op):
    v = cfg.values
    n = cfg.n
    p = np.zeros(K.N_PARAMS)
    p[K.Z0] = op.z0
    p[K.K1] = cfg.high.k1
    p[K.ETA] = cfg.high.eta
    p[K.AF] = cfg.estimator.af
    p[K.MU0] = cfg.estimator.mu0
    p[K.K0] = cfg.estimator.k0
    p[K.TAU] = cfg.allocator.tau
    p[K.TAU_OFF] = cfg.allocator.tau_off
    p[K.MODE] = {"splitter": K.MODE_SPLITTER, "uniform": K.MODE_UNIFORM,
                 "known": K.MODE_KNOWN}[cfg.allocator.mode]
    p[K.HYST] = 1.0 if cfg.allocator.hysteresis else 0.0
    p[K.PA] = cfg.estimator.probe_amplitude
    p[K.PW] = cfg.estimator.probe_frequency
    p[K.PD_FLOOR] = cfg.estimator.pd_floor
    p[K.WN2_0] = cfg.deviation.wn2_0
    p[K.TZW_0] = cfg.deviation.tzw_0
    p[K.D_W] = cfg.deviation.d_w
    p[K.D_Z] = cfg.deviation.d_z
    r = cfg.rotor
    p[K.SIGN] = r.coupling_sign
    p[K.M1], p[K.M2], p[K.M3], p[K.C], p[K.J], p[K.P0] = r.m1, r.m2, r.m3, r.c, r.J, r.P0
    p[K.Z_MIN] = v["rotor.z_min"]
    ev = np.zeros((len(cfg.faults.events), 6))
    for k, e in enumerate(cfg.faults.events):
        ev[k] = (e.actuator - 1, e.t_on, e.t_off, e.ramp, e.target.wn2, e.target.two_zeta_wn)
    flags = np.zeros(n)
    if cfg.allocator.mode == "known":
        for i in cfg.allocator.known_faulty:
            flags[i - 1] = 1.0
    wt, ww = wind_knots(cfg)
    return dict(
        p=p, y0=op.y0.copy(), l0=cfg.high.l0_array.copy(), k2=cfg.low.k2_array.copy(),
        nomw=np.array([th.wn2 for th in cfg.nominal]),
        nomz=np.array([th.two_zeta_wn for th in cfg.nominal]),
        ev=ev, wt=np.asarray(wt, float), ww=np.asarray(ww, float), flags0=flags)


def warm_up():
    """Load (or compile) the closed-loop kernel."""
    from faultsim.config import parse_config
    cfg = parse_config("[grid]\ntf = 0.01\n[faults]\nevents =\n")
    simulate_states(cfg)


def simulate_states(cfg, s0=None):
    """Run the compiled loop. Returns (times, states, aux)."""
    op = operating_point(cfg)
    if s0 is None:
        s0 = initial_state(cfg, op)
    ki = kernel_inputs(cfg, op)
    g = cfg.grid
    states, aux, status, step, hits = K.run(
        np.asarray(s0, float), g.t0, g.dt, g.n_steps, ki["p"], ki["y0"], ki["l0"],
        ki["k2"], ki["nomw"], ki["nomz"], ki["ev"], ki["wt"], ki["ww"], ki["flags0"])
    if hits:
        log.warning("gain matrix projected back to positive definite %d times", hits)
    if status != K.STATUS_OK:
        t = g.t0 + step * g.dt
        snap = states[-1]
        if status == K.STATUS_ROTOR:
            raise RotorStallError(
                f"rotor speed fell to {snap[0]:.4g} rad/s (limit "
                f"{cfg.get('rotor.z_min')}) at t={t:.4f}s", t=t, index=0, state=snap)
        bad = int(np.flatnonzero(~np.isfinite(snap))[0])
        raise IntegrationError(
            f"state {state_names(cfg.n)[bad]} became non-finite at t={t:.4f}s",
            t=t, index=bad, state=snap)
    return g.times(), states, aux


def build_trajectory(cfg, t, states, aux):
    n = cfg.n
    base = K.N_AUX_FIXED
    cols = {
        "w": aux[:, K.A_W], "z": states[:, 0], "rho": aux[:, K.A_RHO],
        "z_tilde_I": states[:, 1], "phi": aux[:, K.A_PHI],
        "phi_ref": aux[:, K.A_PHI_REF], "e_norm": aux[:, K.A_E_NORM], "q": aux[:, K.A_Q],
    }
    ip = 2 + 7 * n
    for i in range(n):
        j = i + 1
        P = states[:, ip + 4 * i:ip + 4 * i + 4]
        mid = 0.5 * (P[:, 0] + P[:, 3])
        off = 0.5 * (P[:, 1] + P[:, 2])
        rad = np.sqrt(0.25 * (P[:, 0] - P[:, 3]) ** 2 + off ** 2)
        cols[f"x1_{j}"] = states[:, 2 + 2 * i]
        cols[f"x2_{j}"] = states[:, 3 + 2 * i]
        cols[f"u_{j}"] = aux[:, base + i]
        cols[f"beta_{j}"] = aux[:, base + n + i]
        cols[f"wn2_hat_{j}"] = states[:, 2 + 5 * n + 2 * i]
        cols[f"tzw_hat_{j}"] = states[:, 3 + 5 * n + 2 * i]
        cols[f"theta_check_{j}"] = aux[:, base + 2 * n + i]
        cols[f"p_norm_{j}"] = np.maximum(np.abs(mid + rad), np.abs(mid - rad))
        cols[f"wn2_{j}"] = aux[:, base + 3 * n + i]
        cols[f"tzw_{j}"] = aux[:, base + 4 * n + i]
    return Trajectory(t, {k: cols[k] for k in trajectory_columns(n)})


def fault_windows(cfg):
    return [(e.t_on, e.t_off) for e in cfg.faults.events]


def compute_metrics(traj, cfg):
    v = cfg.values
    t = traj.t
    dt = cfg.grid.dt
    z0 = v["rotor.z0"]
    w_tilde = traj["w"] - cfg.wind.w0
    try:
        l2 = empirical_l2_gain(traj["rho"], w_tilde, dt)
    except ValueError:
        l2 = float("nan")
    windows = fault_windows(cfg)
    diss = dissipation_residual(t, traj["rho"], traj["z_tilde_I"], w_tilde, traj["e_norm"],
                                cfg.high.gamma, cfg.high.eta, v["metrics.e_tol"],
                                windows, v["metrics.guard"])
    zdev = traj["z"] - z0
    phi_err = traj["phi"] - traj["phi_ref"]
    events = sorted({tt for w in windows for tt in w})
    hold = v["metrics.hold"]
    z_rec = max((recovery_time(t, zdev, te, v["metrics.z_threshold"], hold) for te in events),
                default=0.0)
    phi_rec = max((recovery_time(t, phi_err, te, v["metrics.phi_threshold"], hold)
                   for te in events), default=0.0)
    stats = {}
    m = exclusion_mask(t, windows, v["metrics.guard"])
    if m.any():
        stats = {
            "z_max_dev": float(np.max(np.abs(zdev[m]))),
            "z_rms_dev": float(np.sqrt(np.mean(zdev[m] ** 2))),
            "phi_track_rms": float(np.sqrt(np.mean(phi_err[m] ** 2))),
        }
    return RunMetrics(
        l2_gain_emp=l2,
        max_dissipation_residual=diss.max_masked,
        dissipation_residual_all=diss.max_all,
        dissipation_samples=diss.n_masked,
        z_rms_dev=float(np.sqrt(np.mean(zdev ** 2))),
        z_max_dev=float(np.max(np.abs(zdev))),
        phi_track_rms=float(np.sqrt(np.mean(phi_err ** 2))),
        z_recovery_time=z_rec,
        phi_recovery_time=phi_rec,
        fault_window_stats=stats,
    )


def run_scenario(cfg):
    t, states, aux = simulate_states(cfg)
    traj = build_trajectory(cfg, t, states, aux)
    return traj, compute_metrics(traj, cfg)


class ReferenceLoop:
    """The closed loop written with the public per-module functions.

    Much slower than the compiled kernel; used to cross-check it.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self.n = cfg.n
        self.op = operating_point(cfg)
        self.wt, self.ww = wind_knots(cfg)
        self.splitter = Splitter(cfg.n, cfg.allocator)
        self.names = state_names(cfg.n)

    def unpack(self, s):
        n = self.n
        return (s[0], s[1], s[2:2 + 2 * n].reshape(n, 2), s[2 + 2 * n:2 + 4 * n].reshape(n, 2),
                s[2 + 4 * n:2 + 5 * n], s[2 + 5 * n:2 + 7 * n].reshape(n, 2),
                s[2 + 7 * n:].reshape(n, 2, 2))

    def indicators(self, theta):
        return np.array([deviation_indicator(th, self.cfg.deviation) for th in theta])

    def deriv(self, t, s):
        cfg, op, n = self.cfg, self.op, self.n
        z, zI, x, xf, uf, theta, P = self.unpack(s)
        w = float(interp_wind(self.wt, self.ww, t))
        rho = filtered_error(z, op.z0, zI, cfg.high.eta)
        alloc = self.splitter.allocate(self.indicators(theta))
        e = low_level_error(x.ravel(), op.x0, rho, cfg.high)
        u = control_input(e, alloc, op, cfg.low.k2_array)
        u = u + probe_signal(t, alloc, cfg.estimator.probe_amplitude,
                             cfg.estimator.probe_frequency)
        d = np.zeros_like(s)
        d[0] = rotor_deriv(z, w, phi(x[:, 0]), cfg.rotor)
        d[1] = z - op.z0
        af = cfg.estimator.af
        for i in range(n):
            th = fault_params_at(t, cfg.faults, cfg.nominal[i], i + 1)
            d[2 + 2 * i:4 + 2 * i] = actuator_deriv(x[i], u[i], th)
            dxf, duf = filter_deriv(x[i], u[i], xf[i], uf[i], af)
            d[2 + 2 * n + 2 * i:4 + 2 * n + 2 * i] = dxf
            d[2 + 4 * n + i] = duf
            Y, xc = regressor(xf[i], uf[i], x[i, 1], af)
            dth, dP = estimator_deriv(theta[i], P[i], Y, xc, cfg.estimator.mu0,
                                      cfg.estimator.k0)
            d[2 + 5 * n + 2 * i:4 + 5 * n + 2 * i] = dth
            d[2 + 7 * n + 4 * i:6 + 7 * n + 4 * i] = dP.ravel()
        return d

    def project(self, t, s):
        n = self.n
        s = s.copy()
        changed = False
        for i in range(n):
            sl = slice(2 + 7 * n + 4 * i, 6 + 7 * n + 4 * i)
            P, hit = project_pd(s[sl].reshape(2, 2), self.cfg.estimator.pd_floor)
            if hit:
                s[sl] = P.ravel()
                changed = True
        return s if changed else None

    def observe(self, t, s):
        self.splitter.commit(self.indicators(self.unpack(s)[5]))

    def run(self):
        s0 = StateVector(initial_state(self.cfg, self.op), self.names)
        return integrate(self.deriv, s0, self.cfg.grid, observer=self.observe,
                         project=self.project)


@dataclass
class SweepReport:
    rows: list = field(default_factory=list)      # (name, RunMetrics)
    failures: list = field(default_factory=list)  # (name, message)

    def __len__(self):
        return len(self.rows)

    def table(self):
        if not self.rows:
            return ""
        keys = list(self.rows[0][1].flat())
        lines = [",".join(["name"] + keys)]
        for name, m in self.rows:
            flat = m.flat()
            lines.append(",".join([name] + [repr(float(flat.get(k, float("nan"))))
                                            for k in keys]))
        return "\n".join(lines) + "\n"


def _sweep_one(cfg, out_dir):
    try:
        traj, metrics = run_scenario(cfg)
        if out_dir is not None:
            from faultsim.io import write_outputs
            write_outputs(cfg, traj, metrics, os.path.join(out_dir, cfg.name))
        return cfg.name, metrics, None
    except (IntegrationError, ValueError, OSError) as exc:
        return cfg.name, None, f"{type(exc).__name__}: {exc}"


def run_sweep(cfgs, workers=1, out_dir=None):
    """Run scenarios independently; failures are reported, not raised."""
    cfgs = list(cfgs)
    names = [c.name for c in cfgs]
    dupes = sorted({n for n in names if names.count(n) > 1})
    if dupes:
        raise ValueError(f"duplicate scenario names: {', '.join(dupes)}")
    report = SweepReport()
    if not cfgs:
        return report
    if workers <= 1:
        results = [_sweep_one(c, out_dir) for c in cfgs]
    else:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_sweep_one, cfgs, [out_dir] * len(cfgs)))
    for name, metrics, err in results:
        if err is None:
            report.rows.append((name, metrics))
        else:
            report.failures.append((name, err))
    return report
