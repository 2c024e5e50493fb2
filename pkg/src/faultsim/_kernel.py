"""Compiled closed-loop right-hand side and RK4 driver.

The same formulas are available, one piece at a time, in the plant,
estimator, allocator and controller modules; harness.ReferenceLoop wires
those together and tests check that both routes agree.

State layout for n actuators:
    z, zI, x[2n], xf[2n], uf[n], theta_hat[2n], P[4n]
"""

import math

import numpy as np
from numba import njit

# indices into the scalar parameter vector
Z0, K1, ETA, AF, MU0, K0, TAU, TAU_OFF, MODE, HYST, PA, PW, PD_FLOOR, \
    WN2_0, TZW_0, D_W, D_Z, SIGN, M1, M2, M3, C, J, P0, Z_MIN = range(25)
N_PARAMS = 25

MODE_SPLITTER, MODE_UNIFORM, MODE_KNOWN = 0, 1, 2

# auxiliary channels
A_W, A_RHO, A_PHI, A_PHI_REF, A_E_NORM, A_Q = range(6)
N_AUX_FIXED = 6          # followed by u, beta, theta_check, wn2, tzw per actuator

STATUS_OK, STATUS_NONFINITE, STATUS_ROTOR = 0, 1, 2


def state_size(n):
    return 2 + 11 * n


def aux_size(n):
    return N_AUX_FIXED + 5 * n


@njit(cache=True)
def wind_at(t, wt, ww):
    m = wt.size
    if t <= wt[0]:
        return ww[0]
    if t >= wt[m - 1]:
        return ww[m - 1]
    j = np.searchsorted(wt, t, side="right") - 1
    fr = (t - wt[j]) / (wt[j + 1] - wt[j])
    return ww[j] + fr * (ww[j + 1] - ww[j])


@njit(cache=True)
def evaluate(t, s, p, y0, l0, k2, nomw, nomz, ev, wt, ww, flags, d, aux):
    """Write ds/dt into d and output channels into aux."""
    n = y0.size
    ix, ixf, iuf, ith, ip = 2, 2 + 2 * n, 2 + 4 * n, 2 + 5 * n, 2 + 7 * n
    z = s[0]
    zI = s[1]
    z0 = p[Z0]
    k1 = p[K1]
    af = p[AF]
    w = wind_at(t, wt, ww)
    rho = (z - z0) + p[ETA] * zI

    # deviation indicators
    thc = np.empty(n)
    for i in range(n):
        v = 0.5 * (abs(s[ith + 2 * i] - p[WN2_0]) / p[D_W]
                   + abs(s[ith + 2 * i + 1] - p[TZW_0]) / p[D_Z])
        thc[i] = min(1.0, v)

    # splitter
    beta = np.full(n, 1.0 / n)
    mode = int(p[MODE])
    q = 0
    if mode != MODE_UNIFORM:
        fault = np.zeros(n, dtype=np.bool_)
        for i in range(n):
            if mode == MODE_KNOWN:
                fault[i] = flags[i] > 0.5
            elif p[HYST] > 0.5 and flags[i] > 0.5:
                fault[i] = thc[i] > p[TAU_OFF]
            else:
                fault[i] = thc[i] > p[TAU]
            if fault[i]:
                q += 1
        if q > 0 and q < n:
            sf = 0.0
            for i in range(n):
                if fault[i]:
                    sf += thc[i]
            bonus = sf / (n - q)
            for i in range(n):
                if fault[i]:
                    beta[i] = (1.0 - thc[i]) / n
                else:
                    beta[i] = (1.0 + bonus) / n

    # splitter-direction feedback on e = x - x0 + k1 l0 rho (angles only)
    sv = 0.0
    e2 = 0.0
    phi = 0.0
    phi_ref = 0.0
    for i in range(n):
        e1 = s[ix + 2 * i] - y0[i] + k1 * l0[i] * rho
        e_r = s[ix + 2 * i + 1]
        sv += k2[2 * i] * e1 + k2[2 * i + 1] * e_r
        e2 += e1 * e1 + e_r * e_r
        phi += s[ix + 2 * i] * s[ix + 2 * i]
        yr = y0[i] - k1 * l0[i] * rho
        phi_ref += yr * yr

    # rotor
    ratio = w / z
    ex = math.exp(-p[M2] * ratio)
    fv = p[C] * w ** 3 / (2.0 * p[J] * z) * (ratio - p[M1]) * ex - p[P0] / (p[J] * z)
    gv = p[C] * w ** 3 / (6.0 * p[J] * z) * p[M3] * ex
    d[0] = fv + p[SIGN] * gv * phi
    d[1] = z - z0

    mu0 = p[MU0]
    k0 = p[K0]
    probe = math.sin(p[PW] * t)
    for i in range(n):
        a = nomw[i]
        b = nomz[i]
        for k in range(ev.shape[0]):
            if int(ev[k, 0]) == i and t >= ev[k, 1] and t < ev[k, 2]:
                r = 1.0
                if ev[k, 3] > 0.0:
                    r = (t - ev[k, 1]) / ev[k, 3]
                if r >= 1.0:
                    a = ev[k, 4]
                    b = ev[k, 5]
                else:
                    a = nomw[i] + r * (ev[k, 4] - nomw[i])
                    b = nomz[i] + r * (ev[k, 5] - nomz[i])
        u = y0[i] - beta[i] * sv + p[PA] * max(0.0, 1.0 - n * beta[i]) * probe
        x1 = s[ix + 2 * i]
        x2 = s[ix + 2 * i + 1]
        d[ix + 2 * i] = x2
        d[ix + 2 * i + 1] = -a * x1 - b * x2 + a * u
        x1f = s[ixf + 2 * i]
        x2f = s[ixf + 2 * i + 1]
        uf = s[iuf + i]
        d[ixf + 2 * i] = af * (x1 - x1f)
        d[ixf + 2 * i + 1] = af * (x2 - x2f)
        d[iuf + i] = af * (u - uf)

        y1 = uf - x1f
        y2 = -x2f
        xc = af * (x2 - x2f)
        p11 = s[ip + 4 * i]
        p12 = s[ip + 4 * i + 1]
        p21 = s[ip + 4 * i + 2]
        p22 = s[ip + 4 * i + 3]
        ps = 0.5 * (p12 + p21)
        mid = 0.5 * (p11 + p22)
        rad = math.sqrt(0.25 * (p11 - p22) ** 2 + ps * ps)
        mu = mu0 * (1.0 - max(abs(mid + rad), abs(mid - rad)) / k0)
        inn = xc - (y1 * s[ith + 2 * i] + y2 * s[ith + 2 * i + 1])
        py1 = p11 * y1 + p12 * y2
        py2 = p21 * y1 + p22 * y2
        yp1 = y1 * p11 + y2 * p21
        yp2 = y1 * p12 + y2 * p22
        d[ith + 2 * i] = py1 * inn
        d[ith + 2 * i + 1] = py2 * inn
        d[ip + 4 * i] = mu * p11 - py1 * yp1
        off = 0.5 * ((mu * p12 - py1 * yp2) + (mu * p21 - py2 * yp1))
        d[ip + 4 * i + 1] = off
        d[ip + 4 * i + 2] = off
        d[ip + 4 * i + 3] = mu * p22 - py2 * yp2

        aux[N_AUX_FIXED + i] = u
        aux[N_AUX_FIXED + n + i] = beta[i]
        aux[N_AUX_FIXED + 2 * n + i] = thc[i]
        aux[N_AUX_FIXED + 3 * n + i] = a
        aux[N_AUX_FIXED + 4 * n + i] = b

    aux[A_W] = w
    aux[A_RHO] = rho
    aux[A_PHI] = phi
    aux[A_PHI_REF] = phi_ref
    aux[A_E_NORM] = math.sqrt(e2)
    aux[A_Q] = q


@njit(cache=True)
def _commit_flags(s, p, flags, n):
    # latch classification for the hysteresis band
    if int(p[MODE]) != MODE_SPLITTER or p[HYST] < 0.5:
        return
    ith = 2 + 5 * n
    for i in range(n):
        v = 0.5 * (abs(s[ith + 2 * i] - p[WN2_0]) / p[D_W]
                   + abs(s[ith + 2 * i + 1] - p[TZW_0]) / p[D_Z])
        v = min(1.0, v)
        if flags[i] > 0.5:
            flags[i] = 1.0 if v > p[TAU_OFF] else 0.0
        else:
            flags[i] = 1.0 if v > p[TAU] else 0.0


@njit(cache=True)
def _project_pd(s, floor, n):
    ip = 2 + 7 * n
    hits = 0
    for i in range(n):
        a = s[ip + 4 * i]
        b = 0.5 * (s[ip + 4 * i + 1] + s[ip + 4 * i + 2])
        c = s[ip + 4 * i + 3]
        lam = 0.5 * (a + c) - math.sqrt(0.25 * (a - c) ** 2 + b * b)
        if lam < floor:
            s[ip + 4 * i] += floor - lam
            s[ip + 4 * i + 3] += floor - lam
            hits += 1
    return hits


@njit(cache=True)
def run(s0, t0, dt, n_steps, p, y0, l0, k2, nomw, nomz, ev, wt, ww, flags0):
    """Fixed-step RK4 over n_steps. Returns (states, aux, status, step, pd_hits)."""
    dim = s0.size
    n = y0.size
    states = np.empty((n_steps + 1, dim))
    aux = np.empty((n_steps + 1, N_AUX_FIXED + 5 * n))
    flags = flags0.copy()
    s = s0.copy()
    states[0] = s
    k1 = np.empty(dim)
    k2s = np.empty(dim)
    k3 = np.empty(dim)
    k4 = np.empty(dim)
    tmp = np.empty(dim)
    scratch = np.empty(aux.shape[1])
    hits = 0
    h = 0.5 * dt
    for k in range(n_steps):
        t = t0 + k * dt
        evaluate(t, s, p, y0, l0, k2, nomw, nomz, ev, wt, ww, flags, k1, aux[k])
        for j in range(dim):
            tmp[j] = s[j] + h * k1[j]
        evaluate(t + h, tmp, p, y0, l0, k2, nomw, nomz, ev, wt, ww, flags, k2s, scratch)
        for j in range(dim):
            tmp[j] = s[j] + h * k2s[j]
        evaluate(t + h, tmp, p, y0, l0, k2, nomw, nomz, ev, wt, ww, flags, k3, scratch)
        for j in range(dim):
            tmp[j] = s[j] + dt * k3[j]
        # last stage sits just left of the next grid point
        evaluate(np.nextafter(t + dt, -np.inf), tmp, p, y0, l0, k2, nomw, nomz, ev,
                 wt, ww, flags, k4, scratch)
        for j in range(dim):
            s[j] = s[j] + (dt / 6.0) * (k1[j] + 2.0 * k2s[j] + 2.0 * k3[j] + k4[j])
        hits += _project_pd(s, p[PD_FLOOR], n)
        states[k + 1] = s
        bad = False
        for j in range(dim):
            if not np.isfinite(s[j]):
                bad = True
        if bad:
            return states[:k + 2], aux[:k + 2], STATUS_NONFINITE, k + 1, hits
        if s[0] <= p[Z_MIN]:
            return states[:k + 2], aux[:k + 2], STATUS_ROTOR, k + 1, hits
        _commit_flags(s, p, flags, n)
    evaluate(t0 + n_steps * dt, s, p, y0, l0, k2, nomw, nomz, ev, wt, ww, flags,
             k1, aux[n_steps])
    return states, aux, STATUS_OK, n_steps, hits
