"""Numerical primitives: time grids, labelled state vectors, fixed-step RK4
and a small symmetric eigenvalue solver."""

from dataclasses import dataclass
from types import MappingProxyType

import numpy as np


class IntegrationError(RuntimeError):
    """Raised when a state or derivative stops being finite, or a
    physical guard trips during integration."""

    def __init__(self, message, t=None, index=None, state=None):
        super().__init__(message)
        self.t = t
        self.index = index
        self.state = None if state is None else np.array(state, dtype=float)


@dataclass(frozen=True)
class TimeGrid:
    t0: float
    tf: float
    dt: float

    def __post_init__(self):
        if not (self.dt > 0):
            raise ValueError("dt must be positive")
        if not (self.tf > self.t0):
            raise ValueError("tf must exceed t0")
        span = (self.tf - self.t0) / self.dt
        if abs(span - round(span)) > 1e-9 * max(1.0, span):
            raise ValueError("tf - t0 is not an integer multiple of dt")

    @property
    def n_steps(self):
        return int(round((self.tf - self.t0) / self.dt))

    def times(self):
        # multiply rather than accumulate to keep grid points exact
        return self.t0 + self.dt * np.arange(self.n_steps + 1)

    def on_grid(self, t, tol=1e-9):
        k = (t - self.t0) / self.dt
        return abs(k - round(k)) <= tol * max(1.0, abs(k))


class StateVector:
    """A float vector with an immutable name -> index map."""

    def __init__(self, values, names):
        values = np.array(values, dtype=float)
        names = tuple(names)
        if values.ndim != 1 or values.size != len(names):
            raise ValueError("values and names must have equal length")
        if len(set(names)) != len(names):
            raise ValueError("state names must be unique")
        self.values = values
        self.names = names
        self.index = MappingProxyType({n: i for i, n in enumerate(names)})

    def __getitem__(self, name):
        return self.values[self.index[name]]

    def __len__(self):
        return self.values.size

    def with_values(self, values):
        return StateVector(values, self.names)

    def __repr__(self):
        body = ", ".join(f"{n}={v:.6g}" for n, v in zip(self.names, self.values))
        return f"StateVector({body})"


class Trajectory:
    """Time-indexed table of named float columns."""

    def __init__(self, t, columns):
        self.t = np.asarray(t, dtype=float)
        self._cols = {}
        for name, col in columns.items():
            col = np.asarray(col, dtype=float)
            if col.shape != self.t.shape:
                raise ValueError(f"column {name!r} has shape {col.shape}")
            self._cols[name] = col

    @property
    def names(self):
        return tuple(self._cols)

    def __getitem__(self, name):
        if name == "t":
            return self.t
        return self._cols[name]

    def __contains__(self, name):
        return name == "t" or name in self._cols

    def __len__(self):
        return self.t.size

    def thin(self, stride):
        """Every `stride`-th row; the last row is always kept."""
        if stride < 1:
            raise ValueError("stride must be >= 1")
        idx = np.arange(0, len(self), stride)
        if idx[-1] != len(self) - 1:
            idx = np.append(idx, len(self) - 1)
        return Trajectory(self.t[idx], {k: v[idx] for k, v in self._cols.items()})

    def window(self, t_start, t_end):
        m = (self.t >= t_start) & (self.t < t_end)
        return Trajectory(self.t[m], {k: v[m] for k, v in self._cols.items()})


def _values(x):
    return x.values if isinstance(x, StateVector) else np.asarray(x, dtype=float)


def _check_finite(d, t, stage):
    if not np.all(np.isfinite(d)):
        bad = int(np.flatnonzero(~np.isfinite(d))[0])
        raise IntegrationError(
            f"non-finite derivative at t={t!r} (stage {stage}, index {bad})",
            t=t, index=bad, state=d)


def rk4_step(deriv, x, t, dt):
    """One classical Runge-Kutta step of dx/dt = deriv(t, x).

    The last stage is evaluated just left of t + dt, so piecewise inputs
    that switch exactly on a grid point take effect from the next step.
    """
    v = _values(x)
    t_end = np.nextafter(t + dt, -np.inf)
    k1 = np.asarray(deriv(t, v), dtype=float)
    _check_finite(k1, t, 1)
    k2 = np.asarray(deriv(t + 0.5 * dt, v + 0.5 * dt * k1), dtype=float)
    _check_finite(k2, t, 2)
    k3 = np.asarray(deriv(t + 0.5 * dt, v + 0.5 * dt * k2), dtype=float)
    _check_finite(k3, t, 3)
    k4 = np.asarray(deriv(t_end, v + dt * k3), dtype=float)
    _check_finite(k4, t, 4)
    out = v + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    if isinstance(x, StateVector):
        return x.with_values(out)
    return out


def integrate(deriv, x0, grid, observer=None, project=None):
    """Integrate over a TimeGrid with fixed-step RK4.

    `project(t, x)` may return a corrected state (or None) and is applied
    before the state is stored. `observer(t, x)` is called after every
    accepted step. Returns a Trajectory whose columns are the state names
    (x0 as StateVector) or s0, s1, ... otherwise.
    """
    names = x0.names if isinstance(x0, StateVector) else tuple(
        f"s{i}" for i in range(np.size(x0)))
    x = _values(x0).copy()
    times = grid.times()
    out = np.empty((times.size, x.size))
    out[0] = x
    for k in range(grid.n_steps):
        t = times[k]
        x = rk4_step(deriv, x, t, grid.dt)
        t_next = times[k + 1]
        if project is not None:
            fixed = project(t_next, x)
            if fixed is not None:
                x = np.asarray(fixed, dtype=float)
        out[k + 1] = x
        if observer is not None:
            observer(t_next, x)
    return Trajectory(times, {n: out[:, i] for i, n in enumerate(names)})


def jacobi_eigvalsh(a, tol=1e-10, max_sweeps=100):
    """Eigenvalues of a symmetric matrix by cyclic Jacobi rotations,
    returned in ascending order."""
    m = np.array(a, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("matrix must be square")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if not np.allclose(m, m.T, rtol=0.0, atol=1e-9 * max(1.0, np.abs(m).max())):
        raise ValueError("matrix is not symmetric")
    m = 0.5 * (m + m.T)
    n = m.shape[0]
    scale = max(1.0, np.linalg.norm(m))
    for sweep in range(max_sweeps + 1):
        off = np.sqrt(np.sum(np.tril(m, -1) ** 2))
        if off <= tol * scale:
            break
        if sweep == max_sweeps:
            raise ArithmeticError(f"Jacobi sweeps did not converge (off-diagonal {off:.3g})")
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = m[p, q]
                if apq == 0.0:
                    continue
                theta = (m[q, q] - m[p, p]) / (2.0 * apq)
                t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    t = 1.0
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                rp = m[p, :].copy()
                rq = m[q, :].copy()
                m[p, :] = c * rp - s * rq
                m[q, :] = s * rp + c * rq
                cp = m[:, p].copy()
                cq = m[:, q].copy()
                m[:, p] = c * cp - s * cq
                m[:, q] = s * cp + c * cq
    return np.sort(np.diag(m))
