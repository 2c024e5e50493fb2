"""Rotor and pitch-actuator models, operating point and fault schedules."""

import math
from dataclasses import dataclass, field

import numpy as np


class SingularityError(ValueError):
    """Rotor speed at or below zero."""


class OperatingPointError(ValueError):
    """No pitch setting balances the rotor at the requested point."""


@dataclass(frozen=True)
class RotorParams:
    m1: float = 5.4184
    m2: float = 0.0682
    m3: float = 0.029
    c: float = 9.6e5
    J: float = 43784700.0
    P0: float = 5296610.0
    # -1 gives zdot = f - g*phi (pitch brakes the rotor)
    coupling_sign: float = -1.0

    def __post_init__(self):
        for name in ("m1", "m2", "m3", "c", "J", "P0"):
            if not getattr(self, name) > 0:
                raise ValueError(f"rotor.{name} must be positive")
        if self.coupling_sign not in (-1.0, 1.0):
            raise ValueError("rotor.coupling_sign must be -1 or 1")


@dataclass(frozen=True)
class ActuatorParams:
    wn2: float = 123.4321
    two_zeta_wn: float = 13.332

    def __post_init__(self):
        if not (self.wn2 > 0 and self.two_zeta_wn > 0):
            raise ValueError("actuator parameters must be positive")

    def as_array(self):
        return np.array([self.wn2, self.two_zeta_wn])

    def poles(self):
        """Roots of s^2 + two_zeta_wn*s + wn2."""
        return np.roots([1.0, self.two_zeta_wn, self.wn2])

    def max_real_pole(self):
        b, c = self.two_zeta_wn, self.wn2
        disc = b * b - 4.0 * c
        if disc < 0:
            return -0.5 * b
        return 0.5 * (-b + math.sqrt(disc))


def _check_z(z):
    if not z > 0:
        raise SingularityError(f"rotor speed must be positive, got {z!r}")


def f_aero(z, w, p=RotorParams()):
    """Drift term of the rotor equation."""
    _check_z(z)
    ratio = w / z
    return (p.c * w ** 3 / (2.0 * p.J * z) * (ratio - p.m1) * math.exp(-p.m2 * ratio)
            - p.P0 / (p.J * z))


def g_aero(z, w, p=RotorParams()):
    """Input gain multiplying the pitch coupling."""
    _check_z(z)
    return p.c * w ** 3 / (6.0 * p.J * z) * p.m3 * math.exp(-p.m2 * w / z)


def phi(y):
    y = np.asarray(y, dtype=float)
    return float(np.dot(y, y))


def rotor_deriv(z, w, phi_val, p=RotorParams()):
    return f_aero(z, w, p) + p.coupling_sign * g_aero(z, w, p) * phi_val


def actuator_deriv(x, u, theta):
    """Second-order pitch actuator with unit DC gain; x = [angle, rate]."""
    x1, x2 = x
    return np.array([x2, -theta.wn2 * x1 - theta.two_zeta_wn * x2 + theta.wn2 * u])


@dataclass(frozen=True)
class OperatingPoint:
    z0: float
    w0: float
    y0: np.ndarray
    x0: np.ndarray
    u0_offset: np.ndarray

    @property
    def n(self):
        return self.y0.size


def solve_operating_point(p=RotorParams(), z0=1.267, w0=22.0, n=3):
    """Equal pitch on every actuator such that the rotor is balanced."""
    if n < 1:
        raise ValueError("need at least one actuator")
    f = f_aero(z0, w0, p)
    g = g_aero(z0, w0, p)
    phi0 = -p.coupling_sign * f / g
    if not phi0 > 0:
        raise OperatingPointError(
            f"no real pitch balances the rotor at z0={z0}, w0={w0} (f={f:.6g})")
    y0 = np.full(n, math.sqrt(phi0 / n))
    x0 = np.zeros(2 * n)
    x0[0::2] = y0
    return OperatingPoint(z0=z0, w0=w0, y0=y0, x0=x0, u0_offset=-y0 ** 2)


@dataclass(frozen=True)
class FaultEvent:
    actuator: int          # 1-based
    t_on: float
    t_off: float
    target: ActuatorParams = ActuatorParams(11.6964, 3.078)
    ramp: float = 0.0      # 0 means abrupt

    def __post_init__(self):
        if not self.t_on < self.t_off:
            raise ValueError("fault event needs t_on < t_off")
        if self.actuator < 1:
            raise ValueError("actuator index is 1-based")
        if self.ramp < 0:
            raise ValueError("ramp time must be >= 0")


@dataclass(frozen=True)
class FaultSchedule:
    events: tuple = field(default_factory=tuple)

    def validate(self, n):
        by_act = {}
        for ev in self.events:
            if ev.actuator > n:
                raise ValueError(f"fault on actuator {ev.actuator} but only {n} exist")
            by_act.setdefault(ev.actuator, []).append(ev)
        for evs in by_act.values():
            evs.sort(key=lambda e: e.t_on)
            for a, b in zip(evs, evs[1:]):
                if b.t_on < a.t_off:
                    raise ValueError(f"overlapping faults on actuator {a.actuator}")


def fault_params_at(t, schedule, nominal, i):
    """Parameters of actuator i (1-based) at time t; events cover [t_on, t_off)."""
    for ev in schedule.events:
        if ev.actuator != i or not (ev.t_on <= t < ev.t_off):
            continue
        s = (t - ev.t_on) / ev.ramp if ev.ramp > 0 else 1.0
        if s >= 1.0:
            return ev.target
        return ActuatorParams(
            nominal.wn2 + s * (ev.target.wn2 - nominal.wn2),
            nominal.two_zeta_wn + s * (ev.target.two_zeta_wn - nominal.two_zeta_wn))
    return nominal
