"""Rotor-speed control law, splitter-direction actuator feedback and
sufficient-condition checks on the two gains."""

import math
from dataclasses import dataclass, field

import numpy as np

from faultsim.core import jacobi_eigvalsh


class GainConfigError(ValueError):
    pass


@dataclass(frozen=True)
class HighLevelGains:
    k1: float = 61.0
    eta: float = 1.0
    l0: tuple = (-1.0, -1.0, -1.0)
    gamma: float = 0.3
    alpha: float = 3.0
    h_bar_z: float = 2.54
    l_bar_w: float = 7.8

    def __post_init__(self):
        for name in ("k1", "eta", "gamma", "alpha"):
            if not getattr(self, name) > 0:
                raise GainConfigError(f"gains.{name} must be positive")
        if self.h_bar_z < 0 or self.l_bar_w < 0:
            raise GainConfigError("gains.h_bar_z and gains.l_bar_w must be >= 0")

    @property
    def l0_array(self):
        return np.asarray(self.l0, dtype=float)


def _default_k2():
    return (50.0, 1.0) * 3


@dataclass(frozen=True)
class LowLevelGains:
    k2: tuple = field(default_factory=_default_k2)
    alpha_l: float = 1.0
    lambda1: float = None
    lambda2: float = None

    def __post_init__(self):
        if self.lambda1 is None and self.lambda2 is None:
            # split alpha_l evenly between the two terms of 1/l1 + l2
            object.__setattr__(self, "lambda1", 2.0 / self.alpha_l if self.alpha_l > 0 else None)
            object.__setattr__(self, "lambda2", 0.5 * self.alpha_l)
        elif self.lambda1 is None:
            object.__setattr__(self, "lambda1", 1.0 / (self.alpha_l - self.lambda2)
                               if self.alpha_l > self.lambda2 else None)
        elif self.lambda2 is None:
            object.__setattr__(self, "lambda2", self.alpha_l - 1.0 / self.lambda1)
        l1, l2 = self.lambda1, self.lambda2
        if l1 is None or l2 is None or not (l1 > 0 and l2 > 0):
            raise GainConfigError("lambda1, lambda2 must be positive with 1/lambda1 + lambda2 = alpha_l")
        if abs(1.0 / l1 + l2 - self.alpha_l) > 1e-12 * max(1.0, abs(self.alpha_l)):
            raise GainConfigError("lambda1, lambda2 violate 1/lambda1 + lambda2 = alpha_l")

    @property
    def k2_array(self):
        return np.asarray(self.k2, dtype=float)


def filtered_error(z, z0, z_tilde_I, eta):
    return (z - z0) + eta * z_tilde_I


def high_level_command(rho, gains, n=None):
    """Desired actuator-state offset; only angle entries are nonzero."""
    l0 = gains.l0_array
    n = l0.size if n is None else n
    out = np.zeros(2 * n)
    out[0::2] = -gains.k1 * l0 * rho
    return out


def low_level_error(x, x0, rho, gains):
    return np.asarray(x, dtype=float) - x0 - high_level_command(rho, gains, len(x) // 2)


def control_input(e, alloc, op, k2):
    """u = y0 - beta * (k2 . e)."""
    beta = np.asarray(alloc.beta, dtype=float)
    if beta.size != op.n or abs(beta.sum() - 1.0) > 1e-9 or np.any(beta < -1e-12):
        raise ValueError("allocation is not a valid weight vector")
    s = float(np.dot(k2, e))
    return op.y0 - beta * s


def probe_signal(t, alloc, amplitude, frequency):
    """Excitation returned to agents whose weight is below uniform."""
    deficit = np.maximum(0.0, 1.0 - alloc.beta.size * np.asarray(alloc.beta))
    return amplitude * deficit * math.sin(frequency * t)


@dataclass(frozen=True)
class K1Report:
    k1: float
    threshold: float
    satisfied: bool

    @property
    def margin(self):
        return self.k1 - self.threshold


def k1_threshold(gains):
    g = gains
    if not (g.alpha > 0 and g.eta > 0 and g.gamma > 0):
        raise GainConfigError("alpha, eta and gamma must be positive")
    return ((g.h_bar_z + 2.0 * g.eta) ** 2 / (4.0 * g.alpha * g.eta)
            + g.l_bar_w ** 2 / (4.0 * g.alpha * g.gamma ** 2)
            + 1.0 / g.alpha)


def check_k1(gains):
    thr = k1_threshold(gains)
    return K1Report(gains.k1, thr, gains.k1 > thr)


@dataclass(frozen=True)
class K2Report:
    max_eig: float
    satisfied: bool
    a_r: float


def input_matrix(actuators):
    """Block-diagonal B: each actuator contributes [0, wn2]^T."""
    n = len(actuators)
    B = np.zeros((2 * n, n))
    for i, th in enumerate(actuators):
        B[2 * i + 1, i] = th.wn2
    return B


def k2_matrix(actuators, beta, k2, alpha_l):
    a_r = max(th.max_real_pole() for th in actuators)
    v = input_matrix(actuators) @ np.asarray(beta, dtype=float)
    k2 = np.asarray(k2, dtype=float)
    M = (2.0 * a_r + alpha_l) * np.eye(v.size) - np.outer(v, k2) - np.outer(k2, v)
    return M, a_r


def check_k2(actuators, beta, k2, alpha_l, tol=1e-10, max_sweeps=100):
    M, a_r = k2_matrix(actuators, beta, k2, alpha_l)
    lam = jacobi_eigvalsh(M, tol=tol, max_sweeps=max_sweeps)
    return K2Report(float(lam[-1]), bool(lam[-1] <= 0.0), a_r)


def remark_k2(actuators, beta, epsilon):
    """k2 = epsilon * B0 @ beta, which keeps the rank-two term negative."""
    if not 0 < epsilon <= 2:
        raise GainConfigError("epsilon must lie in (0, 2]")
    return epsilon * (input_matrix(actuators) @ np.asarray(beta, dtype=float))
