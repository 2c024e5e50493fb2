"""Filtered regression and least-squares identification of actuator
parameters with bounded-gain forgetting."""

import math
from dataclasses import dataclass

import numpy as np

from faultsim.core import StateVector, integrate


@dataclass(frozen=True)
class EstimatorConfig:
    af: float = 20.0        # filter cutoff, rad/s
    mu0: float = 50.0       # maximum forgetting rate, 1/s
    k0: float = 50.0        # bound on the gain matrix norm
    p_init: float = 10.0    # P(0) = p_init * I
    pd_floor: float = 1e-8  # smallest admissible eigenvalue of P
    probe_amplitude: float = 0.5   # rad
    probe_frequency: float = 3.0   # rad/s

    def __post_init__(self):
        for name in ("af", "mu0", "k0", "p_init"):
            if not getattr(self, name) > 0:
                raise ValueError(f"estimator.{name} must be positive")
        if self.p_init > self.k0:
            raise ValueError("estimator.p_init must not exceed estimator.k0")
        if self.probe_amplitude < 0 or self.probe_frequency < 0:
            raise ValueError("probe amplitude and frequency must be >= 0")


@dataclass(frozen=True)
class DeviationConfig:
    wn2_0: float = 123.4321
    tzw_0: float = 13.332
    d_w: float = 111.7357
    d_z: float = 10.254

    def __post_init__(self):
        if min(self.wn2_0, self.tzw_0, self.d_w, self.d_z) <= 0:
            raise ValueError("deviation parameters must be positive")


def filter_deriv(x_raw, u_raw, x_f, u_f, af):
    """First-order low-pass af/(s + af) applied to actuator states and input."""
    if not af > 0:
        raise ValueError("af must be positive")
    return af * (np.asarray(x_raw) - x_f), af * (np.asarray(u_raw) - u_f)


def regressor(x_f, u_f, x2, af):
    """Row Y and target such that target = Y @ [wn2, two_zeta_wn]."""
    x1f, x2f = x_f
    y = np.array([u_f - x1f, -x2f])
    return y, af * (x2 - x2f)


def spectral_norm_sym2(P):
    a, b, d = P[0, 0], 0.5 * (P[0, 1] + P[1, 0]), P[1, 1]
    mid = 0.5 * (a + d)
    rad = math.sqrt(0.25 * (a - d) ** 2 + b * b)
    return max(abs(mid + rad), abs(mid - rad))


def min_eig_sym2(P):
    a, b, d = P[0, 0], 0.5 * (P[0, 1] + P[1, 0]), P[1, 1]
    return 0.5 * (a + d) - math.sqrt(0.25 * (a - d) ** 2 + b * b)


def forgetting_factor(P, mu0, k0):
    return mu0 * (1.0 - spectral_norm_sym2(np.asarray(P, dtype=float)) / k0)


def estimator_deriv(theta_hat, P, Y, x_check, mu0, k0):
    """Time derivatives of the estimate and of the gain matrix."""
    P = np.asarray(P, dtype=float)
    Y = np.asarray(Y, dtype=float)
    py = P @ Y
    innovation = x_check - Y @ theta_hat
    d_theta = py * innovation
    d_P = forgetting_factor(P, mu0, k0) * P - np.outer(py, Y @ P)
    return d_theta, 0.5 * (d_P + d_P.T)


def project_pd(P, floor=1e-8):
    """Shift P so its smallest eigenvalue is at least `floor`.
    Returns (P, shifted)."""
    lam = min_eig_sym2(P)
    if lam >= floor:
        return P, False
    return P + (floor - lam) * np.eye(2), True


def deviation_indicator(theta_hat, cfg=DeviationConfig()):
    """Mean normalized distance from nominal, clamped to [0, 1]."""
    v = 0.5 * (abs(theta_hat[0] - cfg.wn2_0) / cfg.d_w
               + abs(theta_hat[1] - cfg.tzw_0) / cfg.d_z)
    return min(1.0, v)


IDENT_NAMES = ("x1", "x2", "x1f", "x2f", "uf", "wn2_hat", "tzw_hat",
               "p11", "p12", "p21", "p22")


def ident_deriv(u_func, theta_true, cfg=EstimatorConfig()):
    """Right-hand side for one actuator plus its estimator, in IDENT_NAMES
    order. Scalar arithmetic keeps the pure-Python loop fast."""
    wn2, tzw = theta_true.wn2, theta_true.two_zeta_wn
    af, mu0, k0 = cfg.af, cfg.mu0, cfg.k0

    def deriv(t, s):
        x1, x2, x1f, x2f, uf, a, b, p11, p12, p21, p22 = s
        u = u_func(t)
        y1, y2 = uf - x1f, -x2f
        xc = af * (x2 - x2f)
        ps = 0.5 * (p12 + p21)
        mid = 0.5 * (p11 + p22)
        rad = math.sqrt(0.25 * (p11 - p22) ** 2 + ps * ps)
        mu = mu0 * (1.0 - max(abs(mid + rad), abs(mid - rad)) / k0)
        inn = xc - (y1 * a + y2 * b)
        py1 = p11 * y1 + p12 * y2
        py2 = p21 * y1 + p22 * y2
        yp1 = y1 * p11 + y2 * p21
        yp2 = y1 * p12 + y2 * p22
        off = 0.5 * ((mu * p12 - py1 * yp2) + (mu * p21 - py2 * yp1))
        return np.array([
            x2, -wn2 * x1 - tzw * x2 + wn2 * u,
            af * (x1 - x1f), af * (x2 - x2f), af * (u - uf),
            py1 * inn, py2 * inn,
            mu * p11 - py1 * yp1, off, off, mu * p22 - py2 * yp2])

    return deriv


def identify_actuator(u_func, theta_true, grid, cfg=EstimatorConfig(),
                      theta_init=None, x_init=(0.0, 0.0)):
    """Drive one actuator with u_func(t) and estimate its parameters online.

    Filters start at rest with the actuator: x_f = x(0) and u_f = x1(0),
    the input that would hold it there. Returns the Trajectory of all
    estimator and plant states.
    """
    if theta_init is None:
        theta_init = (DeviationConfig().wn2_0, DeviationConfig().tzw_0)
    x1, x2 = x_init
    s0 = StateVector([x1, x2, x1, x2, x1, theta_init[0], theta_init[1],
                      cfg.p_init, 0.0, 0.0, cfg.p_init], IDENT_NAMES)
    return integrate(ident_deriv(u_func, theta_true, cfg), s0, grid)
