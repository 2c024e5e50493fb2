"""The splitter: maps deviation indicators to control-input weights."""

from dataclasses import dataclass

import numpy as np

MODES = ("splitter", "uniform", "known")


@dataclass(frozen=True)
class Allocation:
    beta: np.ndarray
    q: int
    tau: float
    faulty: np.ndarray

    @property
    def n(self):
        return self.beta.size


@dataclass(frozen=True)
class AllocatorConfig:
    tau: float = 0.02
    mode: str = "splitter"
    hysteresis: bool = False
    tau_off: float = 0.01
    known_faulty: tuple = ()   # 1-based indices used in "known" mode

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"allocator.mode must be one of {MODES}")
        if not 0 <= self.tau < 1:
            raise ValueError("allocator.tau must lie in [0, 1)")
        if self.hysteresis and not 0 <= self.tau_off <= self.tau:
            raise ValueError("allocator.tau_off must lie in [0, tau]")


def weights(theta_check, faulty):
    """Splitter weights for a given classification."""
    th = np.asarray(theta_check, dtype=float)
    faulty = np.asarray(faulty, dtype=bool)
    n = th.size
    q = int(faulty.sum())
    if q == 0 or q == n:
        return np.full(n, 1.0 / n)
    bonus = th[faulty].sum() / (n - q)
    return np.where(faulty, (1.0 - th) / n, (1.0 + bonus) / n)


def split(theta_check, tau=0.02):
    th = np.asarray(theta_check, dtype=float)
    if th.ndim != 1 or th.size < 1:
        raise ValueError("need a non-empty vector of indicators")
    if np.any(~np.isfinite(th)) or np.any(th < 0) or np.any(th > 1):
        raise ValueError(f"indicators must lie in [0, 1], got {th}")
    faulty = th > tau
    return Allocation(weights(th, faulty), int(faulty.sum()), tau, faulty)


def uniform(n):
    return Allocation(np.full(n, 1.0 / n), 0, 0.0, np.zeros(n, dtype=bool))


def simplex_check(beta, tol=1e-12):
    b = np.asarray(beta, dtype=float)
    return bool(np.all(b >= -tol) and np.all(b <= 1 + tol) and abs(b.sum() - 1.0) <= tol)


def excitation_deficit(beta):
    """Share of the uniform weight withheld from each agent, in [0, 1]."""
    b = np.asarray(beta, dtype=float)
    return np.maximum(0.0, 1.0 - b.size * b)


class Splitter:
    """Stateful allocator covering the three modes and optional hysteresis."""

    def __init__(self, n, cfg=AllocatorConfig()):
        self.n = n
        self.cfg = cfg
        self.faulty = np.zeros(n, dtype=bool)
        if cfg.mode == "known":
            for i in cfg.known_faulty:
                if not 1 <= i <= n:
                    raise ValueError(f"known faulty index {i} out of range")
            self.faulty[[i - 1 for i in cfg.known_faulty]] = True

    def classify(self, theta_check):
        th = np.asarray(theta_check, dtype=float)
        if self.cfg.mode == "known":
            return self.faulty.copy()
        if self.cfg.hysteresis:
            return np.where(self.faulty, th > self.cfg.tau_off, th > self.cfg.tau)
        return th > self.cfg.tau

    def allocate(self, theta_check):
        if self.cfg.mode == "uniform":
            return uniform(self.n)
        faulty = self.classify(theta_check)
        return Allocation(weights(theta_check, faulty), int(faulty.sum()),
                          self.cfg.tau, faulty)

    def commit(self, theta_check):
        """Latch the classification after an accepted step (hysteresis only)."""
        if self.cfg.hysteresis and self.cfg.mode == "splitter":
            self.faulty = self.classify(theta_check)
