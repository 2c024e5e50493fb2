import math

import numpy as np
import pytest

from faultsim.metrics import (RunMetrics, compare_runs, dissipation_residual,
                              empirical_l2_gain, exclusion_mask, recovery_time, tracking_stats)


def test_l2_gain_basic():
    w = np.sin(np.linspace(0, 10, 1001))
    assert empirical_l2_gain(np.zeros(1001), w, 0.01) == 0.0
    assert empirical_l2_gain(0.5 * w, w, 0.01) == pytest.approx(0.5, rel=1e-14)
    with pytest.raises(ValueError):
        empirical_l2_gain(w, np.zeros(1001), 0.01)


def test_l2_gain_quadrature_against_closed_form():
    dt = 0.001
    t = np.arange(0, 1 + dt / 2, dt)
    # int_0^1 t^2 = 1/3, int_0^1 e^{2t} = (e^2 - 1)/2
    got = empirical_l2_gain(t, np.exp(t), dt)
    exact = math.sqrt((1 / 3) / ((math.e ** 2 - 1) / 2))
    assert got == pytest.approx(exact, rel=1e-6)


def test_dissipation_nonpositive_when_rho_zero():
    t = np.arange(0, 10, 0.01)
    w = np.sin(t)
    d = dissipation_residual(t, np.zeros_like(t), np.zeros_like(t), w, np.zeros_like(t),
                             gamma=0.3, eta=1.0)
    assert np.nanmax(d.residual) <= 0
    assert d.n_masked == t.size - 2


def test_dissipation_closed_form():
    # rho = a sin t, zI = 0: Vdot = a^2 sin t cos t
    t = np.arange(0, 5, 1e-3)
    a = 0.2
    rho = a * np.sin(t)
    w = np.cos(t)
    d = dissipation_residual(t, rho, np.zeros_like(t), w, np.zeros_like(t), 0.3, 1.0)
    exact = a * a * np.sin(t) * np.cos(t) - (0.09 * w ** 2 - rho ** 2)
    np.testing.assert_allclose(d.residual[1:-1], exact[1:-1], atol=1e-7)


def test_exclusion_windows():
    t = np.arange(0, 20, 1.0)
    m = exclusion_mask(t, [(5, 8)], guard=2)
    assert list(t[m]) == [5, 6, 7, 8, 9]
    d = dissipation_residual(t, np.zeros(20), np.zeros(20), np.ones(20), np.zeros(20),
                             0.3, 1.0, windows=[(5, 8)], guard=2)
    assert not d.mask[5:10].any()


def test_tracking_stats():
    t = np.linspace(0, 32 * math.pi, 100000, endpoint=False)
    assert tracking_stats(np.full(10, 1.267), 1.267) == {"rms": 0.0, "max_dev": 0.0}
    s = tracking_stats(1.267 + 0.01 * np.sin(t), 1.267)
    assert s["rms"] == pytest.approx(0.01 / math.sqrt(2), abs=1e-5)
    assert round(s["rms"], 5) == 0.00707


def test_recovery_time():
    t = np.arange(0, 30, 0.1)
    dev = np.where((t >= 10) & (t < 13), 1.0, 0.0)
    assert recovery_time(t, dev, 10.0, 0.5, hold=5.0) == pytest.approx(3.0)
    assert recovery_time(t, np.zeros_like(t), 10.0, 0.5) == 0.0


def _metrics(**kw):
    base = dict(l2_gain_emp=0.1, max_dissipation_residual=0.0, dissipation_residual_all=0.0,
                dissipation_samples=10, z_rms_dev=0.01, z_max_dev=0.02, phi_track_rms=1.0,
                z_recovery_time=0.0, phi_recovery_time=0.0)
    base.update(kw)
    return RunMetrics(**base)


def test_compare_runs_deltas_and_antisymmetry():
    pairs = [(0.1, 0.25), (0.02, 0.015), (1.0, 3.0)]
    a = _metrics(l2_gain_emp=pairs[0][0], z_max_dev=pairs[1][0], phi_track_rms=pairs[2][0])
    b = _metrics(l2_gain_emp=pairs[0][1], z_max_dev=pairs[1][1], phi_track_rms=pairs[2][1])
    rows = {r[0]: r for r in compare_runs(a, b)}
    assert rows["l2_gain_emp"][3] == 0.25 - 0.1
    assert rows["z_max_dev"][3] == 0.015 - 0.02
    assert rows["phi_track_rms"][3] == 2.0
    assert rows["phi_track_rms"][4] == 200.0
    back = {r[0]: r for r in compare_runs(b, a)}
    for key in rows:
        assert back[key][3] == -rows[key][3]
