import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from faultsim.allocator import (AllocatorConfig, Splitter, excitation_deficit, simplex_check,
                                split)

unit = st.floats(0.0, 1.0, allow_nan=False)


def test_healthy_uniform():
    np.testing.assert_array_equal(split([0, 0, 0]).beta, [1 / 3] * 3)


def test_one_faulty():
    a = split([0.0, 0.0, 0.6], tau=0.02)
    expected = [(1 + 0.6 / 2) / 3, (1 + 0.6 / 2) / 3, 0.4 / 3]
    np.testing.assert_allclose(a.beta, expected, rtol=1e-15)
    np.testing.assert_allclose(a.beta, [0.43333333333333335, 0.43333333333333335,
                                        0.13333333333333333])
    assert a.q == 1 and list(a.faulty) == [False, False, True]


def test_all_faulty_fallback():
    np.testing.assert_array_equal(split([1, 1, 1]).beta, [1 / 3] * 3)


def test_at_threshold_is_healthy():
    assert split([0.02, 0, 0], tau=0.02).q == 0


def test_contract_violation():
    with pytest.raises(ValueError):
        split([0.0, 1.2, 0.0])
    with pytest.raises(ValueError):
        split([0.0, np.nan, 0.0])


def test_simplex_check():
    assert simplex_check([0.5, 0.5, 0])
    assert not simplex_check([0.5, 0.6, 0])
    assert not simplex_check([1.2, -0.2, 0])


def test_exhaustive_grid_n3():
    grid = np.linspace(0, 1, 21)
    for th in itertools.product(grid, repeat=3):
        assert simplex_check(split(th).beta)


@settings(max_examples=1000, deadline=None)
@given(st.lists(unit, min_size=1, max_size=8), st.floats(0.0, 0.99))
def test_simplex_property(th, tau):
    a = split(th, tau)
    assert simplex_check(a.beta)
    healthy = a.beta[~a.faulty]
    if 0 < a.q < len(th):
        assert np.all(healthy == healthy[0])


@settings(max_examples=300, deadline=None)
@given(st.lists(unit, min_size=2, max_size=6), st.data())
def test_monotone_in_faulty_indicator(th, data):
    th = np.array(th)
    i = data.draw(st.integers(0, th.size - 1))
    lo = max(th[i], 0.03)
    hi = data.draw(st.floats(lo, 1.0))
    a_th, b_th = th.copy(), th.copy()
    a_th[i], b_th[i] = lo, hi
    a, b = split(a_th), split(b_th)
    if a.q == th.size:
        return
    assert b.beta[i] <= a.beta[i] + 1e-15
    for j in range(th.size):
        if not a.faulty[j]:
            assert b.beta[j] >= a.beta[j] - 1e-15


@settings(max_examples=200, deadline=None)
@given(st.lists(unit, min_size=1, max_size=6), st.randoms())
def test_permutation_equivariant(th, rnd):
    perm = list(range(len(th)))
    rnd.shuffle(perm)
    a = split(th)
    b = split([th[k] for k in perm])
    np.testing.assert_allclose(b.beta, a.beta[perm], rtol=1e-15)


def test_modes():
    th = [0.0, 0.0, 0.5]
    np.testing.assert_array_equal(
        Splitter(3, AllocatorConfig(mode="uniform")).allocate(th).beta, [1 / 3] * 3)
    known = Splitter(3, AllocatorConfig(mode="known", known_faulty=(2,)))
    a = known.allocate([0.0, 0.01, 0.5])
    assert list(a.faulty) == [False, True, False]
    np.testing.assert_allclose(a.beta, [(1 + 0.005) / 3, 0.99 / 3, (1 + 0.005) / 3])


def test_hysteresis_band():
    sp = Splitter(3, AllocatorConfig(hysteresis=True, tau=0.02, tau_off=0.01))
    sp.commit([0, 0, 0.015])
    assert not sp.faulty[2]
    sp.commit([0, 0, 0.03])
    assert sp.faulty[2]
    assert sp.allocate([0, 0, 0.015]).q == 1
    sp.commit([0, 0, 0.005])
    assert not sp.faulty[2]


def test_excitation_deficit():
    np.testing.assert_array_equal(excitation_deficit([1 / 3] * 3), [0, 0, 0])
    np.testing.assert_allclose(excitation_deficit([0.45, 0.45, 0.1]), [0, 0, 0.7])
