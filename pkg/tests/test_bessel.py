import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special

from spectral_billiards.bessel import bessel, bessel_derivative, jn_all, jy_all


def test_j0_at_zero():
    assert bessel("J", 0, 0.0) == 1.0
    assert bessel("J", 3, 0.0) == 0.0


def test_first_zero():
    assert abs(bessel("J", 0, 2.404825557695773)) <= 1e-12


@given(st.integers(0, 60), st.floats(0.01, 120.0))
@settings(max_examples=200, deadline=None)
def test_j_against_scipy(m, x):
    ref = special.jv(m, x)
    assert bessel("J", m, x) == pytest.approx(ref, abs=1e-12 * max(1.0, abs(ref)) + 1e-13)


@given(st.integers(0, 30), st.floats(0.5, 120.0))
@settings(max_examples=200, deadline=None)
def test_y_against_scipy(m, x):
    ref = special.yv(m, x)
    if abs(ref) > 1e200:
        return
    assert bessel("Y", m, x) == pytest.approx(ref, rel=1e-11, abs=1e-13)


@given(st.integers(0, 25), st.floats(0.2, 100.0))
@settings(max_examples=150, deadline=None)
def test_wronskian(m, x):
    J = bessel("J", m, x)
    Y = bessel("Y", m, x)
    dJ = bessel_derivative("J", m, x)
    dY = bessel_derivative("Y", m, x)
    scale = max(1.0, abs(J * dY), abs(dJ * Y))
    assert J * dY - dJ * Y == pytest.approx(2 / (math.pi * x), abs=1e-10 * scale)


def test_vector_forms():
    x = np.array([0.5, 5.0, 50.0])
    J = jn_all(10, x)
    assert J.shape == (11, 3)
    assert J == pytest.approx(special.jv(np.arange(11)[:, None], x[None, :]), abs=1e-13)
    J2, Y2 = jy_all(5, x)
    assert Y2 == pytest.approx(special.yv(np.arange(6)[:, None], x[None, :]), rel=1e-11)


def test_bad_kind():
    with pytest.raises(ValueError):
        bessel("K", 0, 1.0)
