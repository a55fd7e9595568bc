import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st

from circlezeros.incgamma import gamma_tail


def reference(s, y):
    return complex(mpmath.expint(1 - mpmath.mpc(s), mpmath.mpc(y)))


@pytest.mark.parametrize("s,y", [
    (0.5, 1.0), (2.0, 0.3), (0.5 + 30j, 5.0), (0.5 - 80j, 40.0 * np.exp(-1.3j)),
    (-3.0 + 0.0j, 2.0), (-2.9 + 0.1j, 0.5), (1.5 + 10j, 0.01), (0.25 + 200j, 3.0 + 60j),
])
def test_matches_reference(s, y):
    got = complex(gamma_tail(s, y))
    assert got == pytest.approx(reference(s, y), rel=1e-11)


@given(st.floats(-5, 5), st.floats(-100, 100), st.floats(0.05, 80), st.floats(-1.4, 1.4))
def test_matches_reference_random(sr, si, r, arg):
    s = complex(sr, si)
    y = r * np.exp(1j * arg)
    ref = reference(s, y)
    assert abs(complex(gamma_tail(s, y)) - ref) <= 1e-9 * abs(ref) + 1e-300


def test_closed_form_s1():
    y = np.array([0.1, 1.0, 7.5])
    np.testing.assert_allclose(gamma_tail(1.0, y).real, np.exp(-y) / y, rtol=1e-13)


def test_broadcasting():
    out = gamma_tail(np.array([[0.5], [1.5]]), np.array([1.0, 2.0, 3.0]))
    assert out.shape == (2, 3)


def test_rejects_left_half_plane():
    with pytest.raises(ValueError):
        gamma_tail(0.5, -1.0)
