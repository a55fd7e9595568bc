import cmath
import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circlezeros.errors import SymmetryViolation, UnitModulusViolation
from circlezeros.polycore import (
    SelfReciprocalPoly,
    ZeroConfiguration,
    elementary_symmetric,
    elementary_symmetric_all,
    from_coefficients,
    from_roots,
    to_trigonometric,
    vandermonde_abs,
)
from circlezeros.roots import circle_classify, find_roots

complexes = st.complex_numbers(max_magnitude=5, allow_nan=False, allow_infinity=False)
angles = st.floats(0, 2 * math.pi, exclude_max=True)


def separated(roots, gap=1e-3):
    j, k = np.triu_indices(len(roots), 1)
    return len(roots) < 2 or np.min(np.abs(roots[k] - roots[j])) > gap


@st.composite
def configurations(draw, max_degree=12):
    m = draw(st.integers(0, max_degree // 2))
    ell = draw(st.integers(0 if m else 1, max_degree - 2 * m))
    pairs = draw(st.lists(st.tuples(st.floats(1.05, 3.0), angles), min_size=m, max_size=m))
    on = draw(st.lists(angles, min_size=ell, max_size=ell))
    return ZeroConfiguration(tuple(on), tuple(pairs))


# -- elementary symmetric functions and Vandermonde -----------------------------


def test_elementary_symmetric_examples():
    assert elementary_symmetric(1, [2, 3]) == 5
    assert elementary_symmetric(2, [1, 2, 3]) == 11
    assert elementary_symmetric(0, [4, 5]) == 1
    assert elementary_symmetric(4, [1, 2, 3]) == 0


@given(st.lists(complexes, max_size=8), complexes, st.integers(1, 9))
def test_elementary_symmetric_pascal_recurrence(xs, y, n):
    lhs = elementary_symmetric(n, xs + [y])
    rhs = elementary_symmetric(n, xs) + y * elementary_symmetric(n - 1, xs)
    assert abs(lhs - rhs) <= 1e-9 * (1 + abs(lhs))


@given(st.lists(complexes, min_size=1, max_size=7))
def test_elementary_symmetric_table_matches_scalar(xs):
    table = elementary_symmetric_all(xs)
    for n, v in enumerate(table):
        assert abs(v - elementary_symmetric(n, xs)) <= 1e-9 * (1 + abs(v))


def test_vandermonde_examples():
    assert vandermonde_abs([cmath.exp(0.3j)]) == 1
    assert vandermonde_abs([]) == 1
    assert vandermonde_abs([1, -1]) == pytest.approx(2)
    assert vandermonde_abs([1, 1j, -1, -1j]) == pytest.approx(16)


@given(st.lists(complexes, min_size=2, max_size=6), st.randoms())
def test_vandermonde_permutation_invariant(xs, rnd):
    ys = list(xs)
    rnd.shuffle(ys)
    assert vandermonde_abs(ys) == pytest.approx(vandermonde_abs(xs), rel=1e-12)


@given(st.lists(complexes, min_size=1, max_size=5), st.integers(0, 4))
def test_vandermonde_vanishes_on_repeats(xs, i):
    xs = xs + [xs[i % len(xs)]]
    assert vandermonde_abs(xs) == 0


# -- construction and validation --------------------------------------------------


def test_from_coefficients_examples():
    p = from_coefficients([-1])
    assert p.degree == 1 and p.coeffs == (-1 + 0j,)
    q = from_coefficients([0, 1])
    assert q.is_real and q(1j) == pytest.approx(0)
    with pytest.raises(SymmetryViolation) as err:
        from_coefficients([1, -1])
    assert err.value.index == 1 and err.value.deviation == pytest.approx(2)
    with pytest.raises(UnitModulusViolation):
        from_coefficients([0, 1.5])


def test_from_coefficients_zeroes_tiny_imaginary_parts():
    p = from_coefficients([1 + 1e-13j, 1])
    assert p.is_real and all(c.imag == 0 for c in p.coeffs)


def test_from_roots_examples():
    p = from_roots(ZeroConfiguration((0.0, math.pi)))
    np.testing.assert_allclose(p.coeffs, [0, -1], atol=1e-15)
    q = from_roots(ZeroConfiguration((math.pi / 2, 3 * math.pi / 2)))
    np.testing.assert_allclose(q.coeffs, [0, 1], atol=1e-15)
    r = from_roots(ZeroConfiguration((), ((2.0, 0.0),)))
    np.testing.assert_allclose(r.coeffs, [-2.5, 1], atol=1e-15)


@given(configurations())
def test_from_roots_is_self_reciprocal(zc):
    p = from_roots(zc)
    a = np.array(p.coeffs)
    n = p.degree
    assert abs(abs(a[-1]) - 1) < 1e-10 * n
    for j in range(1, n):
        assert abs(a[n - j - 1] - a[-1] * np.conj(a[j - 1])) < 1e-10 * n * max(1, abs(a[j - 1]))


@given(configurations())
def test_round_trip_through_roots(zc):
    roots = zc.roots()
    if not separated(roots):
        return
    got = circle_classify(find_roots(from_roots(zc)), 1e-8 * zc.degree)
    assert (got.L, got.M) == (zc.L, zc.M)
    if zc.L:
        d = np.abs(np.subtract.outer(got.on_circle, zc.on_circle))
        d = np.minimum(d, 2 * math.pi - d)
        assert np.all(d.min(axis=1) < 1e-8)
    want = [rho * cmath.exp(1j * th) for rho, th in zc.off_pairs]
    for rho, th in got.off_pairs:
        z = rho * cmath.exp(1j * th)
        assert min(abs(z - w) / abs(w) for w in want) < 1e-8


def test_json_round_trip():
    p = from_roots(ZeroConfiguration((0.3, 1.1, 4.0), ((1.7, 2.2),)))
    text = p.to_json()
    assert set(json.loads(text)) == {"degree", "coeffs", "is_real"}
    assert SelfReciprocalPoly.from_json(text) == p


def test_zero_configuration_canonical_form():
    zc = ZeroConfiguration((7.0, -1.0), ((0.5, -0.2),))
    assert zc.on_circle == tuple(sorted([7.0 - 2 * math.pi, -1.0 + 2 * math.pi]))
    assert zc.off_pairs[0][0] == 2.0
    assert 0 <= zc.off_pairs[0][1] < 2 * math.pi
    assert zc.L + 2 * zc.M == zc.degree == 4


# -- trigonometric form -------------------------------------------------------


def _direct(p, branch, x):
    w = branch / cmath.sqrt(p.coeffs[-1])
    return w * np.exp(-0.5j * p.degree * x) * p(np.exp(1j * x))


def test_trig_examples():
    x = np.linspace(0, 2 * math.pi, 17)
    t = to_trigonometric(from_coefficients([0, 1]))
    np.testing.assert_allclose(t(x), 2 * np.cos(x), atol=1e-14)
    t = to_trigonometric(from_coefficients([0, -1]))
    np.testing.assert_allclose(np.abs(t(x)), np.abs(2 * np.sin(x)), atol=1e-14)
    np.testing.assert_allclose(t(x), _direct(from_coefficients([0, -1]), 1, x).real, atol=1e-14)
    t = to_trigonometric(from_coefficients([-1]))
    np.testing.assert_allclose(np.abs(t(x)), np.abs(2 * np.sin(x / 2)), atol=1e-14)


@given(configurations(max_degree=9), st.sampled_from([1, -1]), st.floats(0, 2 * math.pi))
def test_trig_form_matches_polynomial(zc, branch, x):
    p = from_roots(zc)
    t = to_trigonometric(p, branch)
    direct = _direct(p, branch, x)
    scale = 1 + np.sum(np.abs(p.coeffs))
    assert abs(direct.imag) < 1e-10 * scale
    assert abs(t(x) - direct.real) < 1e-10 * scale


@given(st.lists(st.floats(-3, 3), min_size=1, max_size=4), st.booleans())
def test_real_coefficients_give_even_function(half, odd):
    # a_N = 1 with mirrored real coefficients
    n = 2 * len(half) + (1 if odd else 0)
    a = np.zeros(n)
    a[: len(half)] = half
    for j in range(1, len(half) + 1):
        a[n - j - 1] = a[j - 1]
    a[-1] = 1.0
    if odd and n > 1:
        a[n // 2] = a[n // 2 - 1] if n // 2 - 1 >= 0 else 0
    try:
        p = from_coefficients(a)
    except SymmetryViolation:
        return
    t = to_trigonometric(p)
    assert all(d == 0 for d in t.d)
