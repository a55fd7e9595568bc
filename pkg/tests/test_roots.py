import cmath
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from circlezeros.errors import UnpairedRoot
from circlezeros.polycore import ZeroConfiguration, from_coefficients, from_roots
from circlezeros.roots import RootFindReport, circle_classify, find_roots, find_roots_batch


def _reexpand(roots):
    return np.poly(roots)[1:]


def test_find_roots_examples():
    r = find_roots(from_coefficients([0, 1]))
    np.testing.assert_allclose(sorted(r.raw_roots, key=lambda z: z.imag), [-1j, 1j], atol=1e-12)
    w = cmath.exp(1j * math.pi / 4)
    p = from_coefficients([-w])
    assert abs(find_roots(p).raw_roots[0] - w) < 1e-14
    r = find_roots(from_coefficients([-2.5, 1]))
    np.testing.assert_allclose(sorted(r.raw_roots.real), [0.5, 2.0], atol=1e-12)
    assert r.residual_max < 1e-14 and r.degree == 2


def test_roots_reproduce_coefficients():
    rng = np.random.default_rng(3)
    for n in range(2, 13):
        on = rng.uniform(0, 2 * math.pi, n)
        p = from_roots(ZeroConfiguration(tuple(on)))
        r = find_roots(p)
        got = _reexpand(r.raw_roots)
        want = np.array(p.coeffs)
        assert np.max(np.abs(got - want)) <= 1e-7 * n * np.max(np.abs(want))


def test_classify_examples():
    zc = circle_classify(RootFindReport(np.array([1j, -1j]), 0.0, 0), 1e-8)
    np.testing.assert_allclose(zc.on_circle, [math.pi / 2, 3 * math.pi / 2])
    assert zc.M == 0
    zc = circle_classify(RootFindReport(np.array([2.0, 0.5]), 0.0, 0), 1e-8)
    assert zc.off_pairs == ((2.0, 0.0),)
    zc = circle_classify(RootFindReport(np.array([1 + 1e-12j]), 0.0, 0), 1e-8)
    assert zc.on_circle[0] == pytest.approx(0, abs=1e-11) or zc.on_circle[0] > 2 * math.pi - 1e-11


def test_unpaired_root_raises():
    with pytest.raises(UnpairedRoot):
        circle_classify(RootFindReport(np.array([2.0, 0.4]), 0.0, 0), 1e-8)
    with pytest.raises(UnpairedRoot):
        circle_classify(RootFindReport(np.array([2.0, 1.0]), 0.0, 0), 1e-8)


def test_double_root_tolerated():
    r = find_roots(from_coefficients([-2, 1]))
    zc = circle_classify(r, 1e-6)
    ang = np.array(zc.on_circle)
    assert zc.M == 0 and zc.L == 2
    assert np.all(np.minimum(ang, 2 * math.pi - ang) < 1e-4)


@given(st.lists(st.floats(0, 2 * math.pi, exclude_max=True), min_size=1, max_size=12))
def test_no_false_off_circle_detection(on):
    zc = ZeroConfiguration(tuple(on))
    roots = zc.roots()
    j, k = np.triu_indices(len(roots), 1)
    if len(roots) > 1 and np.min(np.abs(roots[k] - roots[j])) <= 1e-3:
        return
    got = circle_classify(find_roots(from_roots(zc)), 1e-8 * len(on))
    assert got.M == 0 and got.L == len(on)


@given(st.integers(0, 2**32 - 1), st.integers(2, 10))
def test_classification_stable_under_tiny_perturbation(seed, n):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(0, n // 2 + 1))
    pairs = tuple((float(rng.uniform(1.3, 2.0)), float(rng.uniform(0, 2 * math.pi))) for _ in range(m))
    zc = ZeroConfiguration(tuple(rng.uniform(0, 2 * math.pi, n - 2 * m)), pairs)
    roots = zc.roots()
    j, k = np.triu_indices(len(roots), 1)
    if np.min(np.abs(roots[k] - roots[j])) <= 0.05:
        return
    tol = 1e-8 * n
    p = from_roots(zc)
    base = circle_classify(find_roots(p), tol)
    # symmetric perturbation keeps the polynomial self-reciprocal
    a = np.array(p.coeffs)
    da = 0.01 * tol * (rng.standard_normal(n) + 1j * rng.standard_normal(n)) / n
    a2 = a + da
    for jj in range(1, (n + 1) // 2):
        a2[n - jj - 1] = a[-1] * np.conj(a2[jj - 1])
    if n % 2 == 0:
        mid = n // 2 - 1
        a2[mid] = a[mid] + 0.01 * tol * rng.standard_normal() * a[-1] ** 0.5 / n
    a2[-1] = a[-1]
    roots2, _, it = find_roots_batch(a2[None, :])
    got = circle_classify(RootFindReport(roots2[0], 0.0, it), tol)
    assert (got.L, got.M) == (base.L, base.M)
