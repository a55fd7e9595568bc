import math

import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from circlezeros.errors import ArityMismatch, DegenerateInput
from circlezeros.measures import (
    CoefficientMap,
    DensityKind,
    check_jacobian,
    coe_normalization,
    cue_normalization,
    finite_difference_jacobian,
    jacobian_complex_circle,
    jacobian_complex_general,
    jacobian_real,
    log_density,
    log_density_batch,
    random_configuration,
)
from circlezeros.polycore import ZeroConfiguration

angle = st.floats(0, 2 * math.pi, exclude_max=True)
half_angle = st.floats(0.01, math.pi - 0.01)


def test_complex_circle_examples():
    assert jacobian_complex_circle([0.0], 1) == 1
    assert jacobian_complex_circle([0.0, math.pi / 2], 2) == pytest.approx(1)
    assert jacobian_complex_circle([0.0, math.pi], 2) == pytest.approx(0, abs=1e-15)


def test_general_pair_example():
    rho, theta = 1.7, 0.4
    want = (1 / rho) * (rho + 1 / rho) * abs(1 / rho - rho)
    got = jacobian_complex_general(ZeroConfiguration((), ((rho, theta),)), 2)
    assert got == pytest.approx(want, rel=1e-13)
    fd = finite_difference_jacobian(CoefficientMap.COMPLEX_EVEN, [rho, theta], n_pairs=1)
    assert fd == pytest.approx(want, rel=1e-8)


def test_pair_collapsing_onto_circle_vanishes():
    vals = [jacobian_complex_general(ZeroConfiguration((0.5,), ((1 + e, 2.0),)), 3)
            for e in (1e-1, 1e-3, 1e-6)]
    assert vals[0] > vals[1] > vals[2] and vals[2] < 1e-5


def test_real_examples():
    assert jacobian_real([math.pi / 2]) == pytest.approx(2)
    for t in (0.3, 1.0, 2.5):
        assert jacobian_real([t]) == pytest.approx(2 * abs(math.sin(t)))
        assert jacobian_real([t], "odd") == pytest.approx(jacobian_real([t], "even"))
    t = np.array([0.7, 2.1])
    fd = finite_difference_jacobian(CoefficientMap.REAL, t)
    assert jacobian_real(t) == pytest.approx(fd, rel=1e-6)


@given(st.lists(half_angle, min_size=1, max_size=4, unique=True))
def test_real_matches_sine_product(t):
    t = np.array(t)
    m = len(t)
    j, k = np.triu_indices(m, 1)
    prod = np.prod(np.abs(np.sin(t))) * np.prod(np.abs(np.sin((t[k] - t[j]) / 2) * np.sin((t[k] + t[j]) / 2)))
    assert jacobian_real(t) == pytest.approx(2 ** (m * m) * prod, rel=1e-10)


def test_finite_difference_examples():
    assert finite_difference_jacobian(CoefficientMap.REAL, [math.pi / 2]) == pytest.approx(2, abs=1e-8)
    fd = finite_difference_jacobian(CoefficientMap.COMPLEX_EVEN, [0.0, math.pi / 2])
    assert fd == pytest.approx(1, abs=1e-8)


def test_finite_difference_second_order():
    rng = np.random.default_rng(5)
    point = random_configuration(rng, CoefficientMap.COMPLEX_ODD, 5, 1)
    pairs = ((point[0], point[1]),)
    exact = jacobian_complex_general(ZeroConfiguration(tuple(point[2:]), pairs), 5)
    e1 = abs(finite_difference_jacobian(CoefficientMap.COMPLEX_ODD, point, 1e-3, n_pairs=1) - exact)
    e2 = abs(finite_difference_jacobian(CoefficientMap.COMPLEX_ODD, point, 5e-4, n_pairs=1) - exact)
    assert 3.0 < e1 / e2 < 5.0


def test_finite_difference_rejects_degenerate_points():
    with pytest.raises(DegenerateInput):
        finite_difference_jacobian(CoefficientMap.COMPLEX_EVEN, [0.0, 1e-5], step=1e-5)
    with pytest.raises(DegenerateInput):
        finite_difference_jacobian(CoefficientMap.COMPLEX_ODD, [0.0, 1.0])


@pytest.mark.parametrize("n", range(2, 8))
def test_closed_forms_match_oracle_complex(n):
    rng = np.random.default_rng(100 + n)
    map_id = CoefficientMap.COMPLEX_ODD if n % 2 else CoefficientMap.COMPLEX_EVEN
    for m in range(n // 2 + 1):
        for _ in range(20):
            point = random_configuration(rng, map_id, n, m)
            assert check_jacobian(map_id, point, n, m).rel_error < 1e-5


@pytest.mark.parametrize("m", [1, 2, 3])
def test_closed_forms_match_oracle_real(m):
    rng = np.random.default_rng(200 + m)
    for n in (2 * m, 2 * m + 1):
        for _ in range(20):
            point = random_configuration(rng, CoefficientMap.REAL, n)
            assert check_jacobian(CoefficientMap.REAL, point, n).rel_error < 1e-5


@given(st.lists(angle, min_size=1, max_size=6), st.randoms())
def test_circle_jacobian_permutation_invariant_and_general_agrees(delta, rnd):
    n = len(delta)
    shuffled = list(delta)
    rnd.shuffle(shuffled)
    a = jacobian_complex_circle(delta, n)
    assert jacobian_complex_circle(shuffled, n) == pytest.approx(a, rel=1e-12, abs=1e-300)
    zc = ZeroConfiguration(tuple(delta))
    assert jacobian_complex_general(zc, n) == jacobian_complex_circle(zc.on_circle, n)


@given(st.lists(angle, min_size=2, max_size=6))
def test_cue_is_twice_coe(delta):
    n = len(delta)
    coe = log_density(DensityKind("COE", n), delta)
    cue = log_density(DensityKind("CUE", n), delta)
    if np.isfinite(coe):
        assert cue == pytest.approx(2 * coe, rel=1e-12, abs=1e-12)
    else:
        assert cue == -np.inf


@given(st.lists(half_angle, min_size=1, max_size=4))
def test_usp_is_twice_thm2(t):
    m = len(t)
    a = log_density(DensityKind("THM2_REAL", m), t)
    b = log_density(DensityKind("USP_HAAR", m), t)
    if np.isfinite(a):
        assert b == pytest.approx(2 * a, rel=1e-12, abs=1e-12)


def test_log_density_examples():
    assert log_density(DensityKind("COE", 2), [0, math.pi]) == pytest.approx(math.log(2))
    assert log_density(DensityKind("THM2_REAL", 1), [math.pi / 2]) == pytest.approx(math.log(2))
    assert log_density(DensityKind("COE", 3), [0.1, 0.1, 2.0]) == -np.inf
    with pytest.raises(ArityMismatch):
        log_density(DensityKind("COE", 3), [0.1, 0.2])


def test_thm2_diverges_at_edges_and_collisions():
    kind = DensityKind("THM2_REAL", 2)
    vals = [log_density(kind, [e, 2.0]) for e in (1e-2, 1e-5, 1e-9)]
    assert vals[0] > vals[1] > vals[2]
    assert log_density(kind, [0.0, 2.0]) == -np.inf
    assert log_density(kind, [1.0, 1.0]) == -np.inf
    assert log_density(kind, [1.0, math.pi]) == -np.inf


def test_thm1_even_density():
    kind = DensityKind("THM1_EVEN", 4)
    d = np.array([0.2, 1.3, 2.9, 4.4])
    w = np.exp(1j * d)
    e2 = sum(w[i] * w[j] for i in range(4) for j in range(i + 1, 4))
    coe = log_density(DensityKind("COE", 4), d)
    assert log_density(kind, d) == pytest.approx(math.log(abs(e2)) + coe)
    with pytest.raises(ValueError):
        DensityKind("THM1_EVEN", 3)


def test_batch_matches_scalar():
    rng = np.random.default_rng(1)
    x = rng.uniform(0, 2 * math.pi, (5, 4))
    kind = DensityKind("THM1_EVEN", 4)
    np.testing.assert_allclose(log_density_batch(kind, x), [log_density(kind, r) for r in x])


def test_normalizations_integrate_to_one():
    total, _ = integrate.quad(lambda u: 2 * abs(math.sin(u / 2)), 0, 2 * math.pi)
    assert coe_normalization(2) * 2 * math.pi * total == pytest.approx(1, rel=1e-10)
    total, _ = integrate.quad(lambda u: 4 * math.sin(u / 2) ** 2, 0, 2 * math.pi)
    assert cue_normalization(2) * 2 * math.pi * total == pytest.approx(1, rel=1e-10)
    # N = 1: the density is uniform on the circle
    assert coe_normalization(1) == pytest.approx(1 / (2 * math.pi))
