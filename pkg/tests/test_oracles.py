import math

import mpmath
import pytest

import oracles


def test_zeta2_direct_matches_frozen():
    assert oracles.zeta2_direct() == pytest.approx(oracles.ZETA2, rel=1e-15)
    assert oracles.ZETA2 == pytest.approx(math.pi**2 / 6, rel=1e-15)


def test_catalan_alternating_matches_frozen():
    assert oracles.catalan_alternating() == pytest.approx(oracles.CATALAN, rel=1e-14)
    assert oracles.CATALAN == pytest.approx(float(mpmath.catalan), rel=1e-15)


def test_product_value_matches_frozen():
    assert oracles.sum_of_two_squares_at_2() == pytest.approx(oracles.L_SUM_OF_SQUARES_AT_2, rel=1e-14)


def test_first_zeros_match_mpmath():
    mpmath.mp.dps = 25
    s = mpmath.findroot(lambda s: mpmath.dirichlet(s, [0, 1, 0, -1]), mpmath.mpc(0.5, 6.02))
    assert float(s.imag) == pytest.approx(oracles.FIRST_ZERO_CHI4, abs=1e-12)
    assert float(mpmath.zetazero(1).imag) == pytest.approx(oracles.FIRST_ZERO_ZETA, abs=1e-12)


def test_gap_cdfs_end_at_one():
    for p in (1, 2):
        assert oracles.circle_gap_cdf(0.0, p) == pytest.approx(0.0)
        assert oracles.circle_gap_cdf(2 * math.pi, p) == pytest.approx(1.0)
