"""Independent reference computations used by the tests.

Nothing here imports the package.  The frozen constants at the bottom were
produced by the functions above them and are re-derived in test_oracles.py.
"""

from __future__ import annotations

import math

import numpy as np


def zeta2_direct(n_terms: int = 1000) -> float:
    """``sum 1/n^2`` to ``n_terms - 1`` plus the Euler-Maclaurin tail from ``n_terms``."""
    n = n_terms
    head = math.fsum(1.0 / (k * k) for k in range(1, n))
    # sum_{k>=n} k^-2 = 1/n + 1/(2n^2) + 1/(6n^3) - 1/(30n^5) + 1/(42n^7) - ...
    tail = 1 / n + 1 / (2 * n**2) + 1 / (6 * n**3) - 1 / (30 * n**5) + 1 / (42 * n**7)
    return head + tail


def catalan_alternating(n_terms: int = 60) -> float:
    """``sum (-1)^k / (2k+1)^2`` by repeated averaging of the partial sums."""
    partial = np.cumsum([(-1) ** k / (2 * k + 1) ** 2 for k in range(n_terms)])
    s = partial.copy()
    while len(s) > 1:
        s = 0.5 * (s[1:] + s[:-1])
    return float(s[0])


def sum_of_two_squares_at_2() -> float:
    """``4 zeta(2) L(2, chi_4)`` from the two independent sums."""
    return 4.0 * zeta2_direct() * catalan_alternating()


def circle_gap_cdf(u: np.ndarray, power: int) -> np.ndarray:
    """CDF on ``[0, 2 pi)`` of the angle difference with density ``|e^{iu} - 1|^power``.

    Closed forms: ``power = 1`` integrates ``2 sin(u/2)``, ``power = 2``
    integrates ``2 - 2 cos u``.
    """
    u = np.asarray(u, dtype=float)
    if power == 1:
        return (1 - np.cos(u / 2)) / 2
    if power == 2:
        return (u - np.sin(u)) / (2 * math.pi)
    raise ValueError("power must be 1 or 2")


# frozen results
ZETA2 = 1.6449340668482264
CATALAN = 0.915965594177219
L_SUM_OF_SQUARES_AT_2 = 6.026812039691940
# lowest critical-line zeros of L(s, chi_4) and zeta (mpmath findroot / zetazero)
FIRST_ZERO_CHI4 = 6.020948904697597
FIRST_ZERO_ZETA = 14.134725141734693
