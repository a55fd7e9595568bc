"""Vectorized tail integral ``G(s, y) = int_1^inf exp(-y t) t^(s-1) dt``.

``G(s, y) = y^(-s) Gamma(s, y)`` (upper incomplete gamma) and equals the
generalized exponential integral ``E_(1-s)(y)``.  Complex ``s`` and complex
``y`` with ``Re y > 0`` are supported, which the rotated-contour Epstein
evaluation needs.

Two evaluations are used:

* the Legendre continued fraction (modified Lentz), for ``|y|`` large
  compared with ``|s|`` or when ``s`` sits near a non-positive integer;
* ``Gamma(s) y^(-s) - exp(-y) sum_k y^k / (s)_(k+1)`` otherwise, whose terms
  shrink monotonically once ``|y| < |s + k|``.
"""

from __future__ import annotations

import numpy as np
from scipy.special import loggamma

_EPS = 1e-17
_TINY = 1e-300


def _continued_fraction(s: np.ndarray, y: np.ndarray, max_iter: int) -> np.ndarray:
    b = y + 1.0 - s
    c = np.full(b.shape, 1.0 / _TINY, dtype=complex)
    d = 1.0 / np.where(b == 0, _TINY, b)
    h = d.copy()
    active = np.ones(b.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        an = -i * (i - s[active])
        bb = b[active] + 2.0 * i
        dd = an * d[active] + bb
        dd = np.where(dd == 0, _TINY, dd)
        cc = bb + an / c[active]
        cc = np.where(cc == 0, _TINY, cc)
        dd = 1.0 / dd
        delta = dd * cc
        idx = np.flatnonzero(active)
        d[idx] = dd
        c[idx] = cc
        h[idx] *= delta
        done = np.abs(delta - 1.0) < _EPS * 4
        if np.all(done):
            active[idx] = False
            break
        active[idx[done]] = False
    return np.exp(-y) * h


def _series(s: np.ndarray, y: np.ndarray, max_iter: int) -> np.ndarray:
    term = 1.0 / s
    total = term.copy()
    active = np.ones(s.shape, dtype=bool)
    for k in range(1, max_iter + 1):
        idx = np.flatnonzero(active)
        t = term[idx] * y[idx] / (s[idx] + k)
        term[idx] = t
        total[idx] += t
        done = np.abs(t) < _EPS * np.abs(total[idx])
        active[idx[done]] = False
        if not active.any():
            break
    lead = np.exp(loggamma(s) - s * np.log(y))
    return lead - np.exp(-y) * total


def gamma_tail(s, y, max_iter: int = 5000) -> np.ndarray:
    """``int_1^inf exp(-y t) t^(s-1) dt`` elementwise (broadcast ``s`` against ``y``).

    Parameters
    ----------
    s : complex array_like
    y : complex array_like
        Must satisfy ``Re y > 0``.
    """
    s, y = np.broadcast_arrays(np.asarray(s, dtype=complex), np.asarray(y, dtype=complex))
    if np.any(y.real <= 0):
        raise ValueError("gamma_tail needs Re y > 0")
    shape = s.shape
    s = s.ravel()
    y = y.ravel()
    nearest = np.maximum(0.0, np.round(-s.real))
    near_pole = (s.real < 0.5) & (np.abs(s + nearest) < 0.3)
    use_cf = (np.abs(y) >= np.abs(s) + 1.0) | near_pole
    out = np.empty(s.shape, dtype=complex)
    if use_cf.any():
        out[use_cf] = _continued_fraction(s[use_cf], y[use_cf], max_iter)
    if (~use_cf).any():
        out[~use_cf] = _series(s[~use_cf], y[~use_cf], max_iter)
    return out.reshape(shape)
