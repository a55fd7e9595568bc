"""Zeros of self-reciprocal polynomials and their circle classification.

Roots come from the eigenvalues of the companion matrix (LAPACK ``geev``
balances the matrix before the QR iteration) and are then polished by a few
simultaneous Aberth-Ehrlich sweeps.  Everything here works on stacks of
polynomials so the samplers can find thousands of root sets at once.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import ConvergenceFailure, UnpairedRoot
from .polycore import TWO_PI, SelfReciprocalPoly, ZeroConfiguration

_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class RootFindReport:
    """Raw roots plus diagnostics.

    ``residual_max`` is the largest backward error
    ``|p(r)| / sum_k |a_k| |r|^(N-k)`` over the roots, so it is comparable
    across degrees and coefficient scales.
    """

    raw_roots: np.ndarray
    residual_max: float
    iterations: int

    @property
    def degree(self) -> int:
        return len(self.raw_roots)


def companion_roots(coeffs: np.ndarray) -> np.ndarray:
    """Eigenvalues of the companion matrices of monic polynomials.

    ``coeffs`` has shape (B, N) holding ``a_1..a_N`` per row.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    b, n = coeffs.shape
    comp = np.zeros((b, n, n), dtype=complex)
    comp[:, 0, :] = -coeffs
    if n > 1:
        idx = np.arange(n - 1)
        comp[:, idx + 1, idx] = 1.0
    try:
        return np.linalg.eigvals(comp)
    except np.linalg.LinAlgError as exc:
        raise ConvergenceFailure(f"companion eigensolve failed: {exc}") from exc


def _newton_terms(full: np.ndarray, z: np.ndarray):
    """Newton step ``p/p'`` and backward error for each root.

    ``full`` is (B, N+1) descending, ``z`` is (B, N).  Roots outside the unit
    disk are handled through the reversed polynomial in ``1/z`` so that high
    powers never overflow.
    """
    n = full.shape[1] - 1
    outside = np.abs(z) > 1.0
    zz = np.where(outside, 1.0 / np.where(z == 0, 1.0, z), z)
    # evaluate p and p' at z (inside) or q and q' at u=1/z (outside)
    p = np.zeros_like(z)
    dp = np.zeros_like(z)
    scale = np.zeros(z.shape)
    az = np.abs(zz)
    rev = full[:, ::-1]
    for k in range(n + 1):
        ck = np.where(outside, rev[:, k : k + 1], full[:, k : k + 1])
        dp = dp * zz + p
        p = p * zz + ck
        scale = scale * az + np.abs(ck)
    with np.errstate(divide="ignore", invalid="ignore"):
        # outside: p(z) = z^N q(u), p'(z) = z^(N-1) (N q - u q')
        w_in = p / dp
        w_out = z * p / (n * p - zz * dp)
        w = np.where(outside, w_out, w_in)
        backward = np.abs(p) / np.where(scale > 0, scale, 1.0)
    return w, backward


def polish_roots(coeffs: np.ndarray, roots: np.ndarray, max_iter: int = 30):
    """Aberth-Ehrlich refinement of root estimates.

    An update is kept only where it lowers the backward error, so a
    badly conditioned (e.g. double) root can never be made worse.
    Returns ``(roots, backward_errors, iterations)``.
    """
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    z = np.atleast_2d(np.asarray(roots, dtype=complex)).copy()
    b, n = z.shape
    full = np.concatenate([np.ones((b, 1), dtype=complex), coeffs], axis=1)
    w, err = _newton_terms(full, z)
    it = 0
    if n == 1:
        return z, err, it
    eye = np.eye(n, dtype=bool)
    for it in range(1, max_iter + 1):
        diff = z[:, :, None] - z[:, None, :]
        with np.errstate(divide="ignore", invalid="ignore"):
            inv = np.where(eye, 0.0, 1.0 / np.where(eye, 1.0, diff))
            corr = w / (1.0 - w * inv.sum(axis=2))
        corr = np.where(np.isfinite(corr), corr, 0.0)
        z_new = z - corr
        w_new, err_new = _newton_terms(full, z_new)
        better = err_new < err
        z = np.where(better, z_new, z)
        w = np.where(better, w_new, w)
        err = np.where(better, err_new, err)
        small = np.abs(corr) <= 4 * _EPS * np.maximum(np.abs(z), 1.0)
        if not np.any(better & ~small):
            break
    return z, err, it


def find_roots_batch(coeffs: np.ndarray, polish: bool = True):
    """Roots of a stack of monic polynomials; returns ``(roots, backward, iterations)``."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    roots = companion_roots(coeffs)
    if not np.all(np.isfinite(roots)):
        raise ConvergenceFailure("eigensolve returned non-finite roots")
    if not polish:
        full = np.concatenate([np.ones((len(coeffs), 1), dtype=complex), coeffs], axis=1)
        return roots, _newton_terms(full, roots)[1], 0
    return polish_roots(coeffs, roots)


def find_roots(p: SelfReciprocalPoly) -> RootFindReport:
    """All ``N`` zeros of ``p`` with a backward-error diagnostic."""
    roots, err, it = find_roots_batch(np.asarray(p.coeffs, dtype=complex)[None, :])
    report = RootFindReport(roots[0], float(np.max(err)), it)
    if not np.isfinite(report.residual_max):
        raise ConvergenceFailure("non-finite residual after refinement", report)
    return report


def on_circle_mask(roots: np.ndarray, tol: float) -> np.ndarray:
    return np.abs(np.abs(roots) - 1.0) < tol


def _angle(z) -> np.ndarray:
    return np.mod(np.angle(z), TWO_PI)


def circle_classify(report: RootFindReport, tol: float | None = None) -> ZeroConfiguration:
    """Split roots into on-circle angles and reflected off-circle pairs.

    Roots with ``| |z| - 1 | < tol`` become angles.  The rest are matched
    outside-to-inside by nearest reflected partner, the distance between
    ``beta`` and ``1/conj(gamma)`` measured as
    ``|log|beta| + log|gamma|| + |arg beta - arg gamma|`` (scale free, so huge
    and tiny roots are compared on equal footing).
    """
    roots = np.asarray(report.raw_roots, dtype=complex)
    n = roots.size
    if tol is None:
        tol = 1e-8 * n
    on = on_circle_mask(roots, tol)
    angles = _angle(roots[on])
    off = roots[~on]
    outer = off[np.abs(off) > 1.0]
    inner = off[np.abs(off) < 1.0]
    if len(outer) != len(inner):
        lonely = outer if len(outer) > len(inner) else inner
        raise UnpairedRoot(complex(lonely[0]), math.inf)
    pairs = []
    if len(outer):
        lo = np.log(np.abs(outer))[:, None] + np.log(np.abs(inner))[None, :]
        da = np.angle(outer)[:, None] - np.angle(inner)[None, :]
        da = np.abs((da + math.pi) % TWO_PI - math.pi)
        cost = np.abs(lo) + da
        rows, cols = linear_sum_assignment(cost)
        for r, c in zip(rows, cols):
            if cost[r, c] > 10 * tol:
                raise UnpairedRoot(complex(outer[r]), float(cost[r, c]))
            rho = math.sqrt(abs(outer[r]) / abs(inner[c]))
            theta = float(np.angle(outer[r] + inner[c] / abs(inner[c]) ** 2))
            pairs.append((rho, theta))
    return ZeroConfiguration(tuple(angles), tuple(pairs), tolerance_used=tol)
