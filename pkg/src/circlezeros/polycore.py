"""Self-reciprocal polynomials, symmetric functions and trigonometric form.

A monic polynomial ``f(z) = z^N + a_1 z^(N-1) + ... + a_N`` is stored by its
coefficients ``a_1..a_N`` (the leading 1 is implicit).  It is self-reciprocal
when ``|a_N| = 1`` and ``a_(N-j) = a_N * conj(a_j)``; its zeros are then either
on the unit circle or come in pairs ``beta, 1/conj(beta)``.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import SymmetryViolation, UnitModulusViolation

TWO_PI = 2.0 * math.pi


def elementary_symmetric_all(xs) -> np.ndarray:
    """Return ``[e_0, e_1, ..., e_k]`` of the values ``xs`` (``k = len(xs)``).

    Built with the one-pass table recurrence
    ``e_n(xs + [y]) = e_n(xs) + y * e_(n-1)(xs)``.
    """
    xs = np.asarray(xs, dtype=complex).ravel()
    e = np.zeros(len(xs) + 1, dtype=complex)
    e[0] = 1.0
    for i, x in enumerate(xs):
        e[1 : i + 2] = e[1 : i + 2] + x * e[: i + 1]
    return e


def elementary_symmetric_batch(xs: np.ndarray) -> np.ndarray:
    """Row-wise :func:`elementary_symmetric_all` for an array of shape (B, k)."""
    xs = np.asarray(xs, dtype=complex)
    b, k = xs.shape
    e = np.zeros((b, k + 1), dtype=complex)
    e[:, 0] = 1.0
    for i in range(k):
        e[:, 1 : i + 2] = e[:, 1 : i + 2] + xs[:, i : i + 1] * e[:, : i + 1]
    return e


def elementary_symmetric(n: int, xs: Sequence[complex]) -> complex:
    """The n-th elementary symmetric function of ``xs``.

    ``e_0 = 1`` and ``e_n = 0`` for ``n > len(xs)``.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    xs = list(xs)
    if n > len(xs):
        return 0j
    e = [0j] * (n + 1)
    e[0] = 1 + 0j
    for i, x in enumerate(xs):
        for k in range(min(n, i + 1), 0, -1):
            e[k] += x * e[k - 1]
    return e[n]


def vandermonde_abs(xs: Sequence[complex]) -> float:
    """``prod_{j<k} |x_k - x_j|``; 1 for fewer than two values."""
    xs = np.asarray(xs, dtype=complex).ravel()
    if xs.size < 2:
        return 1.0
    j, k = np.triu_indices(xs.size, 1)
    return float(np.prod(np.abs(xs[k] - xs[j])))


def log_vandermonde_abs(xs: Sequence[complex]) -> float:
    """Logarithm of :func:`vandermonde_abs`, ``-inf`` on repeated values."""
    xs = np.asarray(xs, dtype=complex).ravel()
    if xs.size < 2:
        return 0.0
    j, k = np.triu_indices(xs.size, 1)
    with np.errstate(divide="ignore"):
        return float(np.sum(np.log(np.abs(xs[k] - xs[j]))))


@dataclass(frozen=True)
class SelfReciprocalPoly:
    """Monic self-reciprocal polynomial; ``coeffs`` holds ``a_1..a_N``."""

    degree: int
    coeffs: tuple
    is_real: bool = False

    @property
    def leading_last(self) -> complex:
        """The constant term ``a_N`` (unit modulus)."""
        return self.coeffs[-1]

    def full_coeffs(self) -> np.ndarray:
        """Coefficients ``[1, a_1, ..., a_N]`` in descending powers."""
        return np.concatenate(([1.0 + 0j], np.asarray(self.coeffs, dtype=complex)))

    def __call__(self, z):
        return np.polyval(self.full_coeffs(), z)

    def to_dict(self) -> dict:
        return {
            "degree": self.degree,
            "coeffs": [[float(c.real), float(c.imag)] for c in self.coeffs],
            "is_real": self.is_real,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict, tol: float = 1e-10) -> "SelfReciprocalPoly":
        coeffs = [complex(re, im) for re, im in d["coeffs"]]
        if len(coeffs) != d["degree"]:
            raise ValueError("degree does not match number of coefficients")
        return from_coefficients(coeffs, tol)

    @classmethod
    def from_json(cls, text: str, tol: float = 1e-10) -> "SelfReciprocalPoly":
        return cls.from_dict(json.loads(text), tol)


@dataclass(frozen=True)
class ZeroConfiguration:
    """Zeros split into on-circle angles and off-circle reflected pairs.

    Each pair ``(rho, theta)`` with ``rho > 1`` stands for the two zeros
    ``rho e^{i theta}`` and ``e^{i theta} / rho``.
    """

    on_circle: tuple = ()
    off_pairs: tuple = ()
    tolerance_used: float = 0.0

    def __post_init__(self):
        angles = tuple(sorted(float(d) % TWO_PI for d in self.on_circle))
        pairs = []
        for rho, theta in self.off_pairs:
            rho, theta = float(rho), float(theta) % TWO_PI
            if rho <= 0:
                raise ValueError("pair modulus must be positive")
            if rho < 1:
                rho = 1.0 / rho
            if rho == 1:
                raise ValueError("an off-circle pair cannot have modulus 1")
            pairs.append((rho, theta))
        object.__setattr__(self, "on_circle", angles)
        object.__setattr__(self, "off_pairs", tuple(sorted(pairs, key=lambda p: p[1])))

    @property
    def L(self) -> int:
        return len(self.on_circle)

    @property
    def M(self) -> int:
        return len(self.off_pairs)

    @property
    def degree(self) -> int:
        return self.L + 2 * self.M

    def roots(self) -> np.ndarray:
        """All zeros: pairs first (``beta, 1/conj(beta)``), then circle zeros."""
        out = []
        for rho, theta in self.off_pairs:
            w = cmath.exp(1j * theta)
            out.extend([rho * w, w / rho])
        out.extend(cmath.exp(1j * d) for d in self.on_circle)
        return np.array(out, dtype=complex)

    def to_dict(self) -> dict:
        return {
            "on_circle": list(self.on_circle),
            "off_pairs": [list(p) for p in self.off_pairs],
            "tolerance_used": self.tolerance_used,
        }


def from_coefficients(coeffs: Sequence[complex], tol: float = 1e-10) -> SelfReciprocalPoly:
    """Validate ``a_1..a_N`` and wrap them as a :class:`SelfReciprocalPoly`.

    Raises
    ------
    UnitModulusViolation
        If ``| |a_N| - 1 | >= tol``.
    SymmetryViolation
        If some ``|a_(N-n) - a_N conj(a_n)| >= tol``.
    """
    a = np.asarray(coeffs, dtype=complex).ravel()
    if a.size == 0:
        raise ValueError("need at least one coefficient")
    n = a.size
    a_n = a[-1]
    if abs(abs(a_n) - 1.0) >= tol:
        raise UnitModulusViolation(abs(a_n))
    # a_0 = 1 makes the j = 0 case the unit-modulus check itself
    for j in range(1, n):
        dev = abs(a[n - j - 1] - a_n * np.conj(a[j - 1]))
        if dev >= tol:
            raise SymmetryViolation(j, float(dev))
    is_real = bool(np.all(np.abs(a.imag) < tol))
    if is_real:
        a = a.real.astype(complex)
    return SelfReciprocalPoly(n, tuple(complex(c) for c in a), is_real)


def from_roots(zc: ZeroConfiguration) -> SelfReciprocalPoly:
    """Expand ``prod (z - root)`` for every zero in ``zc``."""
    roots = zc.roots()
    n = roots.size
    if n == 0:
        raise ValueError("configuration has no zeros")
    e = elementary_symmetric_all(roots)
    signs = (-1.0) ** np.arange(n + 1)
    coeffs = (signs * e)[1:]
    return from_coefficients(coeffs, tol=1e-10 * n)


@dataclass(frozen=True)
class TrigPoly:
    """``sum_n c_n cos((N/2 - n) x) + d_n sin((N/2 - n) x)`` for ``0 <= n <= N/2``."""

    degree: int
    c: tuple
    d: tuple
    branch_sign: int = 1
    frequencies: tuple = field(init=False)

    def __post_init__(self):
        object.__setattr__(
            self, "frequencies", tuple(self.degree / 2 - n for n in range(len(self.c)))
        )

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        w = np.asarray(self.frequencies)
        phase = np.multiply.outer(x, w)
        return np.cos(phase) @ np.asarray(self.c) + np.sin(phase) @ np.asarray(self.d)


def to_trigonometric(p: SelfReciprocalPoly, branch: int = 1) -> TrigPoly:
    """Real trigonometric form of ``a_N^{-1/2} e^{-iNx/2} p(e^{ix})``.

    ``a_N^{-1/2}`` is the principal value times ``branch`` (+1 or -1).
    """
    if branch not in (1, -1):
        raise ValueError("branch must be +1 or -1")
    n = p.degree
    a = p.full_coeffs()
    w = branch / cmath.sqrt(a[-1])
    c, d = [], []
    for k in range(n // 2 + 1):
        u = w * a[k]
        if 2 * k == n:
            # middle term pairs with itself; symmetry makes it real
            c.append(u.real)
            d.append(0.0)
        else:
            c.append(2.0 * u.real)
            d.append(-2.0 * u.imag)
    return TrigPoly(n, tuple(c), tuple(d), branch)
