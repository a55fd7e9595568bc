"""Epstein zeta functions of positive-definite binary quadratic forms.

For ``Q(m, n) = a m^2 + b m n + c n^2`` with ``D = b^2 - 4ac < 0`` the
completed function ``Lambda(s) = lam^s Gamma(s) L_Q(s)``,
``lam = sqrt(|D|) / (2 pi)``, is evaluated with the theta-transform
(incomplete gamma) expansion

    Lambda(s) = w^s [ sum' G(s, u w) + w^-1 sum' G(1-s, u / w)
                      - 1/s - 1/(w (1-s)) ],

where ``u = pi |m + n z|^2 / y`` runs over the lattice of the reduced point
``z = x + iy``, ``G`` is :func:`circlezeros.incgamma.gamma_tail` and
``w = exp(i phi)`` rotates the Mellin contour.  With ``phi = 0`` this is the
usual split at the self-dual point; for large ``|Im s|`` the rotation
``phi -> +-pi/2`` removes the ``exp(-pi |t| / 2)`` cancellation that the
unrotated sum would suffer.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import loggamma

from .errors import DomainError, InsufficientData, NotPositiveDefinite, PoleProximity, StepTooCoarse
from .incgamma import gamma_tail
from .seeding import item_rng

# rotation keeps |Im s| * (pi/2 - phi) = _ROT_SLACK for large |Im s|
_ROT_SLACK = 4.0
# lattice terms with Re(u w) beyond this are dropped (exp(-45) ~ 3e-20)
_DECAY_CUTOFF = 45.0
_MAX_CELLS = 400_000


@dataclass(frozen=True)
class QuadraticForm:
    """``Q(m, n) = a m^2 + b m n + c n^2``; must be positive definite."""

    a: float
    b: float
    c: float

    def __post_init__(self):
        for name in ("a", "b", "c"):
            object.__setattr__(self, name, float(getattr(self, name)))
        if not (self.a > 0 and self.discriminant < 0):
            raise NotPositiveDefinite(
                f"({self.a}, {self.b}, {self.c}) is not positive definite"
            )

    @property
    def discriminant(self) -> float:
        return self.b * self.b - 4.0 * self.a * self.c

    def __call__(self, m, n):
        return self.a * m * m + self.b * m * n + self.c * n * n

    def min_eigenvalue(self) -> float:
        return float(np.linalg.eigvalsh([[self.a, self.b / 2], [self.b / 2, self.c]])[0])

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "c": self.c}

    @classmethod
    def from_dict(cls, d: dict) -> "QuadraticForm":
        return cls(d["a"], d["b"], d["c"])


@dataclass(frozen=True)
class UpperHalfPoint:
    x: float
    y: float

    def __post_init__(self):
        if not self.y > 0:
            raise ValueError("y must be positive")

    @property
    def z(self) -> complex:
        return complex(self.x, self.y)

    @property
    def in_fundamental_domain(self) -> bool:
        r2 = self.x * self.x + self.y * self.y
        eps = 1e-12
        if not (-0.5 + eps < self.x <= 0.5 + eps):
            return False
        return r2 >= 1.0 + eps or (abs(r2 - 1.0) < eps and self.x >= 0)


@dataclass(frozen=True)
class CriticalZero:
    """Zero of ``Lambda(1/2 + i t)`` bracketed to ``refinement_width``."""

    t: float
    refinement_width: float


class DirectSum(NamedTuple):
    value: complex
    tail_bound: float


# -- reduction ---------------------------------------------------------------


def form_point(q: QuadraticForm) -> UpperHalfPoint:
    """The point ``z`` with ``Q(m, n) = a |m + n z|^2`` (no reduction)."""
    return UpperHalfPoint(q.b / (2 * q.a), math.sqrt(-q.discriminant) / (2 * q.a))


def reduce_point(z: complex, max_steps: int = 10_000) -> complex:
    """Map ``z`` into ``-1/2 < x <= 1/2, |z| >= 1`` (``x >= 0`` when ``|z| = 1``)."""
    # x -> x + 1 is exact, so the edge test can absorb accumulated rounding
    eps = 1e-12
    for _ in range(max_steps):
        x = z.real - math.floor(z.real + 0.5)
        if x <= -0.5 + eps:
            x += 1.0
        z = complex(x, z.imag)
        r2 = abs(z) ** 2
        if r2 < 1.0 - eps:
            z = -1.0 / z
            continue
        if abs(r2 - 1.0) <= eps and z.real < 0:
            z = complex(-z.real, z.imag)
        return z
    raise RuntimeError("reduction did not terminate")


def reduce_form(q: QuadraticForm) -> tuple[UpperHalfPoint, float]:
    """Reduced point of ``q`` and the factor ``a y = sqrt(|D|) / 2``.

    ``L_Q(s) = (a y)^(-s) sum' (y / |m + n z|^2)^s`` and ``a y`` is the
    same for every form equivalent to ``q``.
    """
    p = form_point(q)
    z = reduce_point(p.z)
    return UpperHalfPoint(z.real, z.imag), q.a * p.y


def reduced_form(q: QuadraticForm) -> QuadraticForm:
    """The equivalent form whose point lies in the fundamental domain."""
    p, scale = reduce_form(q)
    a = scale / p.y
    return QuadraticForm(a, 2 * a * p.x, a * (p.x * p.x + p.y * p.y))


# -- direct lattice sum ------------------------------------------------------------


def epstein_direct(q: QuadraticForm, s: complex, radius: int = 200) -> DirectSum:
    """``sum Q(m, n)^(-s)`` over ``0 < max(|m|, |n|) <= radius``.

    The tail bound uses ``Q >= mu (m^2 + n^2) >= mu k^2`` on the shell
    ``max(|m|, |n|) = k`` (``8k`` points, ``mu`` the smaller eigenvalue):
    ``8 mu^(-sigma) R^(2 - 2 sigma) / (2 sigma - 2)``.
    """
    s = complex(s)
    if s.real <= 1:
        raise DomainError("the lattice sum converges only for Re s > 1")
    if radius < 1:
        raise ValueError("radius must be at least 1")
    r = int(radius)
    m = np.arange(-r, r + 1, dtype=float)
    total = 0j
    # rows n = 1..r counted twice via (m, n) -> (-m, -n); row n = 0 separately
    blk = max(1, 4_000_000 // len(m))
    for start in range(1, r + 1, blk):
        n = np.arange(start, min(r, start + blk - 1) + 1, dtype=float)[:, None]
        vals = q(m[None, :], n)
        total += 2 * np.sum(np.exp(-s * np.log(vals)))
    pos = m[m > 0]
    total += 2 * np.sum(np.exp(-s * np.log(q.a * pos * pos)))
    mu = q.min_eigenvalue()
    sigma = s.real
    bound = 8.0 * mu ** (-sigma) * r ** (2 - 2 * sigma) / (2 * sigma - 2)
    return DirectSum(complex(total), float(bound))


# -- completed function ------------------------------------------------------


def _lattice_shells(z: complex, umax: float) -> tuple[np.ndarray, np.ndarray]:
    """Distinct ``u = pi |m + n z|^2 / y <= umax`` over ``(m, n) != 0`` with multiplicities."""
    x, y = z.real, z.imag
    r2 = umax * y / math.pi
    nmax = int(math.floor(math.sqrt(r2) / y))
    us = []
    for n in range(0, nmax + 1):
        rem = r2 - (n * y) ** 2
        if rem < 0:
            continue
        half = math.sqrt(rem)
        lo = math.ceil(-n * x - half)
        hi = math.floor(-n * x + half)
        m = np.arange(1 if n == 0 else lo, hi + 1, dtype=float)
        us.append(math.pi * ((m + n * x) ** 2 + (n * y) ** 2) / y)
    u = np.sort(np.concatenate(us)) if us else np.zeros(0)
    if u.size == 0:
        return u, u
    # (m, n) and (-m, -n) give equal u; rows n >= 0 with m >= 1 at n = 0 cover half
    split = np.flatnonzero(np.diff(u) > 1e-12 * u[1:]) + 1
    groups = np.split(u, split)
    vals = np.array([g.mean() for g in groups])
    mult = 2.0 * np.array([len(g) for g in groups])
    return vals, mult


def _rotation(t: np.ndarray) -> np.ndarray:
    at = np.maximum(np.abs(t), 1.0)
    phi = math.pi / 2 - _ROT_SLACK / at
    return np.sign(t) * np.maximum(phi, 0.0)


def _bracket(z: complex, s: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(B, phi)`` with ``Lambda(s) = exp(i phi s) B`` for each ``s``."""
    phi = _rotation(s.imag)
    w = np.exp(1j * phi)
    out = np.empty(s.shape, dtype=complex)
    # group by rotation so each group shares one lattice cutoff
    order = np.argsort(np.abs(phi))
    cos_phi = np.cos(phi)
    i = 0
    while i < len(order):
        c0 = cos_phi[order[i]]
        j = i
        while j + 1 < len(order) and cos_phi[order[j + 1]] > 0.8 * c0:
            j += 1
        idx = order[i : j + 1]
        c_min = cos_phi[idx].min()
        sig_pad = 3.0 * float(np.max(np.abs(s[idx].real - 0.5)))
        u, mult = _lattice_shells(z, (_DECAY_CUTOFF + sig_pad) / c_min)
        step = max(1, _MAX_CELLS // max(1, len(u)))
        for k in range(0, len(idx), step):
            sub = idx[k : k + step]
            ss = s[sub][:, None]
            ww = w[sub][:, None]
            g1 = gamma_tail(ss, u[None, :] * ww)
            g2 = gamma_tail(1.0 - ss, u[None, :] / ww)
            total = (g1 + g2 / ww) @ mult
            wv = w[sub]
            sv = s[sub]
            out[sub] = total - 1.0 / sv - 1.0 / (wv * (1.0 - sv))
        i = j + 1
    return out, phi


def _check_poles(s: np.ndarray) -> None:
    if np.any(np.abs(s) < 1e-6) or np.any(np.abs(s - 1.0) < 1e-6):
        raise PoleProximity("s is within 1e-6 of a pole at 0 or 1")


def epstein_completed(q: QuadraticForm, s):
    """``Lambda(s) = (sqrt|D| / 2 pi)^s Gamma(s) L_Q(s)``, scalar or array ``s``.

    Entire apart from simple poles at ``s = 0, 1``; ``Lambda(s) = Lambda(1 - s)``.
    """
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    _check_poles(arr)
    p, _ = reduce_form(q)
    b, phi = _bracket(p.z, arr.ravel())
    vals = np.exp(1j * phi * arr.ravel()) * b
    vals = vals.reshape(arr.shape)
    return complex(vals[0]) if np.ndim(s) == 0 else vals


def epstein_zeta(q: QuadraticForm, s):
    """``L_Q(s)`` through the completed function (valid for any ``s != 0, 1``)."""
    arr = np.atleast_1d(np.asarray(s, dtype=complex))
    lam = math.sqrt(-q.discriminant) / (2 * math.pi)
    vals = np.atleast_1d(epstein_completed(q, arr))
    out = vals * np.exp(-arr * math.log(lam) - loggamma(arr))
    return complex(out[0]) if np.ndim(s) == 0 else out


def hardy_z(q: QuadraticForm, t) -> np.ndarray:
    """``Lambda(1/2 + i t) / |lam^s Gamma(s)|``: real, same sign as ``Lambda``, size ``|L_Q|``.

    Returns the real part; the imaginary part is rounding noise for real forms.
    """
    t = np.atleast_1d(np.asarray(t, dtype=float))
    s = 0.5 + 1j * t
    _check_poles(s)
    p, _ = reduce_form(q)
    b, phi = _bracket(p.z, s)
    lam = math.sqrt(-q.discriminant) / (2 * math.pi)
    logscale = 1j * phi * s - 0.5 * math.log(lam) - loggamma(s).real
    return (b * np.exp(logscale)).real


# -- zeros on the critical line ----------------------------------------------------


def _bisect(q: QuadraticForm, lo: np.ndarray, hi: np.ndarray, f_lo: np.ndarray,
            width: float) -> tuple[np.ndarray, np.ndarray]:
    while True:
        w = hi - lo
        if np.all(w <= width):
            return lo, hi
        mid = 0.5 * (lo + hi)
        fm = hardy_z(q, mid)
        left = np.sign(fm) == np.sign(f_lo)
        lo = np.where(left, mid, lo)
        f_lo = np.where(left, fm, f_lo)
        hi = np.where(left, hi, mid)


def _dips(z: np.ndarray) -> np.ndarray:
    """Interior grid points where a parabola through three same-sign values dips through zero."""
    if z.size < 3:
        return np.zeros(0, dtype=int)
    a, b, c = z[:-2], z[1:-1], z[2:]
    same = (np.sign(a) == np.sign(b)) & (np.sign(b) == np.sign(c)) & (b != 0)
    local_min = (np.abs(b) <= np.abs(a)) & (np.abs(b) <= np.abs(c))
    curv = a - 2 * b + c
    with np.errstate(divide="ignore", invalid="ignore"):
        vertex = b - (c - a) ** 2 / (8 * curv)
    crosses = np.sign(vertex) != np.sign(b)
    return np.flatnonzero(same & local_min & crosses) + 1


def _brackets(q: QuadraticForm, grid: np.ndarray, z: np.ndarray, depth: int):
    """Sign-change brackets on ``grid``, re-gridding near dips up to ``depth`` times."""
    sgn = np.sign(z)
    change = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
    lo, hi, f_lo = [grid[change]], [grid[change + 1]], [z[change]]
    exact = [grid[z == 0]]
    dips = _dips(z)
    if depth > 0:
        for i in dips:
            fine = np.linspace(grid[i - 1], grid[i + 1], 41)
            fz = hardy_z(q, fine)
            sub = _brackets(q, fine, fz, depth - 1)
            lo.append(sub[0]), hi.append(sub[1]), f_lo.append(sub[2]), exact.append(sub[3])
    return (np.concatenate(lo), np.concatenate(hi), np.concatenate(f_lo),
            np.concatenate(exact), bool(len(dips)))


def _scan_window(q: QuadraticForm, t0: float, t1: float, step: float, width: float):
    n = max(1, int(math.ceil((t1 - t0) / step - 1e-9)))
    grid = t0 + step * np.arange(n + 1)
    grid[-1] = t1
    z = hardy_z(q, grid)
    sgn = np.sign(z)
    change = np.flatnonzero(sgn[:-1] * sgn[1:] < 0)
    crowded = bool(np.any(np.diff(change) < 3))
    lo, hi, f_lo, exact, dipped = _brackets(q, grid, z, depth=3)
    lo, hi = _bisect(q, lo, hi, f_lo, width)
    ts = np.concatenate([0.5 * (lo + hi), exact])
    return np.sort(ts), crowded or dipped


def scan_critical_line(q: QuadraticForm, t_min: float, t_max: float, step: float = 0.01,
                       width: float = 1e-9, window: float = 10.0) -> list[CriticalZero]:
    """Zeros of ``Lambda(1/2 + i t)`` for ``t_min <= t <= t_max`` by sign changes.

    The range is cut into windows scanned with an overlap of ``3 step``; each
    window keeps the zeros inside its own part of the range.  Where ``|Z|``
    dips toward zero between grid points without a sign change (two zeros
    inside one step), the neighborhood is re-gridded more finely.  Each zero
    is bisected to a bracket of ``width``.  A :class:`StepTooCoarse` warning
    is raised when sign changes occur within three grid steps of each other
    or a dip had to be resolved.
    """
    if not (0 <= t_min < t_max):
        raise ValueError("need 0 <= t_min < t_max")
    if step <= 0:
        raise ValueError("step must be positive")
    window = max(window, 10 * step)
    found = []
    crowded = False
    start = t_min
    while start < t_max:
        core_end = min(t_max, start + window)
        ts, c = _scan_window(q, max(t_min, start - 3 * step), min(t_max, core_end + 3 * step),
                             step, width)
        last = core_end >= t_max
        own = (ts >= start) & ((ts <= core_end) if last else (ts < core_end))
        found.append(ts[own])
        crowded |= c
        start = core_end
    ts = np.sort(np.concatenate(found)) if found else np.zeros(0)
    if ts.size:
        ts = ts[np.concatenate([[True], np.diff(ts) > 10 * width])]
    if crowded:
        warnings.warn(
            f"zeros closer than 3 steps (step={step}); the scan was refined locally",
            StepTooCoarse,
            stacklevel=2,
        )
    return [CriticalZero(float(t), width) for t in ts]


# -- spacings of zeros -------------------------------------------------------


@dataclass
class ZeroSpacings:
    """Zero ordinates per form with raw and unfolded consecutive gaps."""

    forms: list
    zeros: list
    raw_gaps: list
    unfolded_gaps: np.ndarray

    def to_dict(self) -> dict:
        return {
            "forms": [f.to_dict() for f in self.forms],
            "zeros": [list(map(float, z)) for z in self.zeros],
            "raw_gaps": [list(map(float, g)) for g in self.raw_gaps],
            "unfolded_gaps": list(map(float, self.unfolded_gaps)),
        }


def unfold_zeros(ts: np.ndarray) -> np.ndarray:
    """Map ordinates through a least-squares fit ``N(t) = A t log t + B t + C`` of their staircase.

    Falls back to a straight-line fit when there are fewer than six zeros.
    """
    ts = np.asarray(ts, dtype=float)
    if ts.size < 2:
        raise InsufficientData("need at least two zeros to unfold")
    counts = np.arange(1, ts.size + 1) - 0.5
    if ts.size >= 6 and np.all(ts > 0):
        basis = np.column_stack([ts * np.log(ts), ts, np.ones_like(ts)])
    else:
        basis = np.column_stack([ts, np.ones_like(ts)])
    coef, *_ = np.linalg.lstsq(basis, counts, rcond=None)
    return basis @ coef


def epstein_zero_spacings(forms: Sequence[QuadraticForm], t_range: tuple[float, float],
                          step: float = 0.01) -> ZeroSpacings:
    """Critical-line zeros of each form and their consecutive gaps.

    Raw gaps of a form sum to ``t_last - t_first``.  Unfolded gaps are
    differences of the fitted counting function at consecutive zeros, so
    their mean is close to one.
    """
    if len(forms) == 0:
        raise InsufficientData("need at least one form")
    zeros, raw, unfolded = [], [], []
    for q in forms:
        ts = np.array([z.t for z in scan_critical_line(q, t_range[0], t_range[1], step)])
        zeros.append(ts)
        raw.append(np.diff(ts))
        if ts.size >= 2:
            unfolded.append(np.diff(unfold_zeros(ts)))
    pooled = np.concatenate(unfolded) if unfolded else np.zeros(0)
    return ZeroSpacings(list(forms), zeros, raw, pooled)


def random_forms(count: int, seed: int, box: tuple[float, float] = (-5.0, 5.0),
                 max_tries: int = 1000) -> list[QuadraticForm]:
    """Forms with ``(a, b, c)`` uniform in ``box^3``, kept when positive definite.

    Form ``i`` uses the random stream ``(seed, i)``.
    """
    lo, hi = box
    out = []
    for i in range(count):
        rng = item_rng(seed, i)
        for _ in range(max_tries):
            a, b, c = rng.uniform(lo, hi, 3)
            if a > 0 and b * b - 4 * a * c < 0:
                out.append(QuadraticForm(a, b, c))
                break
        else:
            raise InsufficientData("box rarely yields positive-definite forms")
    return out
