"""Jacobians of the coefficient-to-zero maps and the induced zero densities.

Three coefficient maps are covered:

* complex, odd ``N``: ``(Re a_1, Im a_1, ..., Re a_(N-1)/2, Im a_(N-1)/2, phi)``
  with ``a_N = e^{i phi}``;
* complex, even ``N``: ``(Re a_1, Im a_1, ..., Re a_N/2, Im a_N/2)``;
* real: ``(a_1, ..., a_M)`` for zeros ``e^{+-i t_m}`` (plus ``-1`` when the
  degree ``2M+1`` is odd).

Only absolute values are exposed; unimodular phase factors are dropped.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy.special import gammaln

from .errors import ArityMismatch, DegenerateInput
from .polycore import (
    ZeroConfiguration,
    elementary_symmetric,
    elementary_symmetric_batch,
    log_vandermonde_abs,
)

LOG2 = math.log(2.0)


class DensityTag(str, enum.Enum):
    COE = "COE"
    CUE = "CUE"
    THM1_EVEN = "THM1_EVEN"
    THM2_REAL = "THM2_REAL"
    USP_HAAR = "USP_HAAR"


@dataclass(frozen=True)
class DensityKind:
    """A target density on zero angles.

    ``n`` is the degree ``N`` for the circular kinds (``N`` angles on the
    circle) and ``M`` for the real kinds (``M`` angles in ``(0, pi)``).
    """

    tag: DensityTag
    n: int

    def __post_init__(self):
        object.__setattr__(self, "tag", DensityTag(self.tag))
        if self.n < 1:
            raise ValueError("density needs at least one angle")
        if self.tag is DensityTag.THM1_EVEN and self.n % 2:
            raise ValueError("THM1_EVEN is defined for even N only")

    @property
    def arity(self) -> int:
        return self.n

    @property
    def on_half_circle(self) -> bool:
        """True for kinds whose angles live in ``(0, pi)``."""
        return self.tag in (DensityTag.THM2_REAL, DensityTag.USP_HAAR)

    def to_dict(self) -> dict:
        return {"tag": self.tag.value, "n": self.n}

    @classmethod
    def from_dict(cls, d: dict) -> "DensityKind":
        return cls(DensityTag(d["tag"]), int(d["n"]))


def coe_normalization(n: int) -> float:
    """Normalizing constant ``1 / ((4 sqrt(pi))^N Gamma(1 + N/2))`` of the COE density."""
    return math.exp(-n * math.log(4 * math.sqrt(math.pi)) - gammaln(1 + n / 2))


def cue_normalization(n: int) -> float:
    """Normalizing constant ``1 / ((2 pi)^N N!)`` of the CUE density."""
    return math.exp(-n * math.log(2 * math.pi) - gammaln(n + 1))


# -- closed forms ----------------------------------------------------------


def _log_jacobian_complex(roots: np.ndarray, rhos: Sequence[float], n: int) -> float:
    m = len(rhos)
    out = log_vandermonde_abs(roots) - float(np.sum(np.log(rhos)))
    if n % 2:
        return out + (m - (n - 1) / 2) * LOG2
    with np.errstate(divide="ignore"):
        log_e = math.log(abs(elementary_symmetric(n // 2, roots))) if n else 0.0
    return out + log_e + (m - n / 2) * LOG2


def _safe_exp(x: float) -> float:
    return 0.0 if x == -math.inf else math.exp(x)


def log_jacobian_complex_circle(delta: Sequence[float], n: int) -> float:
    delta = np.asarray(delta, dtype=float)
    if delta.size != n or n < 1:
        raise ArityMismatch(f"expected {n} angles, got {delta.size}")
    return _log_jacobian_complex(np.exp(1j * delta), [], n)


def jacobian_complex_circle(delta: Sequence[float], n: int) -> float:
    """|J| for all ``N`` zeros ``e^{i delta_j}`` on the circle.

    Odd ``N``: ``2^{-(N-1)/2} |Delta|``; even ``N``: ``2^{-N/2} |e_{N/2}| |Delta|``.
    """
    return _safe_exp(log_jacobian_complex_circle(delta, n))


def log_jacobian_complex_general(zc: ZeroConfiguration, n: int) -> float:
    if zc.degree != n:
        raise ArityMismatch(f"configuration has {zc.degree} zeros, expected {n}")
    rhos = [rho for rho, _ in zc.off_pairs]
    return _log_jacobian_complex(zc.roots(), rhos, n)


def jacobian_complex_general(zc: ZeroConfiguration, n: int) -> float:
    """|J| with ``M`` reflected pairs off the circle.

    ``2^{M-(N-1)/2} prod(1/rho_m) |Delta|`` for odd ``N`` and
    ``2^{M-N/2} prod(1/rho_m) |e_{N/2}| |Delta|`` for even ``N``, the
    Vandermonde taken over all ``N`` zeros.
    """
    return _safe_exp(log_jacobian_complex_general(zc, n))


def _half_angle_terms(t: np.ndarray):
    """``log 2|sin t_m|`` and the pair terms for angles of shape (B, M)."""
    with np.errstate(divide="ignore"):
        single = np.log(2 * np.abs(np.sin(t))).sum(axis=1)
        m = t.shape[1]
        if m < 2:
            return single, np.zeros(t.shape[0])
        j, k = np.triu_indices(m, 1)
        diff = np.log(2 * np.abs(np.sin((t[:, k] - t[:, j]) / 2)))
        summ = np.log(2 * np.abs(np.sin((t[:, k] + t[:, j]) / 2)))
        return single, (diff + summ).sum(axis=1)


def log_jacobian_real(t: Sequence[float], degree_parity: str = "even") -> float:
    if degree_parity not in ("even", "odd"):
        raise ValueError("degree_parity must be 'even' or 'odd'")
    t = np.asarray(t, dtype=float)[None, :]
    single, pairs = _half_angle_terms(t)
    return float(single[0] + pairs[0])


def jacobian_real(t: Sequence[float], degree_parity: str = "even") -> float:
    """|J| for real coefficients ``a_1..a_M`` and zeros ``e^{+-i t_m}``.

    ``|prod(e^{it_m} - e^{-it_m}) prod_{j<k} (e^{it_k}-e^{it_j})(e^{it_k}-e^{-it_j})|``,
    the same for both parities of the degree.
    """
    return _safe_exp(log_jacobian_real(t, degree_parity))


# -- densities ---------------------------------------------------------------


def _log_abs_vandermonde_angles(delta: np.ndarray) -> np.ndarray:
    n = delta.shape[1]
    if n < 2:
        return np.zeros(delta.shape[0])
    j, k = np.triu_indices(n, 1)
    with np.errstate(divide="ignore"):
        return np.log(2 * np.abs(np.sin((delta[:, k] - delta[:, j]) / 2))).sum(axis=1)


def log_density_batch(kind: DensityKind, angles: np.ndarray) -> np.ndarray:
    """Unnormalized log-density for each row of ``angles`` (shape (B, arity))."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    if angles.shape[1] != kind.arity:
        raise ArityMismatch(f"{kind.tag.value} expects {kind.arity} angles, got {angles.shape[1]}")
    tag = kind.tag
    if tag in (DensityTag.COE, DensityTag.CUE, DensityTag.THM1_EVEN):
        out = _log_abs_vandermonde_angles(angles)
        if tag is DensityTag.CUE:
            return 2.0 * out
        if tag is DensityTag.THM1_EVEN:
            e = elementary_symmetric_batch(np.exp(1j * angles))[:, kind.n // 2]
            with np.errstate(divide="ignore"):
                out = out + np.log(np.abs(e))
        return out
    single, pairs = _half_angle_terms(angles)
    out = single + pairs
    # t = 0 or pi puts a zero on top of its conjugate
    out = np.where(np.all((angles > 0) & (angles < math.pi), axis=1), out, -np.inf)
    if tag is DensityTag.USP_HAAR:
        return 2.0 * out
    return out


def log_density(kind: DensityKind, angles: Sequence[float]) -> float:
    """Unnormalized log-density of one angle vector.

    COE ``log|Delta|``, CUE ``2 log|Delta|``, THM1_EVEN ``log|e_{N/2}| + log|Delta|``,
    THM2_REAL the real-case Jacobian, USP_HAAR twice that.  Coincident zeros
    give ``-inf``.
    """
    angles = np.asarray(angles, dtype=float).ravel()
    return float(log_density_batch(kind, angles[None, :])[0])


# -- finite-difference oracle ------------------------------------------------


class CoefficientMap(str, enum.Enum):
    COMPLEX_ODD = "complex_odd"
    COMPLEX_EVEN = "complex_even"
    REAL = "real"


def _roots_from_point(map_id: CoefficientMap, point: np.ndarray, n_pairs: int, parity: str):
    if map_id is CoefficientMap.REAL:
        w = np.exp(1j * point)
        roots = np.concatenate([w, np.conj(w)])
        if parity == "odd":
            roots = np.append(roots, -1.0)
        return roots
    rho = point[0 : 2 * n_pairs : 2]
    theta = point[1 : 2 * n_pairs : 2]
    delta = point[2 * n_pairs :]
    w = np.exp(1j * theta)
    pairs = np.ravel(np.column_stack([rho * w, w / rho])) if n_pairs else np.zeros(0)
    return np.concatenate([pairs, np.exp(1j * delta)])


def _coefficients(roots: np.ndarray) -> np.ndarray:
    e = elementary_symmetric_batch(roots[None, :])[0]
    return ((-1.0) ** np.arange(len(e)) * e)[1:]


def coefficient_coordinates(map_id, point, n_pairs: int = 0, degree_parity: str = "even",
                            phase_ref: complex | None = None) -> np.ndarray:
    """Real coefficient coordinates of the polynomial with zeros given by ``point``.

    ``point`` is ``(rho_1, theta_1, ..., rho_M, theta_M, delta_1, ..., delta_L)``
    for the complex maps and ``(t_1, ..., t_M)`` for the real one.  For the
    odd complex map ``phi`` is measured relative to ``phase_ref`` so it stays
    continuous.
    """
    map_id = CoefficientMap(map_id)
    point = np.asarray(point, dtype=float)
    a = _coefficients(_roots_from_point(map_id, point, n_pairs, degree_parity))
    n = len(a)
    if map_id is CoefficientMap.REAL:
        return a[: len(point)].real
    if map_id is CoefficientMap.COMPLEX_EVEN:
        h = a[: n // 2]
        return np.ravel(np.column_stack([h.real, h.imag]))
    h = a[: (n - 1) // 2]
    ref = a[-1] if phase_ref is None else phase_ref
    phi = np.angle(a[-1] / ref)
    return np.concatenate([np.ravel(np.column_stack([h.real, h.imag])), [phi]])


def finite_difference_jacobian(map_id, point, step: float = 1e-5, *, n_pairs: int = 0,
                               degree_parity: str = "even", richardson: bool = False) -> float:
    """|det| of the central-difference Jacobian of a coefficient map.

    With ``richardson=True`` the entries are extrapolated from steps ``h``
    and ``2h`` (fourth order); the default is the plain second-order
    central difference.
    """
    map_id = CoefficientMap(map_id)
    point = np.asarray(point, dtype=float)
    if step <= 0:
        raise ValueError("step must be positive")
    roots = _roots_from_point(map_id, point, n_pairs, degree_parity)
    n = len(roots)
    if map_id is CoefficientMap.COMPLEX_ODD and n % 2 == 0:
        raise DegenerateInput("COMPLEX_ODD needs an odd number of zeros")
    if map_id is CoefficientMap.COMPLEX_EVEN and n % 2:
        raise DegenerateInput("COMPLEX_EVEN needs an even number of zeros")
    if n > 1:
        j, k = np.triu_indices(n, 1)
        if np.min(np.abs(roots[k] - roots[j])) <= 10 * step:
            raise DegenerateInput("zeros closer than 10 * step")
    if map_id is not CoefficientMap.REAL:
        if n_pairs and np.min(point[0 : 2 * n_pairs : 2]) <= 0:
            raise DegenerateInput("pair modulus must be positive")
    ref = _coefficients(roots)[-1]

    def jac(h):
        cols = []
        for i in range(point.size):
            e = np.zeros_like(point)
            e[i] = h
            fp = coefficient_coordinates(map_id, point + e, n_pairs, degree_parity, ref)
            fm = coefficient_coordinates(map_id, point - e, n_pairs, degree_parity, ref)
            cols.append((fp - fm) / (2 * h))
        return np.column_stack(cols)

    mat = jac(step)
    if mat.shape[0] != mat.shape[1]:
        raise DegenerateInput(f"map is {mat.shape[0]}x{mat.shape[1]}, not square")
    if richardson:
        mat = (4 * mat - jac(2 * step)) / 3
    return float(abs(np.linalg.det(mat)))


class JacobianCheck(NamedTuple):
    closed_form: float
    oracle: float
    rel_error: float


def random_configuration(rng: np.random.Generator, map_id, n: int, n_pairs: int = 0,
                         min_sep: float = 0.05, max_tries: int = 10_000) -> np.ndarray:
    """A random point for :func:`coefficient_coordinates` with well separated zeros.

    Complex maps: ``n`` zeros of which ``n_pairs`` reflected pairs with
    ``rho`` uniform in ``[1.2, 2.5]``.  Real map: ``n`` is the degree,
    ``M = n // 2`` angles in ``(0, pi)`` and parity from ``n``.
    """
    map_id = CoefficientMap(map_id)
    parity = "odd" if n % 2 else "even"
    for _ in range(max_tries):
        if map_id is CoefficientMap.REAL:
            point = np.sort(rng.uniform(0.05, math.pi - 0.05, n // 2))
        else:
            ell = n - 2 * n_pairs
            if ell < 0:
                raise ValueError("too many pairs for the degree")
            rho = rng.uniform(1.2, 2.5, n_pairs)
            theta = rng.uniform(0, 2 * math.pi, n_pairs)
            pairs = np.ravel(np.column_stack([rho, theta])) if n_pairs else np.zeros(0)
            point = np.concatenate([pairs, rng.uniform(0, 2 * math.pi, ell)])
        roots = _roots_from_point(map_id, point, n_pairs, parity)
        j, k = np.triu_indices(len(roots), 1)
        if len(roots) < 2 or np.min(np.abs(roots[k] - roots[j])) > min_sep:
            return point
    raise DegenerateInput("could not draw a separated configuration")


def check_jacobian(map_id, point, n: int, n_pairs: int = 0, step: float = 1e-5) -> JacobianCheck:
    """Closed-form Jacobian at ``point`` against the central-difference oracle."""
    map_id = CoefficientMap(map_id)
    point = np.asarray(point, dtype=float)
    if map_id is CoefficientMap.REAL:
        parity = "odd" if n % 2 else "even"
        closed = jacobian_real(point, parity)
        oracle = finite_difference_jacobian(map_id, point, step, degree_parity=parity)
    else:
        pairs = [(point[2 * i], point[2 * i + 1]) for i in range(n_pairs)]
        zc = ZeroConfiguration(tuple(point[2 * n_pairs :]), tuple(pairs))
        closed = jacobian_complex_general(zc, n)
        oracle = finite_difference_jacobian(map_id, point, step, n_pairs=n_pairs)
    return JacobianCheck(closed, oracle, abs(closed - oracle) / abs(oracle))
