"""Observables computed from angle samples and polynomial ensembles.

All estimators here are sums of per-sample contributions, so partial results
from separate chunks can be merged by adding counts.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np
from scipy import stats as sps

from .errors import (
    ArityMismatch,
    CircleZerosError,
    DegenerateInput,
    EmptyBins,
    InsufficientData,
)
from .polycore import TWO_PI, SelfReciprocalPoly
from .roots import RootFindReport, circle_classify, find_roots_batch
from .seeding import item_rng, map_ordered


class Estimate(NamedTuple):
    estimate: float
    stderr: float


class FractionEstimate(NamedTuple):
    """Mean on-circle fraction ``L/N``; ``skipped`` counts failed root finds."""

    estimate: float
    stderr: float
    skipped: int = 0


class TestResult(NamedTuple):
    statistic: float
    p_value: float


@dataclass
class SpacingSample:
    """Unfolded nearest-neighbor gaps pooled over a batch.

    ``edge`` holds statistics of the smallest angle for half-circle batches
    (empty otherwise), where the mean density vanishes near ``t = 0``.
    """

    unfolded_gaps: np.ndarray
    source: dict | None = None
    edge: dict = field(default_factory=dict)

    @property
    def mean(self) -> float:
        return float(np.mean(self.unfolded_gaps))


@dataclass
class SpacingHistogram:
    edges: np.ndarray
    counts: np.ndarray

    @property
    def masses(self) -> np.ndarray:
        total = self.counts.sum()
        return self.counts / total if total else np.zeros(len(self.counts))

    @property
    def density(self) -> np.ndarray:
        return self.masses / np.diff(self.edges)


@dataclass
class R2Estimate:
    """Binned pair correlation; ``grid`` holds bin centers in radians."""

    grid: np.ndarray
    values: np.ndarray
    counts: np.ndarray
    edges: np.ndarray
    stderr: np.ndarray
    normalization: str = (
        "R2 = pair count / (sum over sets of n(n-1) * bin width / pi); "
        "ordered pairs, circular distance in [0, pi]"
    )


# -- input helpers -----------------------------------------------------------


def _angles_of(batch) -> tuple[np.ndarray, str, dict | None]:
    """``(angles (B, n), domain, spec dict)`` from a SampleBatch or an array."""
    if hasattr(batch, "angles"):
        spec = batch.spec.to_dict() if getattr(batch, "spec", None) is not None else None
        return np.atleast_2d(np.asarray(batch.angles, dtype=float)), batch.domain, spec
    return np.atleast_2d(np.asarray(batch, dtype=float)), "circle", None


def full_circle_angles(angles: np.ndarray, domain: str) -> np.ndarray:
    """Sorted angles in ``[0, 2 pi)``; half-circle rows gain their mirror images."""
    angles = np.atleast_2d(np.asarray(angles, dtype=float))
    if domain == "half":
        angles = np.concatenate([angles, TWO_PI - angles], axis=1)
    elif domain != "circle":
        raise ValueError(f"unknown domain {domain!r}")
    return np.sort(np.mod(angles, TWO_PI), axis=1)


def circular_gaps(angles: np.ndarray) -> np.ndarray:
    """Consecutive gaps around the circle; each row sums to ``2 pi``."""
    a = np.sort(np.mod(np.atleast_2d(angles), TWO_PI), axis=1)
    wrap = a[:, :1] + TWO_PI - a[:, -1:]
    return np.concatenate([np.diff(a, axis=1), wrap], axis=1)


# -- on-circle fractions -----------------------------------------------------


def count_on_circle(coeffs: np.ndarray, tol: float | None = None) -> np.ndarray:
    """Number of on-circle zeros per coefficient row; -1 where classification failed."""
    coeffs = np.atleast_2d(np.asarray(coeffs, dtype=complex))
    n = coeffs.shape[1]
    tol = 1e-8 * n if tol is None else tol
    out = np.full(len(coeffs), -1, dtype=int)
    try:
        roots, backward, iters = find_roots_batch(coeffs)
    except CircleZerosError:
        return out
    for i, (row, err) in enumerate(zip(roots, backward)):
        if not np.all(np.isfinite(row)):
            continue
        try:
            out[i] = circle_classify(RootFindReport(row, float(np.max(err)), iters), tol).L
        except CircleZerosError:
            pass
    return out


def fraction_on_circle(polys: Sequence[SelfReciprocalPoly] | np.ndarray,
                       tol: float | None = None) -> FractionEstimate:
    """Mean of ``L/N`` over polynomials, with the standard error of the mean.

    ``polys`` is a list of :class:`SelfReciprocalPoly` or an array of
    coefficient rows.  Items whose zeros cannot be classified are skipped and
    counted.
    """
    if isinstance(polys, np.ndarray):
        coeffs = np.atleast_2d(polys)
    else:
        if len(polys) == 0:
            raise InsufficientData("no polynomials given")
        degrees = {p.degree for p in polys}
        if len(degrees) != 1:
            raise ArityMismatch("polynomials must share one degree")
        coeffs = np.array([p.coeffs for p in polys], dtype=complex)
    if coeffs.size == 0:
        raise InsufficientData("no polynomials given")
    n = coeffs.shape[1]
    counts = count_on_circle(coeffs, tol)
    good = counts >= 0
    skipped = int(np.sum(~good))
    if not np.any(good):
        raise InsufficientData("root classification failed for every polynomial")
    frac = counts[good] / n
    k = len(frac)
    stderr = float(np.std(frac, ddof=1) / math.sqrt(k)) if k > 1 else 0.0
    return FractionEstimate(float(np.mean(frac)), stderr, skipped)


def cosine_series_to_poly(c: np.ndarray) -> np.ndarray:
    """Monic self-reciprocal coefficients for ``sum_{n=0}^{N} c_n cos(n x)``.

    Multiplying by ``2 z^N / c_N`` with ``z = e^{ix}`` gives a real
    polynomial of degree ``2N``; rows of ``c`` have length ``N + 1`` and the
    result has shape (B, 2N) holding ``a_1..a_2N``.
    """
    c = np.atleast_2d(np.asarray(c, dtype=float))
    n = c.shape[1] - 1
    full = np.empty((len(c), 2 * n + 1))
    full[:, :n] = c[:, :0:-1] / 2
    full[:, n] = c[:, 0]
    full[:, n + 1 :] = c[:, 1:] / 2
    full /= full[:, :1]
    return full[:, 1:]


def _dunnage_chunk(task):
    n, seed, index, size = task
    rng = item_rng(seed, index)
    c = rng.standard_normal((size, n + 1))
    return count_on_circle(cosine_series_to_poly(c))


def dunnage_real_zero_count(N: int, samples: int, seed: int = 0, workers: int = 1,
                            chunk_size: int = 200) -> Estimate:
    """Mean number of zeros in ``[0, 2 pi)`` of ``sum_{n<=N} c_n cos(n x)``, ``c_n ~ N(0,1)``.

    Zeros are counted as on-circle roots of the equivalent degree-``2N``
    self-reciprocal polynomial.  Unclassifiable draws are dropped.
    """
    if N < 2:
        raise ValueError("N must be at least 2")
    if samples < 2:
        raise InsufficientData("need at least two samples")
    tasks = [(N, seed, i, min(chunk_size, samples - start))
             for i, start in enumerate(range(0, samples, chunk_size))]
    counts = np.concatenate(map_ordered(_dunnage_chunk, tasks, workers))
    counts = counts[counts >= 0].astype(float)
    if len(counts) < 2:
        raise InsufficientData("root classification failed for almost every draw")
    return Estimate(float(counts.mean()), float(counts.std(ddof=1) / math.sqrt(len(counts))))


# -- spacings ------------------------------------------------------------------


def spacing_sample(batch) -> SpacingSample:
    """Pooled unfolded gaps (gap times ``n / 2 pi`` for ``n`` angles per set)."""
    angles, domain, spec = _angles_of(batch)
    full = full_circle_angles(angles, domain)
    n = full.shape[1]
    if n < 2:
        raise ArityMismatch("each angle set needs at least two angles")
    gaps = circular_gaps(full) * (n / TWO_PI)
    edge = {}
    if domain == "half":
        tmin = angles.min(axis=1)
        edge = {
            "t_min_mean": float(tmin.mean()),
            "t_min_std": float(tmin.std(ddof=1)) if len(tmin) > 1 else 0.0,
            "t_min_unfolded_mean": float(tmin.mean() * n / TWO_PI),
            "count": int(len(tmin)),
        }
    return SpacingSample(gaps.ravel(), spec, edge)


def spacing_histogram(batch, bins: int = 40, bin_width: float | None = None,
                      s_max: float = 4.0) -> tuple[SpacingSample, SpacingHistogram]:
    """Unfolded gap sample and its histogram normalized to unit mass.

    With ``bin_width`` given, bins of that width start at 0 and cover
    ``s_max`` (rounded up); otherwise ``bins`` equal bins span ``[0, s_max]``.
    Gaps beyond the last edge fall into the last bin so masses sum to one.
    """
    sample = spacing_sample(batch)
    if bin_width is not None:
        if bin_width <= 0:
            raise ValueError("bin_width must be positive")
        k = max(1, int(math.ceil(s_max / bin_width - 1e-12)))
        edges = bin_width * np.arange(k + 1)
    else:
        edges = np.linspace(0.0, s_max, int(bins) + 1)
    gaps = np.minimum(sample.unfolded_gaps, edges[-1])
    counts, _ = np.histogram(gaps, bins=edges)
    return sample, SpacingHistogram(edges, counts)


def pair_correlation(batch, delta_grid: Sequence[float]) -> R2Estimate:
    """Pair-count estimate of the two-point correlation ``R_2(delta)``.

    ``delta_grid`` are bin edges for the circular distance (radians, within
    ``[0, pi]``).  Every set contributes its ``n(n-1)`` ordered pairs; the
    counts are divided by what independent uniform angles would give, so
    ``R_2 -> 1`` for uncorrelated points.
    """
    edges = np.asarray(delta_grid, dtype=float)
    if edges.ndim != 1 or len(edges) < 2 or np.any(np.diff(edges) <= 0) or edges[0] < 0:
        raise ValueError("delta_grid must be non-negative and strictly increasing")
    if edges[-1] > math.pi + 1e-12:
        raise ValueError("circular distances do not exceed pi")
    angles, domain, _ = _angles_of(batch)
    full = full_circle_angles(angles, domain)
    b, n = full.shape
    if n < 2:
        raise ArityMismatch("each angle set needs at least two angles")
    j, k = np.triu_indices(n, 1)
    counts = np.zeros(len(edges) - 1)
    for start in range(0, b, 2000):
        part = full[start : start + 2000]
        d = np.abs(part[:, k] - part[:, j])
        d = np.minimum(d, TWO_PI - d)
        counts += 2 * np.histogram(d.ravel(), bins=edges)[0]
    expected = b * n * (n - 1) * np.diff(edges) / math.pi
    values = counts / expected
    stderr = np.sqrt(counts) / expected
    if np.any(counts == 0):
        warnings.warn(f"{int(np.sum(counts == 0))} pair-correlation bins are empty",
                      EmptyBins, stacklevel=2)
    centers = 0.5 * (edges[1:] + edges[:-1])
    return R2Estimate(centers, values, counts, edges, stderr)


def repulsion_exponent(r2: R2Estimate, fit_range: tuple[float, float]) -> Estimate:
    """Least-squares slope of ``log R_2`` against ``log delta`` inside ``fit_range``."""
    lo, hi = fit_range
    grid = np.asarray(r2.grid, dtype=float)
    vals = np.asarray(r2.values, dtype=float)
    sel = (grid >= lo) & (grid <= hi) & (vals > 0) & (grid > 0)
    if sel.sum() < 4:
        raise InsufficientData("need at least four positive points in the fit range")
    x, y = np.log(grid[sel]), np.log(vals[sel])
    res = sps.linregress(x, y)
    return Estimate(float(res.slope), float(res.stderr))


# -- two-sample tests ----------------------------------------------------------


def _pool_columns(table: np.ndarray, min_expected: float = 5.0) -> np.ndarray:
    """Merge adjacent columns of a 2 x K table until every expected count is >= ``min_expected``."""
    rows = table.sum(axis=1)
    total = rows.sum()
    need = min_expected * total / rows.min()
    groups, acc = [], np.zeros(2)
    for col in table.T:
        acc = acc + col
        if acc.sum() >= need:
            groups.append(acc)
            acc = np.zeros(2)
    if acc.sum() > 0:
        if groups:
            groups[-1] = groups[-1] + acc
        else:
            groups.append(acc)
    return np.array(groups).T


def two_sample_test(xs, ys, kind: str = "ks", bins=None, range=None,
                    min_expected: float = 5.0) -> TestResult:
    """Two-sample Kolmogorov-Smirnov or chi-square homogeneity test.

    Parameters
    ----------
    xs, ys : array_like
        1-D samples, or (n, d) arrays of points for the chi-square test.
    kind : {"ks", "chi-square"}
        KS uses the exact statistic with its asymptotic p-value.  Chi-square
        bins both samples on a common grid (``bins`` and ``range`` as in
        :func:`numpy.histogramdd`), then merges adjacent cells until every
        expected count is at least ``min_expected``.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if xs.size == 0 or ys.size == 0:
        raise InsufficientData("both samples must be nonempty")
    both = np.concatenate([xs.ravel(), ys.ravel()])
    if np.all(both == both[0]):
        raise DegenerateInput("all values are identical")
    kind = kind.lower().replace("_", "-")
    if kind == "ks":
        if xs.ndim != 1 or ys.ndim != 1:
            raise ValueError("KS needs 1-D samples")
        res = sps.ks_2samp(xs, ys, method="asymp")
        return TestResult(float(res.statistic), float(res.pvalue))
    if kind in ("chi-square", "chi2", "chisquare"):
        if bins is None:
            raise ValueError("chi-square needs a binning (bins=...)")
        x2 = xs.reshape(len(xs), -1)
        y2 = ys.reshape(len(ys), -1)
        if x2.shape[1] != y2.shape[1]:
            raise ArityMismatch("samples have different dimensions")
        if range is None:
            lo = np.minimum(x2.min(axis=0), y2.min(axis=0))
            hi = np.maximum(x2.max(axis=0), y2.max(axis=0))
            range = list(zip(lo, hi))
        elif np.ndim(range) == 1:
            range = [tuple(range)]
        hx, _ = np.histogramdd(x2, bins=bins, range=range)
        hy, _ = np.histogramdd(y2, bins=bins, range=range)
        table = _pool_columns(np.vstack([hx.ravel(), hy.ravel()]), min_expected)
        if table.shape[1] < 2:
            raise InsufficientData("fewer than two cells after pooling")
        stat, p, _, _ = sps.chi2_contingency(table, correction=False)
        return TestResult(float(stat), float(p))
    raise ValueError(f"unknown test kind {kind!r}")
