"""Random polynomials and zero-angle configurations.

Models
------
UNIFORM_DISK_COMPLEX
    free coefficients uniform in the disks ``|a_n| <= binom(N, n)`` (and
    ``a_N = e^{i phi}``, ``phi`` uniform, for odd ``N``), kept only when every
    zero is on the unit circle.
UNIFORM_DISK_REAL
    real ``a_1..a_M`` uniform in ``[-binom(N, n), binom(N, n)]``, ``a_N = 1``,
    same restriction.  Angles reported are the ``M`` zeros in ``(0, pi)``.
GAUSSIAN_SR
    complex normal coefficients with standard deviation ``epsilon/sqrt(N)``.
MATRIX_COE, MATRIX_CUE
    eigenangles of ``U^T U`` and ``U`` for Haar-random unitary ``U``.
MCMC
    Metropolis random walk targeting one of the densities in
    :mod:`circlezeros.measures`.

Randomness is split into chunks (or items) with their own Philox stream, so a
batch is bitwise identical whatever the number of workers.
"""

from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.special import comb

from .errors import AttemptBudgetExhausted, EigensolveFailure
from .measures import DensityKind, log_density_batch
from .polycore import TWO_PI, SelfReciprocalPoly, from_coefficients
from .roots import RootFindReport, circle_classify, find_roots_batch
from .seeding import item_key, item_rng, map_ordered


class Model(str, enum.Enum):
    UNIFORM_DISK_COMPLEX = "UNIFORM_DISK_COMPLEX"
    UNIFORM_DISK_REAL = "UNIFORM_DISK_REAL"
    GAUSSIAN_SR = "GAUSSIAN_SR"
    MATRIX_COE = "MATRIX_COE"
    MATRIX_CUE = "MATRIX_CUE"
    MCMC = "MCMC"


@dataclass(frozen=True)
class EnsembleSpec:
    model: Model
    N: int
    epsilon: float | None = None
    seed: int = 0
    tolerance: float | None = None
    density: DensityKind | None = None

    def __post_init__(self):
        object.__setattr__(self, "model", Model(self.model))
        if isinstance(self.density, dict):
            object.__setattr__(self, "density", DensityKind.from_dict(self.density))
        if self.N < 1:
            raise ValueError("N must be positive")
        gaussian = self.model is Model.GAUSSIAN_SR
        if gaussian and not (self.epsilon is not None and self.epsilon > 0):
            raise ValueError("GAUSSIAN_SR needs epsilon > 0")
        if not gaussian and self.epsilon is not None:
            raise ValueError("epsilon applies to GAUSSIAN_SR only")
        if self.model is Model.MCMC and self.density is None:
            raise ValueError("MCMC needs a density kind")
        if not 0 <= int(self.seed) < 2**64:
            raise ValueError("seed must be an unsigned 64-bit integer")

    @property
    def tol(self) -> float:
        return self.tolerance if self.tolerance is not None else 1e-8 * self.N

    def to_dict(self) -> dict:
        return {
            "model": self.model.value,
            "N": self.N,
            "epsilon": self.epsilon,
            "seed": int(self.seed),
            "tolerance": self.tolerance,
            "density": None if self.density is None else self.density.to_dict(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EnsembleSpec":
        dens = d.get("density")
        return cls(
            Model(d["model"]),
            int(d["N"]),
            d.get("epsilon"),
            int(d.get("seed", 0)),
            d.get("tolerance"),
            None if dens is None else DensityKind.from_dict(dens),
        )


@dataclass
class SampleBatch:
    """Sorted angle tuples, one row per sample.

    ``domain`` is ``"circle"`` for angles in ``[0, 2 pi)`` and ``"half"`` for
    the real-coefficient case, where each row holds the ``M`` angles in
    ``(0, pi)`` (the conjugates are implicit).
    """

    angles: np.ndarray
    attempted: int
    seed_chain: tuple = ()
    domain: str = "circle"
    spec: EnsembleSpec | None = None
    info: dict = field(default_factory=dict)

    @property
    def accepted(self) -> int:
        return len(self.angles)

    @property
    def angle_sets(self) -> list:
        return [tuple(row) for row in self.angles.tolist()]

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / self.attempted if self.attempted else float("nan")


# -- uniform-disk rejection -----------------------------------------------


def _draw_disk_coefficients(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    a = np.zeros((size, n), dtype=complex)
    free = (n - 1) // 2 if n % 2 else n // 2
    radii = comb(n, np.arange(1, free + 1))
    r = radii * np.sqrt(rng.random((size, free)))
    ang = TWO_PI * rng.random((size, free))
    draws = r * np.exp(1j * ang)
    if n % 2:
        a_n = np.exp(1j * TWO_PI * rng.random(size))
    else:
        mid = draws[:, -1]
        a_n = mid / np.conj(mid)
    a[:, :free] = draws
    a[:, -1] = a_n
    for j in range(1, (n + 1) // 2):
        a[:, n - j - 1] = a_n * np.conj(a[:, j - 1])
    return a


def _draw_real_coefficients(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    m = n // 2
    a = np.zeros((size, n), dtype=float)
    bounds = comb(n, np.arange(1, m + 1))
    a[:, :m] = bounds * (2 * rng.random((size, m)) - 1)
    for j in range(1, m + 1):
        a[:, n - j - 1] = a[:, j - 1]
    a[:, -1] = 1.0
    return a


def _upper_angles(roots: np.ndarray, m: int) -> np.ndarray:
    """The ``m`` angles in ``(0, pi)`` of real-polynomial roots on the circle."""
    order = np.argsort(-roots.imag, axis=1)[:, :m]
    top = np.take_along_axis(roots, order, axis=1)
    return np.sort(np.angle(top), axis=1)


def _rejection_chunk(task):
    model, n, seed, index, size, tol = task
    rng = item_rng(seed, index)
    if model is Model.UNIFORM_DISK_COMPLEX:
        coeffs = _draw_disk_coefficients(rng, n, size)
    else:
        coeffs = _draw_real_coefficients(rng, n, size).astype(complex)
    roots, backward, iters = find_roots_batch(coeffs)
    ok = np.all(np.abs(np.abs(roots) - 1.0) < tol, axis=1)
    idx = np.flatnonzero(ok)
    acc = roots[idx]
    for row, err in zip(acc, backward[idx]):
        zc = circle_classify(RootFindReport(row, float(np.max(err)), iters), tol)
        assert zc.M == 0, "accepted polynomial has zeros off the circle"
    if model is Model.UNIFORM_DISK_COMPLEX:
        angles = np.sort(np.mod(np.angle(acc), TWO_PI), axis=1)
    else:
        angles = _upper_angles(acc, n // 2)
    return idx, angles


def sample_cn_rejection(spec: EnsembleSpec, count: int, max_attempts: int | None = None,
                        workers: int = 1, chunk_size: int = 4096) -> SampleBatch:
    """Zero angles of uniform-disk polynomials with all zeros on the circle.

    Attempts are drawn in chunks of ``chunk_size``, chunk ``k`` using the
    stream derived from ``(spec.seed, k)``.  Accepted samples are taken in
    attempt order, so the batch does not depend on ``workers``.

    Raises
    ------
    AttemptBudgetExhausted
        When ``max_attempts`` is reached first; the exception carries the
        partial batch.
    """
    if spec.model not in (Model.UNIFORM_DISK_COMPLEX, Model.UNIFORM_DISK_REAL):
        raise ValueError("rejection sampling needs a UNIFORM_DISK model")
    n = spec.N
    real = spec.model is Model.UNIFORM_DISK_REAL
    if (real and n > 12) or (not real and n > 9):
        warnings.warn(f"acceptance is tiny at N={n}; expect a long run", stacklevel=2)
    width = n // 2 if real else n
    tol = spec.tol
    workers = max(1, int(workers or 1))
    found, keys = [], []
    attempted = 0
    n_found = 0
    chunk = 0
    exhausted = False
    while n_found < count and not exhausted:
        tasks = [(spec.model, n, spec.seed, chunk + w, chunk_size, tol) for w in range(workers)]
        for k, (idx, angles) in enumerate(map_ordered(_rejection_chunk, tasks, workers)):
            if n_found >= count:
                break
            start = (chunk + k) * chunk_size
            if max_attempts is not None:
                keep = idx < max_attempts - start
                idx, angles = idx[keep], angles[keep]
            keys.append(item_key(spec.seed, chunk + k))
            need = count - n_found
            if len(idx) >= need:
                found.append(angles[:need])
                attempted = start + int(idx[need - 1]) + 1
                n_found = count
                break
            found.append(angles)
            n_found += len(idx)
            attempted = start + chunk_size
            if max_attempts is not None and attempted >= max_attempts:
                attempted = max_attempts
                exhausted = True
                break
        chunk += workers
    angles = np.concatenate(found) if found else np.zeros((0, width))
    batch = SampleBatch(angles, attempted, tuple(keys), "half" if real else "circle", spec,
                        {"acceptance_rate": len(angles) / attempted if attempted else float("nan"),
                         "chunk_size": chunk_size})
    if len(angles) < count:
        raise AttemptBudgetExhausted(batch)
    return batch


# -- Gaussian self-reciprocal model -------------------------------------------


def _gaussian_item(task):
    n, eps, seed, index = task
    rng = item_rng(seed, index)
    sigma = eps / math.sqrt(n)
    a = np.zeros(n, dtype=complex)
    free = (n - 1) // 2
    z = rng.standard_normal((free, 2))
    a[:free] = sigma * (z[:, 0] + 1j * z[:, 1]) / math.sqrt(2)
    if n % 2 == 0:
        a[n // 2 - 1] = sigma * rng.standard_normal()
    a[-1] = 1.0
    for j in range(1, free + 1):
        a[n - j - 1] = np.conj(a[j - 1])
    return a


def gaussian_coefficients(spec: EnsembleSpec, count: int, workers: int = 1) -> np.ndarray:
    """Coefficient rows ``a_1..a_N`` of the Gaussian model, shape (count, N)."""
    if spec.model is not Model.GAUSSIAN_SR:
        raise ValueError("model must be GAUSSIAN_SR")
    tasks = [(spec.N, spec.epsilon, spec.seed, i) for i in range(count)]
    rows = map_ordered(_gaussian_item, tasks, workers)
    return np.array(rows, dtype=complex).reshape(count, spec.N)


def sample_gaussian_sr(spec: EnsembleSpec, count: int, workers: int = 1) -> list[SelfReciprocalPoly]:
    """Self-reciprocal polynomials with ``a_N = 1`` and complex normal ``a_j``.

    ``a_j`` for ``j < N/2`` has ``E|a_j|^2 = sigma^2`` with
    ``sigma = epsilon / sqrt(N)``; ``a_(N-j) = conj(a_j)``; for even ``N`` the
    middle coefficient must be real and is drawn ``N(0, sigma^2)``.
    """
    coeffs = gaussian_coefficients(spec, count, workers)
    return [from_coefficients(row) for row in coeffs]


# -- matrix ensembles --------------------------------------------------------


def haar_unitary(rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Haar-distributed unitary matrices via QR with the R-diagonal phase fix."""
    z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def _matrix_chunk(task):
    model, n, seed, index, size = task
    rng = item_rng(seed, index)
    u = haar_unitary(rng, n, size)
    if model is Model.MATRIX_COE:
        u = np.swapaxes(u, 1, 2) @ u
    try:
        ev = np.linalg.eigvals(u)
    except np.linalg.LinAlgError as exc:
        raise EigensolveFailure(str(exc)) from exc
    return np.sort(np.mod(np.angle(ev), TWO_PI), axis=1)


def sample_matrix_ensemble_angles(spec: EnsembleSpec, count: int, workers: int = 1,
                                  chunk_size: int = 1000) -> SampleBatch:
    """Sorted eigenangles of CUE (``U``) or COE (``U^T U``) matrices."""
    if spec.model not in (Model.MATRIX_COE, Model.MATRIX_CUE):
        raise ValueError("model must be MATRIX_COE or MATRIX_CUE")
    tasks = []
    for i, start in enumerate(range(0, count, chunk_size)):
        tasks.append((spec.model, spec.N, spec.seed, i, min(chunk_size, count - start)))
    parts = map_ordered(_matrix_chunk, tasks, workers)
    angles = np.concatenate(parts) if parts else np.zeros((0, spec.N))
    keys = tuple(item_key(spec.seed, i) for i in range(len(tasks)))
    return SampleBatch(angles, count, keys, "circle", spec)


# -- Metropolis random walk -------------------------------------------------

_TARGET_ACCEPT = 0.3
_ADAPT_EVERY = 100
_BLOCK = 1024


def _wrap(x: np.ndarray, half: bool) -> np.ndarray:
    y = np.mod(x, TWO_PI)
    if half:
        # reflect at 0 and pi; keeps the proposal kernel symmetric
        y = np.where(y > math.pi, TWO_PI - y, y)
    return y


def _mcmc_group(task):
    kind, chain_ids, seed, per_chain, burn_in, thin, scale0 = task
    half = kind.on_half_circle
    n = kind.arity
    span = math.pi if half else TWO_PI
    rngs = [item_rng(seed, c) for c in chain_ids]
    c = len(rngs)
    x = np.empty((c, n))
    for i, rng in enumerate(rngs):
        while True:
            cand = span * rng.random(n)
            if np.isfinite(log_density_batch(kind, cand[None, :])[0]):
                x[i] = cand
                break
    lp = log_density_batch(kind, x)
    adapt = scale0 is None
    scale = np.full(c, 0.5 if adapt else float(scale0))
    total = burn_in + per_chain * thin
    out = np.empty((c, per_chain, n))
    acc_window = np.zeros(c)
    acc_sample = np.zeros(c)
    step = 0
    while step < total:
        blk = min(_BLOCK, total - step)
        noise = np.stack([rng.standard_normal((blk, n)) for rng in rngs], axis=1)
        unif = np.stack([rng.random(blk) for rng in rngs], axis=1)
        for b in range(blk):
            prop = _wrap(x + scale[:, None] * noise[b], half)
            lp_new = log_density_batch(kind, prop)
            with np.errstate(invalid="ignore"):
                ok = np.log(unif[b]) < lp_new - lp
            x = np.where(ok[:, None], prop, x)
            lp = np.where(ok, lp_new, lp)
            step += 1
            if step <= burn_in:
                acc_window += ok
                if adapt and step % _ADAPT_EVERY == 0:
                    scale *= np.exp(acc_window / _ADAPT_EVERY - _TARGET_ACCEPT)
                    # beyond one span the walk is already an independence sampler
                    np.clip(scale, 1e-6, span, out=scale)
                    acc_window[:] = 0
            else:
                acc_sample += ok
                k = step - burn_in
                if k % thin == 0:
                    out[:, k // thin - 1] = x
    rate = acc_sample / max(1, per_chain * thin)
    return out, rate, scale


def mcmc_sample(kind: DensityKind, count: int, burn_in: int = 10_000, thin: int | None = None,
                proposal_scale: float | None = None, seed: int = 0, chains: int | None = None,
                workers: int = 1) -> SampleBatch:
    """Samples from ``exp(log_density(kind, .))`` by Metropolis random walk.

    Gaussian steps on the torus ``[0, 2 pi)^N`` (circular kinds) or on
    ``[0, pi]^M`` with reflecting ends (real kinds).  Chain ``c`` uses the
    stream ``(seed, c)``; several chains are advanced together in numpy.
    With ``proposal_scale=None`` each chain tunes its step size toward 30 %
    acceptance during burn-in only, and keeps it fixed afterwards.
    """
    if proposal_scale is not None and proposal_scale <= 0:
        raise ValueError("proposal_scale must be positive")
    thin = 10 * kind.arity if thin is None else int(thin)
    chains = min(count, 64) if chains is None else int(chains)
    chains = max(1, chains)
    per_chain = -(-count // chains)
    ids = list(range(chains))
    workers = max(1, int(workers or 1))
    groups = [ids[i::workers] for i in range(workers)] if workers > 1 else [ids]
    groups = [g for g in groups if g]
    tasks = [(kind, g, seed, per_chain, burn_in, thin, proposal_scale) for g in groups]
    results = map_ordered(_mcmc_group, tasks, workers)
    by_chain = {}
    rates = {}
    scales = {}
    for g, (out, rate, scale) in zip(groups, results):
        for j, cid in enumerate(g):
            by_chain[cid] = out[j]
            rates[cid] = rate[j]
            scales[cid] = scale[j]
    samples = np.concatenate([by_chain[c] for c in ids])[:count]
    samples = np.sort(samples, axis=1)
    info = {
        "acceptance_rate": float(np.mean([rates[c] for c in ids])),
        "proposal_scale": float(np.mean([scales[c] for c in ids])),
        "chains": chains,
        "burn_in": burn_in,
        "thin": thin,
    }
    keys = tuple(item_key(seed, c) for c in ids)
    spec = EnsembleSpec(Model.MCMC, kind.arity if not kind.on_half_circle else 2 * kind.arity,
                        seed=seed, density=kind)
    return SampleBatch(samples, count, keys, "half" if kind.on_half_circle else "circle", spec, info)


def sample(spec: EnsembleSpec, count: int, workers: int = 1, **kw) -> SampleBatch:
    """Dispatch to the sampler for ``spec.model`` (angle-producing models only)."""
    if spec.model in (Model.UNIFORM_DISK_COMPLEX, Model.UNIFORM_DISK_REAL):
        return sample_cn_rejection(spec, count, workers=workers, **kw)
    if spec.model in (Model.MATRIX_COE, Model.MATRIX_CUE):
        return sample_matrix_ensemble_angles(spec, count, workers=workers, **kw)
    if spec.model is Model.MCMC:
        return mcmc_sample(spec.density, count, seed=spec.seed, workers=workers, **kw)
    raise ValueError(f"{spec.model.value} does not produce angle batches; use sample_gaussian_sr")
