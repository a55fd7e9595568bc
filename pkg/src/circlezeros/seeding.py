"""Per-item random streams derived from ``(master seed, item index)``.

Each item gets its own Philox (counter-based) generator keyed by a hash of the
master seed and the item index, so results never depend on how items are
spread over workers.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence

import numpy as np


def item_key(master_seed: int, index: int) -> int:
    """128-bit Philox key for item ``index`` as a Python int."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(index),))
    lo, hi = ss.generate_state(2, dtype=np.uint64)
    return int(lo) | (int(hi) << 64)


def item_rng(master_seed: int, index: int) -> np.random.Generator:
    key = item_key(master_seed, index)
    return np.random.Generator(np.random.Philox(key=key))


def map_ordered(fn: Callable, tasks: Sequence, workers: int = 1) -> list:
    """``[fn(t) for t in tasks]``, optionally on a process pool; order is kept."""
    if workers is None or workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, tasks))


def chunked(total: int, size: int) -> Iterable[tuple[int, int]]:
    """``(index, length)`` chunks covering ``total`` items."""
    for i, start in enumerate(range(0, total, size)):
        yield i, min(size, total - start)
