"""Counter-based random streams derived from one user seed.

Every Monte-Carlo estimator splits its work into fixed-size batches.  Batch
``(stream, index)`` draws from ``Philox`` seeded by
``SeedSequence(seed, spawn_key=(stream, index))``, so results do not depend on
how batches are distributed over threads.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor

import numpy as np


def batch_rng(seed: int, *key: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(ss))


def batch_sizes(total: int, batch: int) -> list[int]:
    full, rest = divmod(int(total), int(batch))
    return [batch] * full + ([rest] if rest else [])


def run_batches(fn, args: list, threads: int = 1) -> list:
    """Apply ``fn`` to each argument tuple; results come back in input order."""
    if threads <= 1 or len(args) <= 1:
        return [fn(*a) for a in args]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(lambda a: fn(*a), args))
