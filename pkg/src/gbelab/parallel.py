"""Replica-parallel map with results independent of the worker count.

Replicas are split into fixed-size chunks of consecutive indices.  The chunk
layout depends only on the replica count, each replica draws from its own
stream keyed on its index, and chunk results are concatenated in index
order, so any number of workers yields bit-identical arrays.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

CHUNK = 256
WORKERS_ENV = "GBELAB_WORKERS"


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def chunks(replicas: int, size: int = CHUNK):
    return [np.arange(lo, min(lo + size, replicas)) for lo in range(0, replicas, size)]


def map_replicas(func, replicas: int, workers: int | None = None, chunk: int = CHUNK):
    """Evaluate ``func(indices)`` over all replica chunks.

    ``func`` must be picklable and return an array whose leading axis runs
    over the given indices.  Returns the concatenation in index order.
    """
    parts = chunks(int(replicas), chunk)
    if not parts:
        raise ValueError("replicas must be positive")
    workers = default_workers() if workers is None else int(workers)
    if workers <= 1 or len(parts) == 1:
        results = [func(p) for p in parts]
    else:
        with ProcessPoolExecutor(max_workers=min(workers, len(parts))) as pool:
            results = list(pool.map(func, parts))
    return np.concatenate(results, axis=0)


def finite_rows(values: np.ndarray, max_skip_fraction: float = 1e-3):
    """Drop replicas whose result row is not finite.

    Returns ``(kept, skipped)``.  Raises ``ArithmeticError`` when more than
    ``max_skip_fraction`` of the replicas failed.
    """
    v = np.asarray(values)
    ok = np.all(np.isfinite(v.reshape(v.shape[0], -1)), axis=1)
    skipped = int((~ok).sum())
    if skipped > max_skip_fraction * v.shape[0]:
        raise ArithmeticError(f"{skipped} of {v.shape[0]} replicas failed numerically")
    return v[ok], skipped
