"""Deterministic parallel execution for seeded Monte Carlo drivers.

Work items carry their own child seeds, results are gathered in input
order, and reductions happen serially on the gathered list, so the
output is a function of the seeds alone - never of the worker count.
"""

from __future__ import annotations

import multiprocessing
import os


def thread_count(requested: int | None = None) -> int:
    """Resolve a worker count: explicit argument, OCCUTHRESH_THREADS, or CPU count."""
    if requested is not None:
        if requested < 1:
            raise ValueError(f"thread count must be >= 1, got {requested}")
        return requested
    env = os.environ.get("OCCUTHRESH_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items: list, threads: int) -> list:
    """Map ``fn`` over ``items`` preserving order; serial when threads <= 1.

    ``fn`` must be a module-level function (it is pickled to worker
    processes).
    """
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    chunk = max(1, len(items) // (threads * 8))
    with multiprocessing.Pool(processes=threads) as pool:
        return pool.map(fn, items, chunksize=chunk)
