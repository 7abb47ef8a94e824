"""Deterministic Monte Carlo fan-out over stream indices.

Each trial ``i`` draws from ``stream(seed, i)`` and results are returned in
index order, so output is identical for any number of workers.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from typing import Callable

import numpy as np

from .ensembles import stream

__all__ = ["default_jobs", "run_trials"]


def default_jobs() -> int:
    return max(1, len(os.sched_getaffinity(0)) if hasattr(os, "sched_getaffinity") else os.cpu_count() or 1)


def _chunk(fn: Callable, seed: int, lo: int, hi: int) -> list:
    return [fn(stream(seed, i)) for i in range(lo, hi)]


def run_trials(
    fn: Callable[[np.random.Generator], object],
    seed: int,
    n: int,
    jobs: int = 1,
    offset: int = 0,
) -> list:
    """Evaluate ``fn(stream(seed, offset + i))`` for ``i < n``, in order.

    With ``jobs > 1`` the work is split into contiguous index blocks across
    processes; ``fn`` must then be picklable (a module-level function or a
    ``functools.partial`` of one).
    """
    if n <= 0:
        return []
    if jobs <= 1 or n < 2 * jobs:
        return _chunk(fn, seed, offset, offset + n)
    bounds = np.linspace(offset, offset + n, jobs + 1).astype(int)
    with ProcessPoolExecutor(max_workers=jobs) as pool:
        parts = pool.map(partial(_chunk, fn, seed), bounds[:-1], bounds[1:])
        out: list = []
        for part in parts:
            out.extend(part)
    return out
