"""Deterministic replicate-level parallelism.

Replicate ``i`` always draws from ``SeedSequence(seed, spawn_key=(i,))``,
so results are identical for every worker count and schedule.
"""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor

import numpy as np

__all__ = ["THREADS_ENV", "default_threads", "replicate_rng", "replicate_map"]

THREADS_ENV = "RANKENV_THREADS"


def default_threads() -> int:
    try:
        return max(1, int(os.environ.get(THREADS_ENV, "1")))
    except ValueError:
        return 1


def replicate_rng(seed: int, i: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(int(i),)))


def _run_chunk(fn, seed, idx, args):
    return [fn(i, replicate_rng(seed, i), *args) for i in idx]


def replicate_map(fn, n: int, seed: int = 0, threads: int | None = None, args: tuple = ()) -> list:
    """``[fn(i, rng_i, *args) for i in range(n)]``, optionally in worker processes.

    ``fn`` must be importable (a module-level function) when
    ``threads > 1``.  Results come back in index order.
    """
    threads = default_threads() if threads is None else max(1, int(threads))
    if threads == 1 or n <= 1:
        return _run_chunk(fn, seed, range(n), args)
    chunks = [list(range(n))[k::threads] for k in range(threads)]
    out = [None] * n
    with ProcessPoolExecutor(max_workers=threads) as ex:
        futs = [ex.submit(_run_chunk, fn, seed, c, args) for c in chunks]
        for c, f in zip(chunks, futs):
            for i, res in zip(c, f.result()):
                out[i] = res
    return out
