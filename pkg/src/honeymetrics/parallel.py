"""Deterministic chunked execution for Monte Carlo work.

Trials are split into fixed-size chunks; chunk c gets the child seed
``SeedSequence(seed, spawn_key=(c,))``, so results are a function of
(seed, chunk_size) alone.  Chunks may run on a thread pool (numpy
releases the GIL in the hot loops) but are always combined in chunk
order, so the worker count never changes the output.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

DEFAULT_CHUNK = 65_536


def chunk_rng(seed: int, chunk_index: int) -> np.random.Generator:
    """The RNG stream owned by one chunk of one seeded computation."""
    return np.random.Generator(
        np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(chunk_index,)))
    )


def chunk_sizes(total: int, chunk_size: int) -> list[int]:
    full, rest = divmod(total, chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_chunked(
    worker: Callable[[int, int], T],
    total: int,
    chunk_size: int = DEFAULT_CHUNK,
    threads: int | None = None,
) -> list[T]:
    """Run ``worker(chunk_index, chunk_n)`` over all chunks, results in order."""
    sizes = chunk_sizes(total, chunk_size)
    threads = threads if threads is not None else min(len(sizes), os.cpu_count() or 1)
    if threads <= 1 or len(sizes) <= 1:
        return [worker(c, n) for c, n in enumerate(sizes)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        futures = [pool.submit(worker, c, n) for c, n in enumerate(sizes)]
        return [f.result() for f in futures]
