"""Reproducible chunked random streams.

The sample index space is cut into fixed-size chunks.  Chunk ``k`` of a run
seeded with ``seed`` always draws from ``SeedSequence(seed, spawn_key=(k,))``,
so results are identical whatever the number of worker threads; the
reduction concatenates chunk outputs in chunk order.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

CHUNK_SIZE = 1 << 16


def thread_count() -> int:
    raw = os.environ.get("FRACLAP_THREADS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return os.cpu_count() or 1


def chunk_generators(seed: int, chunk: int, count: int = 1) -> list[np.random.Generator]:
    """``count`` independent generators owned by one chunk."""
    root = np.random.SeedSequence(int(seed), spawn_key=(int(chunk),))
    return [np.random.Generator(np.random.PCG64(child)) for child in root.spawn(count)]


def chunk_sizes(n_samples: int, chunk_size: int = CHUNK_SIZE) -> list[int]:
    full, rest = divmod(int(n_samples), chunk_size)
    return [chunk_size] * full + ([rest] if rest else [])


def run_chunks(work, n_samples: int, seed: int, n_streams: int = 1,
               chunk_size: int = CHUNK_SIZE, threads: int | None = None) -> list:
    """Call ``work(size, generators, chunk_index)`` per chunk; results in chunk order."""
    sizes = chunk_sizes(n_samples, chunk_size)
    threads = thread_count() if threads is None else threads

    def task(k):
        return work(sizes[k], chunk_generators(seed, k, n_streams), k)

    if threads <= 1 or len(sizes) <= 1:
        return [task(k) for k in range(len(sizes))]
    with ThreadPoolExecutor(max_workers=min(threads, len(sizes))) as pool:
        return list(pool.map(task, range(len(sizes))))
