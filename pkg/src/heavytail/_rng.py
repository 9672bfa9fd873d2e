"""Counter-based random streams and the worker pool.

Samples are produced in fixed-size blocks; block ``b`` of a run seeded with
``seed`` always comes from a Philox generator keyed by ``(seed, b)``.  Output
therefore depends only on ``(seed, sample index)``, never on how many
workers evaluated the blocks.
"""

import os
from concurrent.futures import ThreadPoolExecutor

import numpy as np

BLOCK_SIZE = 1 << 16


def block_generator(seed, block):
    key = np.array([seed & 0xFFFFFFFFFFFFFFFF, block], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key))


def block_sizes(count, block_size=BLOCK_SIZE):
    """Sizes of the blocks covering ``count`` samples, in order."""
    full, rest = divmod(int(count), block_size)
    sizes = [block_size] * full
    if rest:
        sizes.append(rest)
    return sizes


def worker_count(requested=None):
    """Number of worker threads: ``requested`` capped by HEAVYTAIL_THREADS."""
    cap = os.environ.get("HEAVYTAIL_THREADS")
    n = requested if requested is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, int(n))


def ordered_map(fn, items, workers=None):
    """``list(map(fn, items))`` on a thread pool; result order is input order."""
    items = list(items)
    nw = min(worker_count(workers), len(items)) if items else 1
    if nw <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=nw) as pool:
        return list(pool.map(fn, items))
