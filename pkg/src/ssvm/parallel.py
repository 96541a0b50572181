"""Thread-pool mapping that preserves input order.

Every parallel reduction in this package combines results in the fixed
input order, so numeric output is independent of the thread count.
"""

import os
from concurrent.futures import ThreadPoolExecutor


def default_threads():
    """Thread count from SSVM_THREADS, falling back to the CPU count."""
    env = os.environ.get("SSVM_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            raise ValueError("SSVM_THREADS must be an integer, got %r" % env) from None
    return os.cpu_count() or 1


def thread_map(fn, items, threads=1, pool=None):
    """Map ``fn`` over ``items``, returning results in input order."""
    items = list(items)
    if pool is not None:
        return list(pool.map(fn, items))
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as ex:
        return list(ex.map(fn, items))
