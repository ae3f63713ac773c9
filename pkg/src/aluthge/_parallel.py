import os
from concurrent.futures import ThreadPoolExecutor


def worker_count(max_workers=None):
    """Resolve a worker count; ``ALUTHGE_THREADS`` applies when `max_workers` is None.

    0 means one worker per CPU. Unset means serial.
    """
    if max_workers is None:
        raw = os.environ.get("ALUTHGE_THREADS", "1").strip() or "1"
        try:
            max_workers = int(raw)
        except ValueError:
            raise ValueError(f"ALUTHGE_THREADS must be an integer, got {raw!r}")
    if max_workers < 0:
        raise ValueError("worker count must be >= 0")
    if max_workers == 0:
        max_workers = os.cpu_count() or 1
    return max_workers


def ordered_map(fn, items, max_workers=None):
    """``list(map(fn, items))``, optionally on a thread pool; order is preserved."""
    items = list(items)
    n = worker_count(max_workers)
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=min(n, len(items))) as pool:
        return list(pool.map(fn, items))
