"""Ordered thread-pool map capped by DRIFT_SPECTRAL_THREADS (0 or unset = auto)."""

import os
from concurrent.futures import ThreadPoolExecutor

ENV_THREADS = "DRIFT_SPECTRAL_THREADS"


def thread_count():
    raw = os.environ.get(ENV_THREADS, "0").strip() or "0"
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n <= 0:
        n = min(8, os.cpu_count() or 1)
    return n


def ordered_map(fn, items):
    """list(map(fn, items)) evaluated concurrently; result order is input order."""
    items = list(items)
    n = thread_count()
    if n == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))
