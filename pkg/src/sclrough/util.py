"""Small shared runtime helpers."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor

__all__ = ["thread_count", "parallel_map"]


def thread_count() -> int:
    """Worker cap for parallel sub-runs, from SCLROUGH_THREADS (default 1)."""
    raw = os.environ.get("SCLROUGH_THREADS", "")
    try:
        n = int(raw)
    except ValueError:
        return 1
    return max(1, n)


def parallel_map(fn, items):
    """Map ``fn`` over ``items`` preserving order.

    Runs on a thread pool when SCLROUGH_THREADS > 1; results are collected in
    input order either way, so output does not depend on scheduling.
    """
    items = list(items)
    if thread_count() <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=thread_count()) as pool:
        return list(pool.map(fn, items))
