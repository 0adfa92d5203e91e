"""
Thread-pool wrapper for abstraction and easier testing.

Every computation mapped through here is pure, so results only depend on the inputs; they are
returned in input order to keep reductions deterministic.
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar("T")
R = TypeVar("R")

THREADS_ENV = "ROBIN_GAP_THREADS"


def thread_count(default: int = 1) -> int:
    """Thread cap from ROBIN_GAP_THREADS; invalid values fall back to the default."""
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return default
    try:
        value = int(raw)
    except ValueError:
        logging.warning(f"Ignoring non-integer {THREADS_ENV}={raw!r}")
        return default
    if value < 1:
        logging.warning(f"Ignoring {THREADS_ENV}={value}; it must be at least 1")
        return default
    return value


def parallel_map(func: Callable[[T], R], items: Iterable[T], threads: Optional[int] = None) -> List[R]:
    """
    Map func over items with at most `threads` workers (ROBIN_GAP_THREADS when omitted).

    Returns:
        Results in the order of items
    """
    items = list(items)
    workers = threads if threads is not None else thread_count()
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as executor:
        return list(executor.map(func, items))
