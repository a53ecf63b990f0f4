"""Ordered worker-pool map with results merged in input order.

Worker count comes from the GROUNDBOX_WORKERS environment variable unless
given explicitly; per-item seeding elsewhere keeps output independent of
scheduling, so any worker count produces identical results.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

WORKERS_ENV = "GROUNDBOX_WORKERS"


def default_workers() -> int:
    raw = os.environ.get(WORKERS_ENV, "")
    try:
        n = int(raw)
    except ValueError:
        n = 0
    return n if n > 0 else 1


def ordered_map(fn: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    work: Sequence[T] = list(items)
    n = workers if workers and workers > 0 else default_workers()
    if n <= 1 or len(work) <= 1:
        return [fn(item) for item in work]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, work))
