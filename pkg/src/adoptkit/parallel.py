"""Deterministic indexed parallel map.

Work items are pure functions of their index (callers derive per-index RNG
seeds), so results are identical for any thread count; only wall-clock time
changes.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, TypeVar

T = TypeVar("T")


def indexed_map(fn: Callable[[int], T], n: int, threads: int = 1) -> list[T]:
    if threads <= 1:
        return [fn(i) for i in range(n)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(n)))
