"""Order-preserving map over a process pool."""
from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

T = TypeVar("T")
R = TypeVar("R")

__all__ = ["ordered_map", "resolve_workers"]


def resolve_workers(workers: int | None) -> int:
    if workers is None or workers <= 0:
        return os.cpu_count() or 1
    return int(workers)


def ordered_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T], workers: int | None = 1) -> list[R]:
    """``[fn(x) for x in items]``, optionally spread over worker processes.

    Results always come back in input order, so any reduction performed by
    the caller is independent of the worker count. ``fn`` must be picklable
    when ``workers > 1``.
    """
    items = list(items)
    n = resolve_workers(workers)
    if n == 1 or len(items) <= 1:
        return [fn(x) for x in items]
    chunk = max(1, len(items) // (4 * n))
    with ProcessPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items, chunksize=chunk))
