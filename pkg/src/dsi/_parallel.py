"""Deterministic per-class worker pool.

Parallelism is capped by the ``DSI_THREADS`` environment variable
(0 or unset = one worker per CPU). Results are always gathered in input
order, so output is byte-identical regardless of the worker count.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

from .errors import UsageError

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    raw = os.environ.get("DSI_THREADS", "").strip()
    if raw == "":
        n = 0
    else:
        try:
            n = int(raw)
        except ValueError:
            raise UsageError(f"DSI_THREADS must be an integer, got {raw!r}") from None
        if n < 0:
            raise UsageError(f"DSI_THREADS must be >= 0, got {n}")
    if n == 0:
        return os.cpu_count() or 1
    return n


def map_in_order(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """Apply ``fn`` to every item, preserving item order in the result."""
    items = list(items)
    workers = min(worker_count(), len(items)) or 1
    if workers == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
