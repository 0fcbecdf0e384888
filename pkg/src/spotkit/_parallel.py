"""Optional multi-worker execution with deterministic result order."""

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, TypeVar

from .errors import ValidationError

T = TypeVar("T")
R = TypeVar("R")


def worker_count() -> int:
    """Worker count from the SPOTKIT_WORKERS environment variable (>= 1)."""
    raw = os.environ.get("SPOTKIT_WORKERS", "1")
    try:
        n = int(raw)
    except ValueError:
        raise ValidationError(f"SPOTKIT_WORKERS must be an integer, got {raw!r}") from None
    return max(1, n)


def map_ordered(fn: Callable[[T], R], items: Iterable[T]) -> List[R]:
    """Apply ``fn`` to every item, returning results in input order.

    Work runs on a thread pool when SPOTKIT_WORKERS > 1; results are
    collected by position, so the output never depends on scheduling.
    """
    items = list(items)
    workers = worker_count()
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
