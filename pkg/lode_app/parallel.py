"""Order-preserving map over a thread pool sized by ``settings.LODE['WORKERS']``."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

from django.conf import settings

T = TypeVar("T")
R = TypeVar("R")


def configured_workers() -> int:
    return int(getattr(settings, "LODE", {}).get("WORKERS", 1))


def ordered_map(func: Callable[[T], R], items: Iterable[T], workers: int | None = None) -> list[R]:
    """Apply ``func`` to every item; results come back in input order."""
    items = list(items)
    workers = configured_workers() if workers is None else workers
    if workers <= 1 or len(items) <= 1:
        return [func(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(func, items))
