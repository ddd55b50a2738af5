"""Bounded thread pool with order-preserving results."""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Callable, Sequence, TypeVar

from phtk.config import get_threads

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def run_ordered(
    fn: Callable[[T], R],
    items: Sequence[T],
    threads: int | None = None,
    step: str = "work",
    on_progress: Callable[[dict], None] | None = None,
) -> list[R]:
    """Apply ``fn`` to every item, at most ``threads`` at a time.

    Results come back in input order whatever the completion order.
    The first exception raised by ``fn`` propagates after the pool drains.
    """
    total = len(items)
    workers = max(1, min(threads or get_threads(), total or 1))
    results: list[R | None] = [None] * total
    done = 0

    def _report() -> None:
        if on_progress:
            on_progress({"step": step, "current": done, "total": total})
        else:
            logger.debug("%s: %d/%d", step, done, total)

    if workers == 1:
        for i, item in enumerate(items):
            results[i] = fn(item)
            done += 1
            _report()
        return results  # type: ignore[return-value]

    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = {pool.submit(fn, item): i for i, item in enumerate(items)}
        for future in as_completed(futures):
            results[futures[future]] = future.result()
            done += 1
            _report()
    return results  # type: ignore[return-value]
