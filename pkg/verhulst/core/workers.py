"""Ordered fan-out of independent scenario tasks."""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from typing import Callable, Iterable, List, TypeVar

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def map_ordered(func: Callable[[T], R], items: Iterable[T], workers: int = 1) -> List[R]:
    """Apply *func* to every item and return results in input order.

    ``workers > 1`` runs the tasks in a process pool, so *func* and the items
    must be picklable (module-level callables, plain data).
    """

    tasks = list(items)
    if workers < 1:
        raise ValueError("workers must be >= 1")
    if workers == 1 or len(tasks) < 2:
        return [func(task) for task in tasks]
    pool_size = min(workers, len(tasks))
    logger.debug("Dispatching %d tasks to %d worker processes", len(tasks), pool_size)
    with ProcessPoolExecutor(max_workers=pool_size) as executor:
        return list(executor.map(func, tasks))


__all__ = ["map_ordered"]
