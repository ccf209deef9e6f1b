"""
Worker-pool helpers shared by data generation and training.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

from .constants import THREADS_ENV_VAR

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def resolve_workers(workers: Optional[int] = None) -> int:
    """
    Number of worker threads to use.

    An explicit argument wins, then the FNO_THREADS environment variable,
    then the machine's CPU count.
    """

    if workers is not None:
        return max(1, int(workers))
    raw = os.environ.get(THREADS_ENV_VAR)
    if raw:
        try:
            value = int(raw)
            if value >= 1:
                return value
        except ValueError:
            pass
        logger.warning("Ignoring invalid %s=%r; using CPU count.", THREADS_ENV_VAR, raw)
    return os.cpu_count() or 1


def ordered_map(fn: Callable[[T], R], items: Sequence[T], workers: Optional[int] = None) -> List[R]:
    """
    Apply fn to every item, possibly concurrently, returning results in input order.
    """

    count = min(resolve_workers(workers), len(items))
    if count <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=count) as pool:
        return list(pool.map(fn, items))
