"""Reproducible random streams for replicated Monte Carlo work.

Every replicate draws from its own generator derived from (seed, replicate index),
so results do not depend on how many workers run or in which order they finish.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, TypeVar

import numpy as np

logger = logging.getLogger(__name__)

T = TypeVar("T")
R = TypeVar("R")


def replicate_rng(seed: int, index: int, *, stream: int = 0) -> np.random.Generator:
    """Independent generator for replicate `index`; `stream` separates unrelated uses of one seed."""
    seq = np.random.SeedSequence(entropy=int(seed), spawn_key=(int(stream), int(index)))
    return np.random.default_rng(seq)


def default_workers() -> int:
    raw = os.environ.get("MEV_WORKERS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            logger.warning("ignoring non-integer MEV_WORKERS=%r", raw)
    return min(8, os.cpu_count() or 1)


def ordered_map(fn: Callable[[T], R], items: Sequence[T], *, workers: Optional[int] = None) -> List[R]:
    """Map `fn` over `items` on a thread pool; output order always follows input order."""
    n_workers = default_workers() if workers is None else max(1, int(workers))
    if n_workers == 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n_workers) as pool:
        return list(pool.map(fn, items))
