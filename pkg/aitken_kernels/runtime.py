"""
Seeded random streams and the ordered parallel map used by checkers and sweeps.
"""
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

import numpy as np

from .config import get_settings

T = TypeVar("T")
R = TypeVar("R")


def make_rng(seed: int, *key: int) -> np.random.Generator:
    """Counter-based generator for (seed, key...); equal inputs give equal streams."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, *key])))


def spawn_rngs(seed: int, n: int) -> List[np.random.Generator]:
    """Split one seed into n independent Philox streams."""
    children = np.random.SeedSequence(seed).spawn(n)
    return [np.random.Generator(np.random.Philox(child)) for child in children]


def parallel_map(
    fn: Callable[[T], R],
    items: Iterable[T],
    max_workers: Optional[int] = None,
) -> List[R]:
    """Map fn over items on a thread pool; results keep input order."""
    items = list(items)
    workers = max_workers or get_settings().runtime.threads
    if workers <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
        return list(pool.map(fn, items))
