"""
Shared runtime pieces: logging setup, the worker pool, seed mixing
"""

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, List, Optional, TypeVar

T = TypeVar('T')
R = TypeVar('R')

LOG_FORMAT = '%(asctime)s - %(name)s - %(levelname)s - %(message)s'

MASK64 = (1 << 64) - 1


def configure_logging(level: Optional[str] = None) -> None:
    """Configure root logging once for CLI and scripts"""
    if level is None:
        level = os.getenv('CTLAB_LOG_LEVEL', 'INFO')
    logging.basicConfig(level=getattr(logging, str(level).upper(), logging.INFO),
                        format=LOG_FORMAT)


def splitmix64(x: int) -> int:
    """One splitmix64 output step on a 64-bit state"""
    z = (x + 0x9E3779B97F4A7C15) & MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def substream_seed(seed: int, *keys: int) -> int:
    """
    Derive an independent 64-bit seed from a master seed and integer keys.

    The mix is fixed so (seed, keys) names the same stream on every build.
    """
    state = splitmix64(int(seed) & MASK64)
    for key in keys:
        state = splitmix64(state ^ (int(key) & MASK64))
    return state


def parallel_map(fn: Callable[[T], R], items: Iterable[T], threads: int = 1) -> List[R]:
    """Map fn over items on a thread pool; results keep input order"""
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=min(threads, len(items))) as pool:
        return list(pool.map(fn, items))
