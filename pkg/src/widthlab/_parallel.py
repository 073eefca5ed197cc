"""Seeded block streams and a thread pool capped by WIDTHLAB_THREADS."""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

BLOCK = 4096


def worker_count() -> int:
    env = os.environ.get("WIDTHLAB_THREADS")
    cap = os.cpu_count() or 1
    if env:
        try:
            cap = max(1, min(cap, int(env)))
        except ValueError:
            pass
    return cap


def block_rng(seed: int, block: int, stream: int = 0) -> np.random.Generator:
    """Counter-based generator for one block; independent of how blocks are scheduled."""
    ss = np.random.SeedSequence(int(seed), spawn_key=(int(stream), int(block)))
    return np.random.Generator(np.random.Philox(ss))


def blocks(count: int, size: int = BLOCK) -> list[tuple[int, int]]:
    """(block index, block length) pairs covering ``count`` items."""
    return [(b, min(size, count - start)) for b, start in enumerate(range(0, count, size))]


def pmap(fn: Callable[[T], R], items: Iterable[T]) -> list[R]:
    items = list(items)
    workers = min(worker_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
