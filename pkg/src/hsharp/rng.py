"""Seed-derived random streams and the worker pool.

Every stochastic computation derives its generators from a user seed and a
tuple of integer keys naming the computation (ball index, stratum index,
...).  Results therefore depend only on ``(seed, keys, stratum count)``,
never on how the work is scheduled across threads.
"""
from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Iterable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")
R = TypeVar("R")

DEFAULT_SEED = 20240517


def generator(seed: int, *key: int) -> np.random.Generator:
    """A generator for the sub-computation named by ``key`` under ``seed``."""
    ss = np.random.SeedSequence(entropy=int(seed) & (2**64 - 1), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(ss))


def thread_count() -> int:
    """Worker cap from ``HSHARP_THREADS``; defaults to the machine's CPU count."""
    raw = os.environ.get("HSHARP_THREADS", "").strip()
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def parallel_map(fn: Callable[[T], R], items: Sequence[T] | Iterable[T]) -> list[R]:
    """Ordered map over ``items`` using up to :func:`thread_count` threads."""
    items = list(items)
    workers = min(thread_count(), len(items))
    if workers <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))
