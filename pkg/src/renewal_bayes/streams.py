"""Deterministic, splittable random streams.

Every random draw in the package comes from a :class:`Stream`. A stream is a
node in a tree of :class:`numpy.random.SeedSequence` objects addressed by an
integer key path::

    root seed  ->  (experiment purpose,)  ->  (purpose, replication)  ->  ...

``Stream(seed).child(k)`` appends ``k`` to the spawn key of the underlying seed
sequence, so the same (seed, key path) always yields the same generator, no
matter how many other streams were created before it or on which thread.
Generators are :class:`numpy.random.Philox`, a counter-based bit generator.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Sequence, TypeVar

import numpy as np

T = TypeVar("T")

# Purpose keys for the first level below the root seed.
SYSTEM = 1
BROWNIAN = 2
BROWNIAN_PATHS = 3
SCORE_WALK = 4
BRIDGE = 5


class Stream:
    """A node of the seed tree."""

    __slots__ = ("seed", "key")

    def __init__(self, seed: int, key: Sequence[int] = ()):
        seed = int(seed)
        if seed < 0 or seed >= 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        self.seed = seed
        self.key = tuple(int(k) for k in key)

    def child(self, *key: int) -> "Stream":
        return Stream(self.seed, self.key + tuple(int(k) for k in key))

    def generator(self) -> np.random.Generator:
        ss = np.random.SeedSequence(self.seed, spawn_key=self.key)
        return np.random.Generator(np.random.Philox(ss))

    def __repr__(self):
        return f"Stream(seed={self.seed}, key={self.key})"

    def __eq__(self, other):
        return isinstance(other, Stream) and (self.seed, self.key) == (other.seed, other.key)

    def __hash__(self):
        return hash((self.seed, self.key))


def as_stream(rng) -> Stream:
    """Accept a Stream or an integer seed."""
    if isinstance(rng, Stream):
        return rng
    if isinstance(rng, (int, np.integer)):
        return Stream(int(rng))
    raise TypeError(f"expected Stream or int seed, got {type(rng).__name__}")


def replicate(fn: Callable[[int], T], reps: int, threads: int = 1) -> list[T]:
    """Evaluate ``fn(i)`` for ``i in range(reps)`` and return results in index order.

    Threads only change wall time; each replication derives its own stream from
    its index, and the result list is ordered by index.
    """
    if threads <= 1 or reps <= 1:
        return [fn(i) for i in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(reps)))
