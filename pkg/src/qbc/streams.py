"""Counter-mode random streams keyed by (master seed, trial, tag).

Every draw is ``blake2b(seed, trial, tag, counter)`` truncated to 53 bits, so a
trial's randomness depends only on its own index and a sub-stream's draws do
not shift when another sub-stream consumes more or fewer values. That keeps
trials reproducible under any sharding and keeps, for example, Babe's
measurement draws for Adam's modulated qubit unchanged when the number of
decoys changes.
"""

from __future__ import annotations

import hashlib
import math

_SCALE = 2.0**-53
_MASK64 = (1 << 64) - 1


class Stream:
    __slots__ = ("_base", "_counter")

    def __init__(self, master_seed: int, trial: int, tag: str):
        h = hashlib.blake2b(digest_size=8, key=(master_seed & _MASK64).to_bytes(8, "little"))
        h.update(int(trial).to_bytes(8, "little"))
        h.update(tag.encode())
        self._base = h
        self._counter = 0

    def random(self) -> float:
        h = self._base.copy()
        h.update(self._counter.to_bytes(8, "little"))
        self._counter += 1
        return (int.from_bytes(h.digest(), "little") >> 11) * _SCALE

    def integers(self, high: int) -> int:
        """Uniform integer in ``[0, high)``."""
        return min(int(self.random() * high), high - 1)

    def angle(self) -> float:
        return 2.0 * math.pi * self.random()

    def sample_without_replacement(self, population: int, k: int) -> list[int]:
        if k > population:
            raise ValueError(f"cannot pick {k} distinct items from {population}")
        pool = list(range(population))
        out = []
        for _ in range(k):
            out.append(pool.pop(self.integers(len(pool))))
        return out


class TrialStreams:
    """Factory of tagged streams for one trial; repeated tags share a stream."""

    __slots__ = ("master_seed", "trial", "_cache")

    def __init__(self, master_seed: int, trial: int = 0):
        self.master_seed = int(master_seed)
        self.trial = int(trial)
        self._cache: dict[str, Stream] = {}

    def __call__(self, tag: str) -> Stream:
        s = self._cache.get(tag)
        if s is None:
            s = self._cache[tag] = Stream(self.master_seed, self.trial, tag)
        return s

    def fresh(self, tag: str) -> Stream:
        """A new stream for ``tag`` starting from its first draw."""
        return Stream(self.master_seed, self.trial, tag)


class GeneratorStreams:
    """Adapter so a single ``numpy`` generator can drive a protocol run."""

    def __init__(self, generator):
        self._gen = generator

    def __call__(self, tag: str):
        return _GenStream(self._gen)

    fresh = __call__


class _GenStream:
    def __init__(self, gen):
        self._gen = gen

    def random(self) -> float:
        return float(self._gen.random())

    def integers(self, high: int) -> int:
        return int(self._gen.integers(high))

    def angle(self) -> float:
        return 2.0 * math.pi * self.random()

    def sample_without_replacement(self, population: int, k: int) -> list[int]:
        return [int(x) for x in self._gen.choice(population, size=k, replace=False)]


def as_streams(rng) -> TrialStreams | GeneratorStreams:
    if isinstance(rng, (TrialStreams, GeneratorStreams)):
        return rng
    if isinstance(rng, int):
        return TrialStreams(rng, 0)
    if hasattr(rng, "random") and hasattr(rng, "integers"):
        return GeneratorStreams(rng)
    raise TypeError(f"cannot build random streams from {type(rng).__name__}")
