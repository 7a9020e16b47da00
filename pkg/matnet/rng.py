"""Counter-based random streams.

An :class:`Rng` is a value: the seed plus a path of stream indices. Each call
to :meth:`Rng.generator` starts the same Philox stream from the beginning, so
identical values reproduce identical draws bit for bit, in any process.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple

import numpy as np
from scipy.special import ndtri

_TINY = np.finfo(float).tiny


@dataclass(frozen=True)
class Rng:
    seed: int
    stream: Tuple[int, ...] = ()

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        if any(s < 0 for s in self.stream):
            raise ValueError("stream indices must be non-negative")

    def spawn(self, *index: int) -> "Rng":
        """Independent child stream, e.g. ``rng.spawn(replication, 1)``."""
        return Rng(self.seed, self.stream + tuple(int(i) for i in index))

    def generator(self) -> np.random.Generator:
        return np.random.Generator(np.random.Philox(np.random.SeedSequence([self.seed, *self.stream])))


def normal_variates(gen: np.random.Generator, size) -> np.ndarray:
    """Standard normals by inverse CDF of Philox uniforms."""
    u = gen.random(size)
    return ndtri(np.where(u > 0.0, u, _TINY))
