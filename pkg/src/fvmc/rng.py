"""Reproducible random streams.

All randomness flows from integer seeds through counter-based Philox
generators. Replica-level parallelism derives one 64-bit seed per replica
from the master seed, so results are identical for any worker count and
any execution order.
"""

from __future__ import annotations

import numpy as np

__all__ = ["make_stream", "replica_seeds", "ScalarDraws"]


def make_stream(seed: int) -> np.random.Generator:
    """Return a fresh Philox generator for the given integer seed."""
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(int(seed))))


def replica_seeds(master_seed: int, count: int) -> np.ndarray:
    """Derive `count` independent 64-bit replica seeds from a master seed.

    Deterministic: replica r's seed depends only on (master_seed, r).
    """
    return np.random.SeedSequence(int(master_seed)).generate_state(count, dtype=np.uint64)


class ScalarDraws:
    """Buffered scalar draws from a Generator.

    Event loops consume exponential and uniform variates one at a time;
    drawing them in blocks amortizes the per-call overhead without changing
    determinism (consumption order is a fixed function of the seed).
    """

    __slots__ = ("_rng", "_block", "_exp", "_iexp", "_uni", "_iuni")

    def __init__(self, rng: np.random.Generator, block: int = 4096):
        self._rng = rng
        self._block = block
        self._exp = rng.exponential(size=block)
        self._iexp = 0
        self._uni = rng.random(size=block)
        self._iuni = 0

    def exponential(self) -> float:
        """One Exp(1) variate."""
        i = self._iexp
        if i == self._block:
            self._exp = self._rng.exponential(size=self._block)
            i = 0
        self._iexp = i + 1
        return self._exp[i]

    def uniform(self) -> float:
        """One U[0,1) variate."""
        i = self._iuni
        if i == self._block:
            self._uni = self._rng.random(size=self._block)
            i = 0
        self._iuni = i + 1
        return self._uni[i]

    def index_excluding(self, n: int, skip: int) -> int:
        """Uniform index in {0..n-1} \\ {skip}; requires n >= 2."""
        j = int(self.uniform() * (n - 1))
        if j >= n - 1:  # guard against u spuriously rounding to 1.0
            j = n - 2
        return j + 1 if j >= skip else j
