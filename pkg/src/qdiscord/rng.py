"""Reproducible random streams and the Ginibre/Haar primitives built on them.

Every stream is a Philox4x64-10 generator keyed by ``master_seed``.  Stream
``i`` starts at Philox counter ``(0, 0, i, 0)``, so distinct streams never
overlap within 2**128 blocks and are reproducible independently of the order
in which they are created.  This is what lets parallel trials reproduce the
serial result bit-for-bit.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PRNG_ID = "numpy.Philox4x64-10 key=master_seed counter=(0,0,stream,0)"
_U64 = (1 << 64) - 1


@dataclass(frozen=True)
class SeededSampler:
    """Value type naming one random stream: ``(master_seed, counter)``."""

    master_seed: int
    counter: int = 0

    def __post_init__(self):
        if not 0 <= int(self.master_seed) <= _U64:
            raise ValueError(f"master_seed must fit in 64 unsigned bits, got {self.master_seed}")
        if not 0 <= int(self.counter) <= _U64:
            raise ValueError(f"counter must fit in 64 unsigned bits, got {self.counter}")

    def generator(self):
        """Fresh generator positioned at the start of this stream."""
        bitgen = np.random.Philox(key=int(self.master_seed), counter=[0, 0, int(self.counter), 0])
        return np.random.Generator(bitgen)

    def spawn(self, index):
        return SeededSampler(self.master_seed, index)


def check_random_state(random_state):
    """Turn None, an int, a :class:`SeededSampler` or a Generator into a Generator."""
    if random_state is None:
        return np.random.default_rng()
    if isinstance(random_state, np.random.Generator):
        return random_state
    if isinstance(random_state, SeededSampler):
        return random_state.generator()
    if isinstance(random_state, (int, np.integer)) and not isinstance(random_state, bool):
        return SeededSampler(int(random_state)).generator()
    raise TypeError(f"cannot build a random generator from {type(random_state).__name__}")


def ginibre(rows, cols, random_state=None):
    rng = check_random_state(random_state)
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(d, random_state=None):
    """Haar-random unitary: QR of a Ginibre matrix with the phases of R's diagonal removed."""
    q, r = np.linalg.qr(ginibre(d, d, random_state))
    phases = np.diagonal(r) / np.abs(np.diagonal(r))
    return q * phases
