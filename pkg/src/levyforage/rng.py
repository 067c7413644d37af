"""Seeded random streams.

All randomness in the simulator flows through :class:`SeededRng`, a thin
buffered wrapper around numpy's PCG64 bit generator. Only the raw 64-bit
output of the bit generator is consumed (``random_raw``), which numpy keeps
stable across platforms and releases; floats are built from the top 53 bits.
"""

from __future__ import annotations

from statistics import NormalDist

import numpy as np

MASK64 = (1 << 64) - 1
_TWO_M53 = 1.0 / 9007199254740992.0
_STD_NORMAL = NormalDist()


def splitmix64(x: int) -> int:
    """SplitMix64 finalizer. A bijection on 64-bit integers."""
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def mix_seed(base: int, cell: int, replicate: int) -> int:
    """Derive a per-replicate seed.

    ``splitmix64(splitmix64(base) + (cell << 32 | replicate))``. For a fixed
    base the inner key is injective while ``cell`` and ``replicate`` stay
    below 2**32, and both the modular add and the finalizer are bijections,
    so two replicates of one plan can never share a seed.
    """
    if not (0 <= cell < 1 << 32 and 0 <= replicate < 1 << 32):
        raise ValueError("cell and replicate indices must fit in 32 bits")
    key = (cell << 32) | replicate
    return splitmix64((splitmix64(base & MASK64) + key) & MASK64)


def stream_seed(seed: int, stream: int) -> int:
    """Seed of an independent named sub-stream (world vs agent, ...)."""
    return splitmix64((splitmix64(seed & MASK64) ^ (stream * 0xD1B54A32D192ED03)) & MASK64)


class SeededRng:
    """Buffered uniform stream over PCG64.

    Identical seeds and identical call sequences give identical outputs.
    A single instance must not be shared between concurrent consumers.
    """

    __slots__ = ("seed", "_bitgen", "_buf", "_pos", "_block")

    def __init__(self, seed: int, block: int = 4096):
        if seed < 0:
            raise ValueError("seed must be a non-negative 64-bit integer")
        self.seed = int(seed) & MASK64
        self._bitgen = np.random.PCG64(self.seed)
        self._block = block
        self._buf: list[float] = []
        self._pos = 0

    def _raw_uniforms(self, n: int) -> np.ndarray:
        raw = self._bitgen.random_raw(n)
        return (raw >> np.uint64(11)).astype(np.float64) * _TWO_M53

    def uniform(self) -> float:
        """Float in [0, 1) on the 2**-53 lattice."""
        if self._pos == len(self._buf):
            self._buf = self._raw_uniforms(self._block).tolist()
            self._pos = 0
        u = self._buf[self._pos]
        self._pos += 1
        return u

    def uniform_pos(self) -> float:
        """Float in (0, 1]."""
        return 1.0 - self.uniform()

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` floats in [0, 1), drawn from the same stream as :meth:`uniform`."""
        out = np.empty(n)
        take = min(n, len(self._buf) - self._pos)
        out[:take] = self._buf[self._pos:self._pos + take]
        self._pos += take
        if take < n:
            out[take:] = self._raw_uniforms(n - take)
        return out

    def integer(self, n: int) -> int:
        """Integer in [0, n)."""
        return min(int(self.uniform() * n), n - 1)

    def normal(self) -> float:
        """Standard normal draw by inverse CDF."""
        u = self.uniform() + 0.5 * _TWO_M53
        return _STD_NORMAL.inv_cdf(u)
