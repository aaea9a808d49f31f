"""Counter-based pseudo-random generator used by the simulator and trainer.

The generator is a SplitMix64 sequence: draw ``i`` is ``mix64(key + (i+1) * GOLDEN)``
where ``mix64`` is the SplitMix64 finalizer and ``key`` is derived from the user
seed (and an optional stream tag). Because every draw is a pure function of
(seed, stream, counter), byte-identical sequences are produced on any platform
and any Python/numpy version, which is what the reproducibility contract of the
simulator and the CLI manifests relies on.
"""

from __future__ import annotations

import math

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z &= _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


class CounterRng:
    """Deterministic random stream addressed by (seed, stream, counter)."""

    def __init__(self, seed: int, stream: int = 0):
        self._key = _mix64((seed & _MASK64) ^ _mix64(stream ^ 0xA5A5A5A5A5A5A5A5))
        self._counter = 0
        self.seed = seed
        self.stream = stream

    def split(self, tag: int) -> "CounterRng":
        """Independent child stream; does not advance this stream's counter."""
        child = CounterRng(0)
        child._key = _mix64(self._key ^ _mix64(tag))
        child.seed = self.seed
        child.stream = tag
        return child

    def next_u64(self) -> int:
        self._counter += 1
        return _mix64((self._key + self._counter * _GOLDEN) & _MASK64)

    def uniform(self, lo: float = 0.0, hi: float = 1.0) -> float:
        # 53-bit mantissa draw in [0, 1)
        u = (self.next_u64() >> 11) / float(1 << 53)
        return lo + (hi - lo) * u

    def normal(self, mu: float = 0.0, sigma: float = 1.0) -> float:
        # Box-Muller; first uniform shifted into (0, 1] so log() is safe
        u1 = ((self.next_u64() >> 11) + 1) / float(1 << 53)
        u2 = (self.next_u64() >> 11) / float(1 << 53)
        z = math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)
        return mu + sigma * z

    def integers(self, lo: int, hi: int) -> int:
        """Integer in [lo, hi). Modulo bias is negligible for desk-scale ranges."""
        if hi <= lo:
            raise ValueError("empty integer range")
        return lo + self.next_u64() % (hi - lo)

    def poisson(self, lam: float) -> int:
        if lam <= 0.0:
            return 0
        # Knuth's method; fine for the small rates used here
        limit = math.exp(-lam)
        k = 0
        p = 1.0
        while True:
            p *= self.uniform()
            if p <= limit:
                return k
            k += 1

    def normals(self, n: int, mu: float = 0.0, sigma: float = 1.0) -> list[float]:
        return [self.normal(mu, sigma) for _ in range(n)]

    def unit_vector(self, dim: int) -> list[float]:
        while True:
            v = self.normals(dim)
            norm = math.sqrt(sum(x * x for x in v))
            if norm > 1e-12:
                return [x / norm for x in v]
