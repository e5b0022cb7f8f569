"""Deterministic counter-based random streams.

Dataset synthesis must be reproducible bit-for-bit across platforms and
across partial regenerations (emitting 5 images or 500 must agree on the
first 5), so we do not rely on any stateful library generator. Instead
each consumer owns a `CounterStream`, a SplitMix64-style generator driven
by a pure counter:

    out[i] = mix64(key + (i + 1) * GAMMA)

where ``mix64`` is the SplitMix64 finalizer and the key is derived from a
``(seed, stream)`` pair. All arithmetic is unsigned 64-bit (wrapping), so
the sequence depends only on the integers fed in, never on platform,
thread count, or draw batching. Doubles are the usual 53-bit conversion
``(out >> 11) * 2**-53``.
"""

from __future__ import annotations

import numpy as np

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U64 = np.uint64
_DOUBLE_SCALE = float(2.0**-53)


def mix64(z: np.ndarray) -> np.ndarray:
    """SplitMix64 finalizer over a uint64 array (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    z = (z ^ (z >> _U64(30))) * _MIX1
    z = (z ^ (z >> _U64(27))) * _MIX2
    return z ^ (z >> _U64(31))


def _derive_key(seed: int, stream: int) -> np.uint64:
    s = np.asarray([seed & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    t = np.asarray([stream & 0xFFFFFFFFFFFFFFFF], dtype=np.uint64)
    return np.uint64(mix64(mix64(s) ^ (t + _GAMMA))[0])


class CounterStream:
    """Stateless-core RNG: the n-th draw is a pure function of (seed, stream, n).

    Separate ``stream`` ids give statistically independent sequences, which
    is how per-image substreams are carved out of one dataset seed.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self._key = _derive_key(seed, stream)
        self._count = 0

    def raw(self, n: int) -> np.ndarray:
        """Next ``n`` raw uint64 words."""
        idx = np.arange(self._count + 1, self._count + n + 1, dtype=np.uint64)
        self._count += n
        return mix64(self._key + idx * _GAMMA)

    def random(self, *shape: int) -> np.ndarray | float:
        """Uniform float64 in [0, 1); scalar when called with no shape."""
        n = int(np.prod(shape)) if shape else 1
        u = (self.raw(n) >> _U64(11)).astype(np.float64) * _DOUBLE_SCALE
        if not shape:
            return float(u[0])
        return u.reshape(shape)

    def uniform(self, low: float, high: float, *shape: int) -> np.ndarray | float:
        return low + (high - low) * self.random(*shape)
