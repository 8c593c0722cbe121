"""Counter-based random streams.

Every draw is addressed by ``(seed, stream, row)``: row ``i`` of a stream is a
pure function of those three integers, so any partition of ``[0, n)`` into
batches (or threads) reproduces the same numbers.  The bits come from numpy's
Philox4x64 generator with its 256-bit counter positioned per row; normals are
obtained by inverse-CDF so each coordinate consumes exactly one 64-bit word.
"""

from __future__ import annotations

import numpy as np
from numpy.random import Philox
from scipy.special import ndtri

_MASK64 = (1 << 64) - 1
_WORDS_PER_BLOCK = 4


def _raw_rows(seed: int, stream: int, start: int, n: int, dim: int) -> np.ndarray:
    if n < 0 or start < 0:
        raise ValueError("start and n must be non-negative")
    blocks = max(1, -(-dim // _WORDS_PER_BLOCK))
    gen = Philox(key=[seed & _MASK64, stream & _MASK64], counter=start * blocks)
    raw = gen.random_raw(n * blocks * _WORDS_PER_BLOCK)
    return raw.reshape(n, blocks * _WORDS_PER_BLOCK)[:, :dim]


def uniform_rows(seed: int, stream: int, start: int, n: int, dim: int) -> np.ndarray:
    """Open-interval uniforms of shape ``(n, dim)`` for rows ``start..start+n-1``."""
    raw = _raw_rows(seed, stream, start, n, dim)
    return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53


def normal_rows(seed: int, stream: int, start: int, n: int, dim: int) -> np.ndarray:
    """Standard normals of shape ``(n, dim)`` for rows ``start..start+n-1``."""
    return ndtri(uniform_rows(seed, stream, start, n, dim))


class Stream:
    """Sequential cursor over one counter-based stream.

    Convenience for algorithms that consume rows in order; ``position`` is the
    next row index, so a restarted run can seek and resume exactly.
    """

    def __init__(self, seed: int, stream: int, position: int = 0):
        self.seed = int(seed)
        self.stream = int(stream)
        self.position = int(position)

    def normal(self, n: int, dim: int) -> np.ndarray:
        out = normal_rows(self.seed, self.stream, self.position, n, dim)
        self.position += n
        return out

    def uniform(self, n: int, dim: int) -> np.ndarray:
        out = uniform_rows(self.seed, self.stream, self.position, n, dim)
        self.position += n
        return out

    def generator(self) -> np.random.Generator:
        """A conventional numpy Generator keyed off this stream (consumes one row)."""
        word = int(_raw_rows(self.seed, self.stream, self.position, 1, 1)[0, 0])
        self.position += 1
        return np.random.Generator(Philox(key=[word, self.stream & _MASK64]))
