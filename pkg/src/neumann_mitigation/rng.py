"""Counter-based random number generation with named streams.

Every random draw in this package is addressed by a ``(seed, stream, draw)``
triple and produced by the Philox 4x32-10 block cipher, so any slice of a
simulation can be regenerated independently, in any order, on any platform.
Draw ``d`` of a stream maps to half ``d & 1`` of cipher block ``d >> 1``;
each block yields two doubles with 53 random bits each.

The same integer arithmetic exists twice: vectorized over numpy arrays here
and as scalar helpers inside the compiled kernels (``_kernels``).  The two
are bit-identical, which the test suite asserts exactly.
"""

from __future__ import annotations

import numpy as np

_M0 = np.uint64(0xD2511F53)
_M1 = np.uint64(0xCD9E8D57)
_W0 = np.uint64(0x9E3779B9)
_W1 = np.uint64(0xBB67AE85)
_MASK32 = np.uint64(0xFFFFFFFF)
_SH32 = np.uint64(32)
_SH5 = np.uint64(5)
_SH6 = np.uint64(6)
_HI26 = np.uint64(1 << 26)
_INV53 = 2.0**-53
_MASK64 = (1 << 64) - 1

# Rows of uniforms are generated in chunks so the round temporaries stay
# cache-sized instead of scaling with the full batch.
_CHUNK_BLOCKS = 1 << 16


def philox4x32(c0, c1, c2, c3, k0, k1):
    """Philox 4x32-10 block function on uint64 arrays holding 32-bit words.

    Returns the four output words.  Matches the published test vectors for
    the 10-round variant.
    """
    for _ in range(10):
        p0 = _M0 * c0
        p1 = _M1 * c2
        c0, c1, c2, c3 = (
            (p1 >> _SH32) ^ c1 ^ k0,
            p1 & _MASK32,
            (p0 >> _SH32) ^ c3 ^ k1,
            p0 & _MASK32,
        )
        k0 = (k0 + _W0) & _MASK32
        k1 = (k1 + _W1) & _MASK32
    return c0, c1, c2, c3


def _to_doubles(r0, r1, r2, r3):
    # 53-bit doubles in [0, 1): high 27 bits from one word, low 26 from the next.
    even = ((r0 >> _SH5) * _HI26 + (r1 >> _SH6)).astype(np.float64) * _INV53
    odd = ((r2 >> _SH5) * _HI26 + (r3 >> _SH6)).astype(np.float64) * _INV53
    return even, odd


def grid_uniforms(seed: int, streams: np.ndarray, count: int) -> np.ndarray:
    """Uniforms for draws ``0..count-1`` of every stream; shape ``(len(streams), count)``."""
    streams = np.ascontiguousarray(streams, dtype=np.uint64)
    if count <= 0:
        return np.empty((streams.size, 0))
    seed = int(seed) & _MASK64
    k0 = np.uint64(seed & 0xFFFFFFFF)
    k1 = np.uint64(seed >> 32)
    nblocks = (count + 1) // 2
    blk = np.arange(nblocks, dtype=np.uint64)
    b_lo = (blk & _MASK32)[None, :]
    b_hi = (blk >> _SH32)[None, :]
    s_lo = (streams & _MASK32)[:, None]
    s_hi = (streams >> _SH32)[:, None]
    out = np.empty((streams.size, 2 * nblocks))
    step = max(1, _CHUNK_BLOCKS // nblocks)
    for i in range(0, streams.size, step):
        j = min(i + step, streams.size)
        r0, r1, r2, r3 = philox4x32(b_lo, b_hi, s_lo[i:j], s_hi[i:j], k0, k1)
        out[i:j, 0::2], out[i:j, 1::2] = _to_doubles(r0, r1, r2, r3)
    return out[:, :count]


def stream_uniforms(seed: int, stream: int, count: int, start: int = 0) -> np.ndarray:
    """Uniforms for draws ``start..start+count-1`` of a single stream."""
    if count <= 0:
        return np.empty(0)
    seed = int(seed) & _MASK64
    stream = int(stream) & _MASK64
    first = start >> 1
    last = (start + count - 1) >> 1
    blk = np.arange(first, last + 1, dtype=np.uint64)
    r0, r1, r2, r3 = philox4x32(
        blk & _MASK32,
        blk >> _SH32,
        np.uint64(stream & 0xFFFFFFFF),
        np.uint64(stream >> 32),
        np.uint64(seed & 0xFFFFFFFF),
        np.uint64(seed >> 32),
    )
    u = np.empty(2 * blk.size)
    u[0::2], u[1::2] = _to_doubles(r0, r1, r2, r3)
    lo = start - 2 * first
    return u[lo : lo + count]


class SeededRng:
    """Stateful cursor over the draw sequence of one ``(seed, stream)`` pair.

    Two cursors with the same seed and stream always yield the same numbers,
    regardless of platform or of what other streams were consumed.
    """

    def __init__(self, seed: int, stream: int = 0):
        self.seed = int(seed) & _MASK64
        self.stream = int(stream) & _MASK64
        self._pos = 0

    def uniform(self) -> float:
        u = stream_uniforms(self.seed, self.stream, 1, self._pos)
        self._pos += 1
        return float(u[0])

    def uniforms(self, count: int) -> np.ndarray:
        u = stream_uniforms(self.seed, self.stream, count, self._pos)
        self._pos += count
        return u

    def spawn(self, stream: int) -> "SeededRng":
        """Fresh cursor on another stream of the same seed."""
        return SeededRng(self.seed, stream)


def chain_stream(trial: int, order: int, truncation: int) -> int:
    """Stream id for measurement round ``trial`` at chain order ``order``.

    Orders ``0..truncation+1`` of one round occupy consecutive ids, so rounds
    may run in any order (or in parallel) without stream collisions.
    """
    return trial * (truncation + 2) + order
