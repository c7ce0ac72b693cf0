"""Counter-based random source.

Every draw is a pure function of ``(seed, stream, position)``: the 64-bit
word at a position is the SplitMix64 finaliser applied to
``stream_key(seed, stream) + (position + 1) * GOLDEN``.  Because nothing
depends on call order, draw ``i`` of a Monte-Carlo run can be generated in
any order (or all at once, vectorised) and the result is identical.

Uniform doubles take the top 53 bits.  Standard complex Gaussians
(``E|z|^2 = 1``) come from Box-Muller on consecutive pairs of uniforms.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_M1 = 0xBF58476D1CE4E5B9
_M2 = 0x94D049BB133111EB
_STREAM_SALT = 0xD1B54A32D192ED03


def _mix64_int(z: int) -> int:
    z &= MASK64
    z = ((z ^ (z >> 30)) * _M1) & MASK64
    z = ((z ^ (z >> 27)) * _M2) & MASK64
    return z ^ (z >> 31)


def _mix64(z: np.ndarray) -> np.ndarray:
    # uint64 array arithmetic wraps modulo 2**64
    z = (z ^ (z >> np.uint64(30))) * np.uint64(_M1)
    z = (z ^ (z >> np.uint64(27))) * np.uint64(_M2)
    return z ^ (z >> np.uint64(31))


def stream_key(seed: int, stream: int) -> int:
    return _mix64_int((seed & MASK64) ^ _mix64_int((stream * _STREAM_SALT + GOLDEN) & MASK64))


def _words(keys: np.ndarray, start: int, count: int) -> np.ndarray:
    """64-bit words at positions ``start .. start+count-1`` for every key."""
    pos = np.arange(start + 1, start + count + 1, dtype=np.uint64) * np.uint64(GOLDEN)
    with np.errstate(over="ignore"):
        return _mix64(keys[:, None] + pos[None, :])


def _to_unit(words: np.ndarray) -> np.ndarray:
    return (words >> np.uint64(11)).astype(np.float64) * (1.0 / 9007199254740992.0)


def _box_muller(u: np.ndarray) -> np.ndarray:
    # u has an even trailing length; pairs (u[2j], u[2j+1]) -> one complex normal
    u1 = 1.0 - u[..., 0::2]  # in (0, 1]
    u2 = u[..., 1::2]
    r = np.sqrt(-np.log(u1))  # sqrt(-2 log u1) / sqrt(2)
    phase = 2.0 * np.pi * u2
    return r * np.cos(phase) + 1j * (r * np.sin(phase))


def batch_uniforms(seed: int, streams, count: int, start: int = 0) -> np.ndarray:
    """Uniforms in [0, 1), one row per stream; row ``i`` equals
    ``RngState(seed, streams[i]).uniforms(count)`` after skipping ``start``."""
    streams = np.asarray(streams, dtype=np.int64).ravel()
    keys = np.array([stream_key(seed, int(s)) for s in streams], dtype=np.uint64)
    return _to_unit(_words(keys, start, count))


def batch_complex_normals(seed: int, streams, count: int, start: int = 0) -> np.ndarray:
    """Standard complex Gaussians, shape ``(len(streams), count)``."""
    return _box_muller(batch_uniforms(seed, streams, 2 * count, start))


@dataclass
class RngState:
    """Single-owner cursor into the stream ``(seed, stream)``."""

    seed: int
    stream: int = 0
    position: int = field(default=0, compare=False)

    def __post_init__(self):
        if not 0 <= self.seed <= MASK64 or not 0 <= self.stream <= MASK64:
            raise ValueError("seed and stream must be unsigned 64-bit integers")
        self._key = np.array([stream_key(self.seed, self.stream)], dtype=np.uint64)

    def words(self, count: int) -> np.ndarray:
        out = _words(self._key, self.position, count)[0]
        self.position += count
        return out

    def uniforms(self, count: int) -> np.ndarray:
        return _to_unit(self.words(count))

    def complex_normals(self, count: int) -> np.ndarray:
        return _box_muller(self.uniforms(2 * count))

    def spawn(self, stream: int) -> "RngState":
        """Fresh cursor on another stream of the same seed."""
        return RngState(self.seed, stream)
