"""
Counter-based random streams.

Every simulated path owns the stream keyed by ``(seed, path_index)``; draw
``j`` of that stream is a pure function ``mix64(key + (j + 1) * GOLDEN)``
(the SplitMix64 output function applied to a counter). Nothing is carried
between draws, so any partition of path indices over workers reproduces the
same numbers. The compiled kernel implements the identical arithmetic.
"""

import numpy as np

GOLDEN = np.uint64(0x9E3779B97F4A7C15)
STREAM_GAP = np.uint64(0xD1B54A32D192ED03)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_U53 = 1.0 / 9007199254740992.0  # 2**-53

__all__ = ["CounterStream", "mix64", "stream_key", "uniform_at"]


def mix64(z):
    """SplitMix64 finaliser on uint64 scalars or arrays (wrapping arithmetic)."""
    z = np.asarray(z, dtype=np.uint64)
    with np.errstate(over="ignore"):
        z = (z ^ (z >> np.uint64(30))) * _M1
        z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def stream_key(seed, index):
    """Key of the stream for path ``index`` under ``seed``."""
    base = mix64(np.uint64(seed & 0xFFFFFFFFFFFFFFFF))
    idx = np.asarray(index, dtype=np.uint64)
    with np.errstate(over="ignore"):
        return mix64(base + (idx + np.uint64(1)) * STREAM_GAP)


def uniform_at(key, counter):
    """Uniform in (0, 1) for draw ``counter`` of the stream with ``key``."""
    key = np.asarray(key, dtype=np.uint64)
    counter = np.asarray(counter, dtype=np.uint64)
    with np.errstate(over="ignore"):
        bits = mix64(key + (counter + np.uint64(1)) * GOLDEN)
    return ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * _U53


class CounterStream:
    """Sequential view of one counter-based stream.

    Parameters
    ----------
    seed : int
    index : int
        Path (or record) index the stream belongs to.
    counter : int
        First draw to hand out.

    Not safe for concurrent use; create one per consumer.
    """

    def __init__(self, seed, index=0, counter=0):
        self.seed = int(seed)
        self.index = int(index)
        self.counter = int(counter)
        self._key = stream_key(self.seed, self.index)

    def uniforms(self, size):
        out = uniform_at(self._key, np.arange(self.counter, self.counter + size, dtype=np.uint64))
        self.counter += size
        return out

    def uniform(self):
        return float(self.uniforms(1)[0])

    def exponentials(self, size, rate):
        return -np.log(self.uniforms(size)) / rate

    def peek_exponentials(self, size, rate):
        """Exponentials for the next ``size`` draws without consuming them."""
        u = uniform_at(self._key, np.arange(self.counter, self.counter + size, dtype=np.uint64))
        return -np.log(u) / rate

    def advance(self, n):
        self.counter += int(n)

    def __repr__(self):
        return f"CounterStream(seed={self.seed}, index={self.index}, counter={self.counter})"
