"""Named random streams with draw accounting.

Every source of randomness in a run is a separate stream addressed by
(replication, kind, terminal).  Streams are built on the counter-based
Philox generator so that the t-th variate of a stream is a pure function
of (seed, replication, kind, terminal, t) regardless of how draws are
batched.  Schedulers compared within one experiment therefore face
identical weight/increment/channel randomness (common random numbers),
and the per-stream draw counters make that verifiable.
"""

from __future__ import annotations

import numpy as np

# Stream kinds.  "weight", "increment" and "channel" are consumed once per
# slot by every scheduler (the common-random-number contract); the rest are
# policy- or scheme-private.
KINDS = ("weight", "increment", "channel", "backoff", "policy", "scheduler")
_KIND_CODE = {name: i for i, name in enumerate(KINDS)}


class Stream:
    """A counting wrapper around one numpy Generator."""

    __slots__ = ("_gen", "draws")

    def __init__(self, gen: np.random.Generator):
        self._gen = gen
        self.draws = 0

    def uniform(self, n: int) -> np.ndarray:
        """n i.i.d. uniforms on [0, 1)."""
        self.draws += int(n)
        return self._gen.random(n)

    def normal(self, n: int) -> np.ndarray:
        """n i.i.d. standard normals."""
        self.draws += int(n)
        return self._gen.standard_normal(n)

    def integers(self, n: int, high: int) -> np.ndarray:
        """n i.i.d. uniform integers on {0, ..., high-1}."""
        self.draws += int(n)
        return self._gen.integers(0, high, size=n)


class StreamFactory:
    """Creates and caches the named streams of one (seed, replication)."""

    def __init__(self, seed: int, replication: int = 0):
        self.seed = int(seed)
        self.replication = int(replication)
        self._streams: dict[tuple[str, int], Stream] = {}

    def stream(self, kind: str, terminal: int = 0) -> Stream:
        if kind not in _KIND_CODE:
            raise ValueError(f"unknown stream kind {kind!r}")
        key = (kind, int(terminal))
        st = self._streams.get(key)
        if st is None:
            ss = np.random.SeedSequence(
                entropy=self.seed,
                spawn_key=(self.replication, _KIND_CODE[kind], int(terminal)),
            )
            st = Stream(np.random.Generator(np.random.Philox(ss)))
            self._streams[key] = st
        return st

    def draw_counts(self, kinds: tuple[str, ...] | None = None) -> dict[tuple[str, int], int]:
        """Draw counters per (kind, terminal), optionally filtered by kind."""
        return {
            key: st.draws
            for key, st in sorted(self._streams.items())
            if kinds is None or key[0] in kinds
        }


class BufferedInts:
    """Amortized one-at-a-time integer draws from a stream."""

    def __init__(self, stream: Stream, high: int, block: int = 256):
        self._stream = stream
        self._high = int(high)
        self._block = int(block)
        self._buf = np.empty(0, dtype=np.int64)
        self._pos = 0

    def next(self) -> int:
        if self._pos >= len(self._buf):
            self._buf = self._stream.integers(self._block, self._high)
            self._pos = 0
        v = int(self._buf[self._pos])
        self._pos += 1
        return v


class BufferedUniforms:
    """Amortized one-at-a-time uniform draws from a stream."""

    def __init__(self, stream: Stream, block: int = 256):
        self._stream = stream
        self._block = int(block)
        self._buf = np.empty(0)
        self._pos = 0

    def next(self) -> float:
        if self._pos >= len(self._buf):
            self._buf = self._stream.uniform(self._block)
            self._pos = 0
        v = float(self._buf[self._pos])
        self._pos += 1
        return v
