"""Seeded randomness with reproducible per-game streams.

Everything random in this package flows through Philox, a counter-based
generator: the stream for game `i` under master seed `s` is keyed by the
pair `(s, i)`, so results are identical no matter how games are split
across workers or in what order they finish.
"""

from __future__ import annotations

import numpy as np

GENERATOR_NAME = "philox"

_KEY_MASK = (1 << 64) - 1


def game_stream(master_seed: int, game_index: int) -> np.random.Generator:
    """Independent generator for one game: key = (master seed, game index)."""
    key = np.array(
        [master_seed & _KEY_MASK, game_index & _KEY_MASK], dtype=np.uint64
    )
    return np.random.Generator(np.random.Philox(key=key))


class BitStream:
    """Buffered stream of fair bits drawn from a generator.

    `take(count)` returns a list of ints in {0, 1}; `next()` returns one.
    Refills draw whole full-range uint64 words (one generator word each, no
    rejection) and unpack their bits, so the bit sequence is a function of
    the word stream alone and does not depend on how takes are batched.
    """

    __slots__ = ("_gen", "_buf", "_pos")

    CHUNK = 8192  # minimum bits per refill; must stay a multiple of 64

    def __init__(self, gen: np.random.Generator):
        self._gen = gen
        self._buf = []
        self._pos = 0

    def _refill(self, need: int) -> None:
        words = max(-(-need // 64), self.CHUNK // 64)
        raw = self._gen.integers(0, 2**64 - 1, size=words, dtype=np.uint64, endpoint=True)
        self._buf = np.unpackbits(raw.astype("<u8", copy=False).view(np.uint8)).tolist()
        self._pos = 0

    def take(self, count: int) -> list:
        out = []
        while count:
            avail = len(self._buf) - self._pos
            if not avail:
                self._refill(count)
                avail = len(self._buf)
            grab = count if count < avail else avail
            out.extend(self._buf[self._pos : self._pos + grab])
            self._pos += grab
            count -= grab
        return out

    def next(self) -> int:
        if self._pos >= len(self._buf):
            self._refill(1)
        bit = self._buf[self._pos]
        self._pos += 1
        return bit
