"""Seedable deterministic random streams.

Protocol randomness (value orderings, blinding values, Paillier keys and
encryption nonces, Beaver triples) must be replayable from a master seed, and
every agent needs its own independent stream.  :class:`Drbg` is a
``random.Random`` whose bits come from SHA-256 in counter mode keyed by the
seed and a label path, so ``randrange``/``shuffle``/``sample`` all work.
"""
from __future__ import annotations

import hashlib
import os
import random

_BLOCK = 32


class Drbg(random.Random):
    """Hash-counter random stream.

    ``Drbg(seed, "agent", 3, "w")`` and ``Drbg(seed, "agent", 4, "w")`` are
    independent; the same arguments always reproduce the same stream.  A seed
    of ``None`` draws a fresh key from the operating system.
    """

    def __new__(cls, seed=None, *labels):
        return super().__new__(cls)

    def __init__(self, seed: int | bytes | str | None = None, *labels: object):
        self._labels = labels
        super().__init__(seed)

    def seed(self, a=None, version=2) -> None:  # noqa: D102 - random.Random API
        if a is None:
            a = os.urandom(32)
        material = repr((a, getattr(self, "_labels", ()))).encode()
        self._key = hashlib.sha256(material).digest()
        self._counter = 0
        self._buf = b""

    def _take(self, nbytes: int) -> bytes:
        while len(self._buf) < nbytes:
            block = hashlib.sha256(
                self._key + self._counter.to_bytes(8, "big")
            ).digest()
            self._counter += 1
            self._buf += block
        out, self._buf = self._buf[:nbytes], self._buf[nbytes:]
        return out

    def getrandbits(self, k: int) -> int:
        if k < 0:
            raise ValueError("number of bits must be non-negative")
        if k == 0:
            return 0
        nbytes = (k + 7) // 8
        value = int.from_bytes(self._take(nbytes), "big")
        return value >> (nbytes * 8 - k)

    def random(self) -> float:
        return self.getrandbits(53) * (2.0 ** -53)

    def getstate(self):
        return (self._key, self._counter, self._buf)

    def setstate(self, state) -> None:
        self._key, self._counter, self._buf = state

    def child(self, *labels: object) -> "Drbg":
        """Derive an independent stream keyed by this stream's key."""
        return Drbg(self._key, *labels)


def derive(seed: int | bytes | str | None, *labels: object) -> Drbg:
    return Drbg(seed, *labels)
