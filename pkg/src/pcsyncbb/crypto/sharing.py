"""Additive sharing over Z_S and XOR sharing over GF(2)."""
from __future__ import annotations

import random
from functools import reduce
from operator import xor
from typing import Sequence


def share_split(v: int, parts: int, S: int, rng: random.Random) -> list[int]:
    """Split ``v`` into ``parts`` shares summing to ``v`` mod ``S``.

    The first ``parts - 1`` shares are uniform on Z_S; the last one fixes the sum.
    """
    if not 0 <= v < S:
        raise ValueError(f"value {v} outside Z_{S}")
    if parts < 1:
        raise ValueError("need at least one share")
    shares = [rng.randrange(S) for _ in range(parts - 1)]
    shares.append((v - sum(shares)) % S)
    return shares


def share_reconstruct(shares: Sequence[int], S: int) -> int:
    if not shares:
        raise ValueError("cannot reconstruct from an empty share list")
    return sum(shares) % S


def xor_split(bits: int, parts: int, width: int, rng: random.Random) -> list[int]:
    """XOR-share a ``width``-bit word (``width`` parallel GF(2) values)."""
    shares = [rng.getrandbits(width) for _ in range(parts - 1)]
    shares.append(reduce(xor, shares, bits))
    return shares


def xor_reconstruct(shares: Sequence[int]) -> int:
    if not shares:
        raise ValueError("cannot reconstruct from an empty share list")
    return reduce(xor, shares)
