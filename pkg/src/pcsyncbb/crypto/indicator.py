"""Encrypted unit vectors that let a neighbour select a matrix row blindly."""
from __future__ import annotations

import random
from dataclasses import dataclass

from pcsyncbb.crypto.paillier import Ciphertext, PaillierPublicKey


@dataclass(frozen=True)
class EncIndicatorVector:
    """Encryption of the unit vector with a 1 at ``position`` (0-based).

    ``position`` is the owner's bookkeeping; only ``ciphertexts`` ever leave
    the owning agent.
    """

    ciphertexts: tuple[Ciphertext, ...]
    position: int

    def __len__(self) -> int:
        return len(self.ciphertexts)


def circular_right_shift(items: tuple) -> tuple:
    return items[-1:] + items[:-1]


def build_indicator_vectors(
    public: PaillierPublicKey, domain_size: int, rng: random.Random
) -> list[EncIndicatorVector]:
    """All ``domain_size`` indicator vectors from a single set of encryptions.

    The first vector is ``(E(1), E(0), ..., E(0))`` with a fresh nonce for every
    entry; each later vector is the previous one rotated right by one, so all
    vectors share the same ciphertexts in different positions.
    """
    if domain_size < 1:
        raise ValueError("domain size must be positive")
    first = tuple(
        public.encrypt(1 if i == 0 else 0, rng) for i in range(domain_size)
    )
    vectors = [EncIndicatorVector(first, 0)]
    for i in range(1, domain_size):
        vectors.append(
            EncIndicatorVector(circular_right_shift(vectors[-1].ciphertexts), i)
        )
    return vectors
