"""Paillier cryptosystem with ``g = n + 1`` and CRT decryption.

Key generation and encryption nonces draw from a caller-supplied
``random.Random`` (normally a :class:`pcsyncbb.rng.Drbg`) so that protocol
runs replay bit for bit from a seed.
"""
from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from typing import Sequence

import gmpy2

DEFAULT_KEYSIZE = 2048
TEST_KEYSIZE = 512
MIN_KEYSIZE = 512
_PRIME_RETRIES = 100


class KeyMismatchError(ValueError):
    """Ciphertexts under different keys were combined."""


class KeyGenerationError(RuntimeError):
    pass


@dataclass(frozen=True)
class Ciphertext:
    value: int
    key_id: str


@dataclass(frozen=True)
class PaillierPublicKey:
    n: int
    n_sq: int = field(init=False, repr=False)
    key_id: str = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "n_sq", self.n * self.n)
        digest = hashlib.sha256(str(self.n).encode()).hexdigest()[:16]
        object.__setattr__(self, "key_id", digest)

    @property
    def g(self) -> int:
        return self.n + 1

    @property
    def ciphertext_bytes(self) -> int:
        return (self.n_sq.bit_length() + 7) // 8

    @property
    def key_bytes(self) -> int:
        return (self.n.bit_length() + 7) // 8

    def raw_encrypt(self, m: int, r: int) -> int:
        # (1 + n)^m = 1 + m n  (mod n^2)
        gm = (1 + (m % self.n) * self.n) % self.n_sq
        return int(gm * gmpy2.powmod(r, self.n, self.n_sq) % self.n_sq)

    def random_nonce(self, rng: random.Random) -> int:
        while True:
            r = rng.randrange(1, self.n)
            if gmpy2.gcd(r, self.n) == 1:
                return r

    def encrypt(self, m: int, rng: random.Random) -> Ciphertext:
        return Ciphertext(self.raw_encrypt(m, self.random_nonce(rng)), self.key_id)

    def _check(self, *cts: Ciphertext) -> None:
        for c in cts:
            if c.key_id != self.key_id:
                raise KeyMismatchError(
                    f"ciphertext under key {c.key_id} used with key {self.key_id}"
                )

    def add(self, c1: Ciphertext, c2: Ciphertext) -> Ciphertext:
        self._check(c1, c2)
        return Ciphertext(c1.value * c2.value % self.n_sq, self.key_id)

    def scalar_mul(self, c: Ciphertext, e: int) -> Ciphertext:
        """Ciphertext of ``e * m``.  ``e == 0`` yields the identity ``1``."""
        self._check(c)
        return Ciphertext(int(gmpy2.powmod(c.value, e, self.n_sq)), self.key_id)

    def linear_combination(
        self, cts: Sequence[Ciphertext], coeffs: Sequence[int]
    ) -> Ciphertext:
        """``prod_i cts[i] ** coeffs[i]``, the ciphertext of ``sum coeffs[i] * m_i``."""
        if len(cts) != len(coeffs):
            raise ValueError("one coefficient per ciphertext")
        self._check(*cts)
        acc = gmpy2.mpz(1)
        for c, e in zip(cts, coeffs):
            if e:
                acc = acc * gmpy2.powmod(c.value, e, self.n_sq) % self.n_sq
        return Ciphertext(int(acc), self.key_id)

    def is_valid_ciphertext(self, value: int) -> bool:
        return 0 < value < self.n_sq and gmpy2.gcd(value, self.n) == 1


@dataclass(frozen=True)
class PaillierPrivateKey:
    public: PaillierPublicKey
    p: int
    q: int
    _crt: tuple = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        p, q = gmpy2.mpz(self.p), gmpy2.mpz(self.q)
        p_sq, q_sq = p * p, q * q
        n = self.public.n
        # h_p = L_p(g^(p-1) mod p^2)^-1 mod p, likewise for q
        hp = gmpy2.invert((gmpy2.powmod(n + 1, p - 1, p_sq) - 1) // p, p)
        hq = gmpy2.invert((gmpy2.powmod(n + 1, q - 1, q_sq) - 1) // q, q)
        p_inv = gmpy2.invert(p, q)
        object.__setattr__(self, "_crt", (p, q, p_sq, q_sq, hp, hq, p_inv))

    def decrypt(self, c: Ciphertext) -> int:
        self.public._check(c)
        return self.raw_decrypt(c.value)

    def raw_decrypt(self, value: int) -> int:
        p, q, p_sq, q_sq, hp, hq, p_inv = self._crt
        mp = (gmpy2.powmod(value, p - 1, p_sq) - 1) // p * hp % p
        mq = (gmpy2.powmod(value, q - 1, q_sq) - 1) // q * hq % q
        return int(mp + ((mq - mp) * p_inv % q) * p)


@dataclass(frozen=True)
class PaillierContext:
    """A key pair.  Immutable, so it may be shared between threads."""

    public: PaillierPublicKey
    private: PaillierPrivateKey
    security_bits: int

    def encrypt(self, m: int, rng: random.Random) -> Ciphertext:
        return self.public.encrypt(m, rng)

    def decrypt(self, c: Ciphertext) -> int:
        return self.private.decrypt(c)


def _prime(bits: int, rng: random.Random) -> int:
    for _ in range(_PRIME_RETRIES):
        # top two bits set so the product of two such primes has 2*bits bits
        cand = rng.getrandbits(bits) | (3 << (bits - 2)) | 1
        p = int(gmpy2.next_prime(cand))
        if p.bit_length() == bits:
            return p
    raise KeyGenerationError(f"no {bits}-bit prime after {_PRIME_RETRIES} tries")


def keygen(
    security_bits: int = DEFAULT_KEYSIZE,
    rng: random.Random | None = None,
) -> PaillierContext:
    """Generate a Paillier key pair whose modulus has ``security_bits`` bits."""
    if security_bits < MIN_KEYSIZE or security_bits % 2:
        raise ValueError(f"key size must be an even number >= {MIN_KEYSIZE}")
    rng = rng if rng is not None else random.SystemRandom()
    half = security_bits // 2
    for _ in range(_PRIME_RETRIES):
        p, q = _prime(half, rng), _prime(half, rng)
        if p == q:
            continue
        n = p * q
        if n.bit_length() != security_bits or gmpy2.gcd(n, (p - 1) * (q - 1)) != 1:
            continue
        public = PaillierPublicKey(n)
        return PaillierContext(public, PaillierPrivateKey(public, p, q), security_bits)
    raise KeyGenerationError("could not find a suitable prime pair")


def hom_add(c1: Ciphertext, c2: Ciphertext, public: PaillierPublicKey) -> Ciphertext:
    return public.add(c1, c2)


def scalar_exp(c: Ciphertext, e: int, public: PaillierPublicKey) -> Ciphertext:
    return public.scalar_mul(c, e)
