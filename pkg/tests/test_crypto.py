import math
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from pcsyncbb.crypto import (
    KeyMismatchError,
    build_indicator_vectors,
    hom_add,
    keygen,
    scalar_exp,
    share_reconstruct,
    share_split,
    xor_reconstruct,
    xor_split,
)
from pcsyncbb.crypto.indicator import circular_right_shift
from pcsyncbb.rng import Drbg, derive

S = 2048


@pytest.fixture(scope="module")
def ctx():
    return keygen(512, Drbg(7, "test-key"))


@pytest.fixture(scope="module")
def other():
    return keygen(512, Drbg(8, "test-key"))


def _textbook_decrypt(ctx, c):
    """Decryption with lambda = lcm(p-1, q-1) and mu = L(g^lambda)^-1, no CRT."""
    p, q, n = ctx.private.p, ctx.private.q, ctx.public.n
    lam = math.lcm(p - 1, q - 1)
    n2 = n * n
    L = lambda u: (u - 1) // n  # noqa: E731
    mu = pow(L(pow(n + 1, lam, n2)), -1, n)
    return L(pow(c.value, lam, n2)) * mu % n


def test_keygen_shape(ctx):
    assert ctx.public.n.bit_length() == 512
    assert ctx.private.p * ctx.private.q == ctx.public.n
    assert ctx.public.n > S ** 2
    with pytest.raises(ValueError):
        keygen(256)


def test_keygen_is_seeded():
    a = keygen(512, Drbg(1, "k"))
    b = keygen(512, Drbg(1, "k"))
    c = keygen(512, Drbg(2, "k"))
    assert a.public.n == b.public.n != c.public.n


def test_roundtrip_against_textbook(ctx):
    rng = Drbg(0, "rt")
    assert ctx.decrypt(ctx.encrypt(0, rng)) == 0
    for _ in range(100):
        x = rng.randrange(S)
        c = ctx.encrypt(x, rng)
        assert ctx.decrypt(c) == x
        assert _textbook_decrypt(ctx, c) == x
    big = ctx.public.n - 1
    assert ctx.decrypt(ctx.encrypt(big, rng)) == big


def test_encryption_is_randomised(ctx):
    rng = Drbg(1, "rand")
    assert ctx.encrypt(5, rng).value != ctx.encrypt(5, rng).value


def test_homomorphic_ops(ctx):
    rng = Drbg(2, "hom")
    pub = ctx.public
    assert ctx.decrypt(hom_add(ctx.encrypt(3, rng), ctx.encrypt(4, rng), pub)) == 7
    for e in (0, 1, 5, S - 1):
        assert ctx.decrypt(scalar_exp(ctx.encrypt(1, rng), e, pub)) == e
        assert ctx.decrypt(scalar_exp(ctx.encrypt(0, rng), e, pub)) == 0
    assert scalar_exp(ctx.encrypt(9, rng), 0, pub).value == 1
    # wrap-around modulo n
    n = pub.n
    assert ctx.decrypt(hom_add(ctx.encrypt(n - 2, rng), ctx.encrypt(5, rng), pub)) == 3


def test_key_mismatch(ctx, other):
    rng = Drbg(3, "mm")
    with pytest.raises(KeyMismatchError):
        hom_add(ctx.encrypt(1, rng), other.encrypt(1, rng), ctx.public)
    with pytest.raises(KeyMismatchError):
        ctx.decrypt(other.encrypt(1, rng))


@settings(max_examples=30, deadline=None)
@given(st.lists(st.integers(0, S - 1), min_size=1, max_size=6), st.data())
def test_linear_combination(ctx_cached, coeffs, data):
    ctx = ctx_cached
    rng = Drbg(data.draw(st.integers(0, 10**9)), "lc")
    ms = [data.draw(st.integers(0, 50)) for _ in coeffs]
    cts = [ctx.encrypt(m, rng) for m in ms]
    got = ctx.decrypt(ctx.public.linear_combination(cts, coeffs))
    assert got == sum(c * m for c, m in zip(coeffs, ms)) % ctx.public.n


@pytest.fixture(scope="module")
def ctx_cached():
    return keygen(512, Drbg(11, "lc-key"))


# ------------------------------------------------------------ indicators


def test_indicator_vectors(ctx):
    rng = Drbg(4, "ind")
    one = build_indicator_vectors(ctx.public, 1, rng)
    assert len(one) == 1 and [ctx.decrypt(c) for c in one[0].ciphertexts] == [1]
    vecs = build_indicator_vectors(ctx.public, 4, rng)
    assert [ctx.decrypt(c) for c in vecs[2].ciphertexts] == [0, 0, 1, 0]
    base = sorted(c.value for c in vecs[0].ciphertexts)
    for i, v in enumerate(vecs):
        assert v.position == i
        assert [ctx.decrypt(c) for c in v.ciphertexts] == [int(j == i) for j in range(4)]
        assert sorted(c.value for c in v.ciphertexts) == base
    # independent randomness for every zero entry
    assert len(set(base)) == 4
    with pytest.raises(ValueError):
        build_indicator_vectors(ctx.public, 0, rng)


def test_circular_right_shift():
    assert circular_right_shift((1, 2, 3)) == (3, 1, 2)
    assert circular_right_shift(()) == ()


def test_blind_row_selection(ctx):
    """y = prod_i z^r(i)^((m_i - rho) mod S) decrypts to (m_r - rho) mod S."""
    rng = Drbg(5, "sel")
    d = 5
    vecs = build_indicator_vectors(ctx.public, d, rng)
    for _ in range(50):
        col = [rng.randrange(101) for _ in range(d)]
        r = rng.randrange(d)
        rho = rng.randrange(S)
        y = ctx.public.linear_combination(vecs[r].ciphertexts, [(m - rho) % S for m in col])
        assert ctx.decrypt(y) == (col[r] - rho) % S


# --------------------------------------------------------------- sharing


@given(st.integers(0, S - 1), st.integers(1, 8), st.integers(0, 2**32))
def test_share_roundtrip(v, parts, seed):
    shares = share_split(v, parts, S, random.Random(seed))
    assert len(shares) == parts
    assert all(0 <= s < S for s in shares)
    assert share_reconstruct(shares, S) == v


def test_share_roundtrip_exhaustive_small():
    rng = random.Random(0)
    for small in (2, 8, 16):
        for v in range(small):
            assert share_reconstruct(share_split(v, 3, small, rng), small) == v


def test_share_errors():
    with pytest.raises(ValueError):
        share_split(S, 2, S, random.Random(0))
    with pytest.raises(ValueError):
        share_split(1, 0, S, random.Random(0))
    with pytest.raises(ValueError):
        share_reconstruct([], S)
    with pytest.raises(ValueError):
        xor_reconstruct([])


def test_first_share_is_uniform():
    rng = Drbg(6, "chi")
    counts = [0] * S
    for _ in range(100_000):
        counts[share_split(7, 2, S, rng)[0]] += 1
    assert chisquare(counts).pvalue > 0.001


@given(st.integers(0, 2**16 - 1), st.integers(1, 6), st.integers(0, 2**32))
def test_xor_roundtrip(bits, parts, seed):
    assert xor_reconstruct(xor_split(bits, parts, 16, random.Random(seed))) == bits


# ------------------------------------------------------------------- rng


def test_drbg_streams():
    a = [Drbg(1, "x", 2).getrandbits(64) for _ in range(2)]
    assert a[0] == a[1]
    assert Drbg(1, "x", 2).getrandbits(64) != Drbg(1, "x", 3).getrandbits(64)
    r = derive(5, "s")
    state = r.getstate()
    first = [r.randrange(1000) for _ in range(5)]
    r.setstate(state)
    assert [r.randrange(1000) for _ in range(5)] == first
    assert r.child("c").getrandbits(32) == derive(5, "s").child("c").getrandbits(32)
    assert Drbg(None).getrandbits(128) != Drbg(None).getrandbits(128)
    assert Drbg(0).getrandbits(0) == 0
    with pytest.raises(ValueError):
        Drbg(0).getrandbits(-1)
