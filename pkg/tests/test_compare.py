import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.stats import chisquare

from pcsyncbb.compare import (
    CompareError,
    IdealBackend,
    LocalTransport,
    MpcBackend,
    TrustedDealer,
    bitslice,
    build_circuit,
    ideal_compare,
    offline_phase,
    online_phase,
    online_phase_batch,
)
from pcsyncbb.compare.circuit import unslice
from pcsyncbb.crypto.sharing import share_split
from pcsyncbb.dcop import public_params
from pcsyncbb.rng import Drbg


def _eq6(alpha, beta):
    return alpha < beta


def _inputs_for(alpha, beta, n, S, rng):
    """Per-party x_k = b_k - a_k from fresh additive sharings of alpha, beta."""
    a = share_split(alpha, n, S, rng)
    b = share_split(beta, n, S, rng)
    return [(bk - ak) % S for ak, bk in zip(a, b)]


def test_circuit_small_examples():
    c = build_circuit(2, 3)
    assert c.evaluate([1, 0]) == 1
    assert c.evaluate([0, 0]) == 0
    assert c.evaluate([3, 1]) == 1  # sum 4 = S/2 is the last "true"
    assert c.evaluate([3, 2]) == 0
    with pytest.raises(ValueError):
        build_circuit(1, 4)
    with pytest.raises(ValueError):
        build_circuit(3, 1)


@pytest.mark.parametrize("n,ell", [(2, 3), (2, 4), (3, 3), (3, 4), (4, 3)])
def test_circuit_exhaustive_matches_ideal(n, ell):
    c = build_circuit(n, ell)
    S = 2 ** ell
    for xs in itertools.product(range(S), repeat=n):
        assert bool(c.evaluate(list(xs))) == ideal_compare(xs, S)


def test_circuit_bitsliced_evaluation():
    c = build_circuit(3, 6)
    rng = random.Random(0)
    width = 64
    xs = [[rng.randrange(64) for _ in range(width)] for _ in range(3)]
    out = c.evaluate([bitslice(x, 6) for x in xs], width=width)
    want = [ideal_compare([xs[k][j] for k in range(3)], 64) for j in range(width)]
    assert unslice(out, width) == want


def test_circuit_structure():
    c = build_circuit(5, 11)
    assert c.and_count == 4 * 10 + 9
    assert c.and_depth == 10
    # topological, every wire assigned once
    outs = [g.out for g in c.gates]
    assert len(set(outs)) == len(outs)
    for g in c.gates:
        assert all(i < g.out for i in g.ins)
    assert c.fingerprint == build_circuit(5, 11).fingerprint != build_circuit(5, 12).fingerprint
    lines = c.dump().splitlines()
    assert len(lines) == len(c.gates)
    assert lines[0].split()[0] in {"AND", "XOR", "NOT"}
    assert c.stats_row() == {"n": 5, "ell": 11, "gates": len(c.gates), "and_gates": 49, "depth": 10}


def test_range_soundness_exhaustive_q3_n3():
    n, q = 3, 3
    p = public_params(n, q)
    c = build_circuit(n, p.ell)
    rng = random.Random(1)
    for alpha in range(p.q_inf + 1):
        for beta in range(p.q_inf + 1):
            xs = _inputs_for(alpha, beta, n, p.S, rng)
            assert bool(c.evaluate(xs)) == _eq6(alpha, beta)
            assert ideal_compare(xs, p.S) == _eq6(alpha, beta)


def test_ideal_examples():
    p = public_params(5, 100)
    assert ideal_compare([0] * 5, p.S) is False
    assert ideal_compare([p.q_inf, 0, 0, 0, 0], p.S) is True
    with pytest.raises(ValueError):
        ideal_compare([p.S], p.S)


# --------------------------------------------------------------- offline


def test_triples_valid_and_counted():
    c = build_circuit(4, 6)
    mats = offline_phase(4, c, TrustedDealer(Drbg(0, "d")), width=8)
    assert all(len(m.triples) == c.and_count for m in mats)
    for i in range(c.and_count):
        a = b = cc = 0
        for m in mats:
            ta, tb, tc = m.triples[i]
            a ^= ta
            b ^= tb
            cc ^= tc
        assert cc == a & b
    with pytest.raises(CompareError):
        offline_phase(3, c, TrustedDealer(Drbg(0, "d")))


def test_triple_shares_independent_between_parties():
    dealer = TrustedDealer(Drbg(1, "ind"))
    per = dealer.triples(10_000, 2, 1)
    joint = np.zeros((2, 2), dtype=int)
    for (a0, _, _), (a1, _, _) in zip(per[0], per[1]):
        joint[a0, a1] += 1
    assert chisquare(joint.ravel()).pvalue > 0.001


def test_provider_failure_is_wrapped():
    class Broken:
        def triples(self, count, n, width):
            raise OSError("dealer offline")

    with pytest.raises(CompareError):
        offline_phase(3, build_circuit(3, 4), Broken())


# ---------------------------------------------------------------- online


@pytest.mark.parametrize("n,ell", [(2, 3), (3, 3), (2, 5)])
def test_online_exhaustive(n, ell):
    c = build_circuit(n, ell)
    S = 2 ** ell
    combos = list(itertools.product(range(S), repeat=n))
    inputs = [[xs[k] for xs in combos] for k in range(n)]
    mats = offline_phase(n, c, TrustedDealer(Drbg(n, ell)), width=len(combos))
    got, stats = online_phase_batch(c, inputs, mats, rng=Drbg(3, "on"))
    assert got == [ideal_compare(xs, S) for xs in combos]
    assert stats.rounds == c.and_depth


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.data())
def test_online_permutation_invariant(n, data):
    ell = 6
    S = 2 ** ell
    xs = [data.draw(st.integers(0, S - 1)) for _ in range(n)]
    perm = data.draw(st.permutations(xs))
    c = build_circuit(n, ell)
    dealer = TrustedDealer(Drbg(data.draw(st.integers(0, 99)), "p"))
    r1, _ = online_phase(c, xs, offline_phase(n, c, dealer), rng=Drbg(1))
    r2, _ = online_phase(c, list(perm), offline_phase(n, c, dealer), rng=Drbg(2))
    assert r1 == r2 == ideal_compare(xs, S)


def test_zero_inputs_run_full_protocol():
    c = build_circuit(3, 5)
    t = LocalTransport(record=True)
    out, stats = online_phase(c, [0, 0, 0], offline_phase(3, c, TrustedDealer(Drbg(0))), t, Drbg(0))
    assert out is False
    assert stats.rounds == c.and_depth
    kinds = [k for k, *_ in t.log]
    assert kinds.count("MPC_OPEN") == c.and_depth * 3 * 2
    assert "MPC_INPUT" in kinds and "MPC_OUTPUT" in kinds


def test_transcript_depends_on_randomness_not_output():
    c = build_circuit(3, 6)
    xs = [5, 17, 40]
    logs, outs = [], []
    for seed in (1, 2):
        t = LocalTransport(record=True)
        mats = offline_phase(3, c, TrustedDealer(Drbg(seed, "dealer")))
        out, _ = online_phase(c, xs, mats, t, Drbg(seed, "online"))
        outs.append(out)
        logs.append([p.words for kind, _s, _r, p in t.log if kind != "MPC_OUTPUT"])
    assert outs[0] == outs[1]
    assert logs[0] != logs[1]


def test_material_checks():
    c = build_circuit(3, 4)
    dealer = TrustedDealer(Drbg(0))
    other = offline_phase(3, build_circuit(3, 5), dealer)
    with pytest.raises(CompareError):
        online_phase(c, [1, 2, 3], other)
    mats = offline_phase(3, c, dealer)
    mats[1].triples = mats[1].triples[:-1]
    with pytest.raises(CompareError):
        online_phase(c, [1, 2, 3], mats)
    mats = offline_phase(3, c, dealer)
    with pytest.raises(CompareError):
        online_phase(c, [1, 2], mats)


def test_backends_agree_and_count():
    n = 4
    p = public_params(n, 10)
    ideal = IdealBackend(p.S)
    mpc = MpcBackend(n, p.ell, rng=Drbg(0, "mpc"))
    rng = random.Random(3)
    for _ in range(50):
        xs = _inputs_for(rng.randrange(p.q_inf + 1), rng.randrange(p.q_inf + 1), n, p.S, rng)
        assert mpc.compare(xs) == ideal.compare(xs)
    assert mpc.calls == ideal.calls == 50
    assert mpc.triples_used == 50 * mpc.circuit.and_count
    assert mpc.online.rounds == 50 * mpc.circuit.and_depth
