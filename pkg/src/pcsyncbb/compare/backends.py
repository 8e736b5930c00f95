"""Comparison backends: an ideal functionality and a GMW-style MPC evaluation.

The MPC backend is split the usual way.  :func:`offline_phase` deals one
XOR-shared Beaver triple per AND gate before any input is known;
:func:`online_phase` XOR-shares the inputs, evaluates XOR/NOT locally, spends
one triple per AND gate (all AND gates of one depth level share a single
broadcast round) and finally opens the output wire.

Party-to-party traffic goes through a transport object, so the same code runs
standalone (:class:`LocalTransport`) or over the simulated network.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from functools import reduce
from operator import xor
from typing import Protocol, Sequence

from pcsyncbb.compare.circuit import AND, NOT, XOR, ComparisonCircuit, bitslice, build_circuit, unslice
from pcsyncbb.crypto.sharing import xor_split
from pcsyncbb.rng import Drbg


class CompareError(RuntimeError):
    pass


def ideal_compare(inputs: Sequence[int], S: int) -> bool:
    """Trusted-evaluator reference: true iff ``(sum(inputs) mod S)`` is in ``[1, S/2]``.

    Under the range guarantee (cost and bound in ``[0, q_inf]``,
    ``S > 2 q_inf``) the sum is ``(bound - cost) mod S`` and this is exactly
    ``cost < bound``.  The closed upper end makes it agree with the circuit
    on every input, including ones outside that range.
    """
    for x in inputs:
        if not 0 <= x < S:
            raise ValueError(f"input {x} outside Z_{S}")
    d = sum(inputs) % S
    return 0 < d <= S // 2


@dataclass(frozen=True)
class MaskedBits:
    """GF(2) words that are one-time-padded (shares or Beaver openings)."""

    words: tuple[int, ...]
    width: int

    @property
    def nbytes(self) -> int:
        return (len(self.words) * self.width + 7) // 8


class Transport(Protocol):
    def exchange(
        self, kind: str, outbox: dict[int, dict[int, MaskedBits]]
    ) -> dict[int, dict[int, MaskedBits]]:
        """Deliver ``outbox[sender][receiver]``; return ``inbox[receiver][sender]``."""


class LocalTransport:
    """In-memory delivery; keeps a log of every payload for inspection."""

    def __init__(self, record: bool = False):
        self.record = record
        self.log: list[tuple[str, int, int, MaskedBits]] = []

    def exchange(self, kind, outbox):
        inbox: dict[int, dict[int, MaskedBits]] = {}
        for sender, msgs in outbox.items():
            for receiver, payload in msgs.items():
                inbox.setdefault(receiver, {})[sender] = payload
                if self.record:
                    self.log.append((kind, sender, receiver, payload))
        return inbox


class TripleProvider(Protocol):
    def triples(self, count: int, n: int, width: int) -> list[list[tuple[int, int, int]]]:
        """``count`` XOR-shared triples; element ``[party][i]`` is ``(a_i, b_i, c_i)``."""


class TrustedDealer:
    """Local dealer: samples ``a, b`` and shares ``(a, b, a & b)`` among all parties.

    The dealer sees the triples, so the coalition-resistance argument covers
    the online phase only.
    """

    def __init__(self, rng: random.Random | None = None):
        self.rng = rng if rng is not None else Drbg(None, "dealer")

    def triples(self, count, n, width):
        per_party: list[list[tuple[int, int, int]]] = [[] for _ in range(n)]
        for _ in range(count):
            a = self.rng.getrandbits(width)
            b = self.rng.getrandbits(width)
            sa = xor_split(a, n, width, self.rng)
            sb = xor_split(b, n, width, self.rng)
            sc = xor_split(a & b, n, width, self.rng)
            for k in range(n):
                per_party[k].append((sa[k], sb[k], sc[k]))
        return per_party


@dataclass
class CorrelatedRandomness:
    """One party's offline material for one circuit evaluation."""

    party: int
    n: int
    width: int
    fingerprint: str
    triples: list[tuple[int, int, int]]
    used: int = 0

    def next_triple(self) -> tuple[int, int, int]:
        if self.used >= len(self.triples):
            raise CompareError(f"party {self.party} ran out of Beaver triples")
        t = self.triples[self.used]
        self.used += 1
        return t


def offline_phase(
    n: int,
    circuit: ComparisonCircuit,
    provider: TripleProvider,
    width: int = 1,
) -> list[CorrelatedRandomness]:
    if n != circuit.n:
        raise CompareError(f"circuit built for {circuit.n} parties, not {n}")
    try:
        shares = provider.triples(circuit.and_count, n, width)
    except Exception as exc:  # provider is pluggable; normalise its failures
        raise CompareError(f"triple provider failed: {exc}") from exc
    return [
        CorrelatedRandomness(k, n, width, circuit.fingerprint, list(shares[k]))
        for k in range(n)
    ]


@dataclass
class OnlineStats:
    rounds: int = 0  # AND layers
    input_rounds: int = 0
    output_rounds: int = 0
    messages: int = 0
    bits_sent: int = 0  # point-to-point, every receiver counted
    bits_broadcast: int = 0  # each broadcast counted once
    and_gates: int = 0

    def merge(self, other: "OnlineStats") -> None:
        for name in self.__dataclass_fields__:
            setattr(self, name, getattr(self, name) + getattr(other, name))


def _schedule(circuit: ComparisonCircuit):
    levels = circuit.levels
    depth = circuit.and_depth
    ands: list[list] = [[] for _ in range(depth + 1)]
    local: list[list] = [[] for _ in range(depth + 1)]
    for g in circuit.gates:
        (ands if g.op == AND else local)[levels[g.out]].append(g)
    return ands, local


class _Party:
    def __init__(self, index, circuit, material, width, rng):
        self.index = index
        self.width = width
        self.mask = (1 << width) - 1
        self.material = material
        self.rng = rng
        self.wires = [0] * circuit.num_wires
        self.pending: list[tuple[int, int, int, int, int]] = []

    def share_inputs(self, circuit, words, n) -> dict[int, MaskedBits]:
        per_receiver = [[] for _ in range(n)]
        for i, w in enumerate(words):
            for k, s in enumerate(xor_split(w, n, self.width, self.rng)):
                per_receiver[k].append(s)
        for i, s in enumerate(per_receiver[self.index]):
            self.wires[circuit.input_wire(self.index, i)] = s
        return {
            k: MaskedBits(tuple(per_receiver[k]), self.width)
            for k in range(n)
            if k != self.index
        }

    def receive_inputs(self, circuit, sender, payload):
        for i, s in enumerate(payload.words):
            self.wires[circuit.input_wire(sender, i)] = s

    def local(self, gates):
        w = self.wires
        for g in gates:
            if g.op == XOR:
                w[g.out] = w[g.ins[0]] ^ w[g.ins[1]]
            elif g.op == NOT:
                w[g.out] = w[g.ins[0]] ^ self.mask if self.index == 0 else w[g.ins[0]]
            else:
                raise CompareError(f"unexpected gate {g.op} in local layer")

    def open_ands(self, gates) -> MaskedBits:
        self.pending = []
        ds, es = [], []
        for g in gates:
            a, b, c = self.material.next_triple()
            d = self.wires[g.ins[0]] ^ a
            e = self.wires[g.ins[1]] ^ b
            self.pending.append((g.out, a, b, c))
            ds.append(d)
            es.append(e)
        return MaskedBits(tuple(ds + es), self.width)

    def close_ands(self, own: MaskedBits, received: Sequence[MaskedBits]):
        m = len(self.pending)
        opened = list(own.words)
        for payload in received:
            opened = [x ^ y for x, y in zip(opened, payload.words)]
        for (out, a, b, c), d, e in zip(self.pending, opened[:m], opened[m:]):
            z = c ^ (d & b) ^ (e & a)
            if self.index == 0:
                z ^= d & e
            self.wires[out] = z
        self.pending = []


def online_phase_batch(
    circuit: ComparisonCircuit,
    inputs: Sequence[Sequence[int]],
    materials: Sequence[CorrelatedRandomness],
    transport: Transport | None = None,
    rng: random.Random | None = None,
) -> tuple[list[bool], OnlineStats]:
    """Evaluate ``width`` independent comparisons at once.

    ``inputs[k][j]`` is party ``k``'s input to instance ``j``; the batch width
    is taken from the materials.
    """
    n = circuit.n
    if len(inputs) != n or len(materials) != n:
        raise CompareError(f"expected {n} parties")
    width = materials[0].width
    for k, mat in enumerate(materials):
        if mat.fingerprint != circuit.fingerprint:
            raise CompareError(f"party {k} holds material for a different circuit")
        if mat.n != n or mat.party != k or mat.width != width:
            raise CompareError(f"party {k} material does not match this evaluation")
        if len(inputs[k]) != width:
            raise CompareError(f"party {k} supplied {len(inputs[k])} inputs, expected {width}")
    transport = transport if transport is not None else LocalTransport()
    base = rng if rng is not None else Drbg(None, "gmw")
    parties = [
        _Party(k, circuit, materials[k], width, Drbg(base.getrandbits(256), "party", k))
        for k in range(n)
    ]
    stats = OnlineStats(and_gates=circuit.and_count)

    def _account(outbox, broadcast):
        for sender, msgs in outbox.items():
            for payload in msgs.values():
                stats.messages += 1
                stats.bits_sent += len(payload.words) * payload.width
            if broadcast and msgs:
                first = next(iter(msgs.values()))
                stats.bits_broadcast += len(first.words) * first.width
            elif not broadcast:
                stats.bits_broadcast += sum(len(p.words) * p.width for p in msgs.values())

    # input sharing
    outbox = {
        k: parties[k].share_inputs(circuit, bitslice(inputs[k], circuit.ell), n)
        for k in range(n)
    }
    _account(outbox, broadcast=False)
    inbox = transport.exchange("MPC_INPUT", outbox)
    for k in range(n):
        for sender, payload in inbox.get(k, {}).items():
            parties[k].receive_inputs(circuit, sender, payload)
    stats.input_rounds += 1

    ands, local = _schedule(circuit)
    for p in parties:
        p.local(local[0])
    for level in range(1, circuit.and_depth + 1):
        own = [p.open_ands(ands[level]) for p in parties]
        outbox = {
            k: {j: own[k] for j in range(n) if j != k} for k in range(n)
        }
        _account(outbox, broadcast=True)
        inbox = transport.exchange("MPC_OPEN", outbox)
        for k, p in enumerate(parties):
            received = [inbox[k][j] for j in sorted(inbox.get(k, {}))]
            if len(received) != n - 1:
                raise CompareError(f"party {k} missed openings in round {level}")
            p.close_ands(own[k], received)
            p.local(local[level])
        stats.rounds += 1

    out_shares = [MaskedBits((p.wires[circuit.output],), width) for p in parties]
    outbox = {k: {j: out_shares[k] for j in range(n) if j != k} for k in range(n)}
    _account(outbox, broadcast=True)
    inbox = transport.exchange("MPC_OUTPUT", outbox)
    results = []
    for k in range(n):
        word = reduce(xor, (inbox[k][j].words[0] for j in inbox[k]), out_shares[k].words[0])
        results.append(word)
    if any(r != results[0] for r in results):
        raise CompareError("parties disagree on the opened output")
    stats.output_rounds += 1
    return unslice(results[0], width), stats


def online_phase(
    circuit: ComparisonCircuit,
    inputs: Sequence[int],
    materials: Sequence[CorrelatedRandomness],
    transport: Transport | None = None,
    rng: random.Random | None = None,
) -> tuple[bool, OnlineStats]:
    """One comparison: ``inputs[k]`` is party ``k``'s ``x_k``."""
    out, stats = online_phase_batch(
        circuit, [[x] for x in inputs], materials, transport, rng
    )
    return out[0], stats


class IdealBackend:
    name = "ideal"

    def __init__(self, S: int):
        self.S = S
        self.calls = 0

    def compare(self, inputs: Sequence[int], transport: Transport | None = None) -> bool:
        self.calls += 1
        return ideal_compare(inputs, self.S)


@dataclass
class MpcBackend:
    """Offline + online GMW evaluation of the comparison circuit per call."""

    n: int
    ell: int
    provider: TripleProvider | None = None
    rng: random.Random | None = None
    name: str = "mpc"
    calls: int = 0
    triples_used: int = 0
    online: OnlineStats = field(default_factory=OnlineStats)

    def __post_init__(self):
        self.circuit = build_circuit(self.n, self.ell)
        if self.rng is None:
            self.rng = Drbg(None, "mpc")
        if self.provider is None:
            self.provider = TrustedDealer(Drbg(self.rng.getrandbits(256), "dealer"))

    def compare(self, inputs: Sequence[int], transport: Transport | None = None) -> bool:
        materials = offline_phase(self.n, self.circuit, self.provider)
        result, stats = online_phase(
            self.circuit, inputs, materials, transport,
            Drbg(self.rng.getrandbits(256), "online"),
        )
        self.calls += 1
        self.triples_used += self.circuit.and_count
        self.online.merge(stats)
        return result
