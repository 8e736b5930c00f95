"""Boolean circuit deciding whether the shared CPA cost is below the shared bound.

Party ``k`` feeds ``x_k = (b_k - a_k) mod S`` as ``ell`` input wires (LSB
first).  The circuit forms ``T = (sum_k x_k - 1) mod 2**ell`` with ripple-carry
adders and outputs ``NOT msb(T)``.  Because both the cost and the bound lie in
``[0, q_inf]`` and ``S > 2 q_inf``, ``msb(T) == 0`` exactly when
``(bound - cost) mod S`` is in ``[1, S/2]``, i.e. when cost < bound.

Wire values are Python ints used as bit vectors, so one evaluation can carry
many independent instances side by side (bit ``j`` of every wire belongs to
instance ``j``).
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

AND, XOR, NOT = "AND", "XOR", "NOT"


@dataclass(frozen=True)
class Gate:
    op: str
    ins: tuple[int, ...]
    out: int


@dataclass(frozen=True)
class ComparisonCircuit:
    n: int
    ell: int
    gates: tuple[Gate, ...]
    output: int

    @property
    def num_inputs(self) -> int:
        return self.n * self.ell

    @property
    def num_wires(self) -> int:
        return self.num_inputs + len(self.gates)

    def input_wire(self, party: int, bit: int) -> int:
        return party * self.ell + bit

    @cached_property
    def and_count(self) -> int:
        return sum(g.op == AND for g in self.gates)

    @cached_property
    def levels(self) -> list[int]:
        """AND-depth of every wire (inputs at level 0)."""
        level = [0] * self.num_wires
        for g in self.gates:
            lv = max(level[i] for i in g.ins)
            level[g.out] = lv + 1 if g.op == AND else lv
        return level

    @cached_property
    def and_depth(self) -> int:
        return max(self.levels) if self.gates else 0

    def dump(self) -> str:
        lines = []
        for g in self.gates:
            lines.append(" ".join([g.op, *map(str, g.ins), str(g.out)]))
        return "\n".join(lines) + "\n"

    @cached_property
    def fingerprint(self) -> str:
        head = f"n={self.n} ell={self.ell} out={self.output}\n"
        return hashlib.sha256((head + self.dump()).encode()).hexdigest()

    def stats_row(self) -> dict[str, int]:
        return {
            "n": self.n,
            "ell": self.ell,
            "gates": len(self.gates),
            "and_gates": self.and_count,
            "depth": self.and_depth,
        }

    def evaluate(self, inputs: Sequence[int], width: int = 1) -> int:
        """Plaintext evaluation on bit-sliced party inputs.

        ``inputs[k]`` is a list of ``ell`` words of ``width`` bits each, or a
        plain integer ``x_k`` when ``width == 1``.
        """
        mask = (1 << width) - 1
        wires = [0] * self.num_wires
        for k, x in enumerate(inputs):
            bits = _as_bits(x, self.ell, width)
            for i, b in enumerate(bits):
                wires[self.input_wire(k, i)] = b
        for g in self.gates:
            if g.op == XOR:
                wires[g.out] = wires[g.ins[0]] ^ wires[g.ins[1]]
            elif g.op == AND:
                wires[g.out] = wires[g.ins[0]] & wires[g.ins[1]]
            else:
                wires[g.out] = wires[g.ins[0]] ^ mask
        return wires[self.output]


def _as_bits(x, ell: int, width: int) -> list[int]:
    if isinstance(x, int):
        if width != 1:
            raise ValueError("integer inputs need width 1")
        return [(x >> i) & 1 for i in range(ell)]
    bits = list(x)
    if len(bits) != ell:
        raise ValueError(f"expected {ell} input words, got {len(bits)}")
    return bits


def bitslice(values: Sequence[int], ell: int) -> list[int]:
    """Pack many ``ell``-bit integers into ``ell`` words, one bit per value."""
    words = [0] * ell
    for j, v in enumerate(values):
        for i in range(ell):
            if (v >> i) & 1:
                words[i] |= 1 << j
    return words


def unslice(word: int, width: int) -> list[bool]:
    return [bool((word >> j) & 1) for j in range(width)]


class _Builder:
    def __init__(self, num_inputs: int):
        self.next_wire = num_inputs
        self.gates: list[Gate] = []

    def _emit(self, op, *ins):
        out = self.next_wire
        self.next_wire += 1
        self.gates.append(Gate(op, tuple(ins), out))
        return out

    def xor(self, a, b):
        return self._emit(XOR, a, b)

    def and_(self, a, b):
        return self._emit(AND, a, b)

    def not_(self, a):
        return self._emit(NOT, a)

    def add(self, a: list[int], b: list[int]) -> list[int]:
        """Ripple-carry ``a + b mod 2**len(a)``, one AND per carry."""
        ell = len(a)
        out = [self.xor(a[0], b[0])]
        if ell == 1:
            return out
        carry = self.and_(a[0], b[0])
        for i in range(1, ell):
            axc = self.xor(a[i], carry)
            out.append(self.xor(axc, b[i]))
            if i < ell - 1:
                # majority(a, b, c) = ((a ^ c) & (b ^ c)) ^ c
                bxc = self.xor(b[i], carry)
                carry = self.xor(self.and_(axc, bxc), carry)
        return out

    def decrement(self, a: list[int]) -> list[int]:
        """``a + (2**ell - 1) mod 2**ell``: adds an all-ones constant."""
        ell = len(a)
        out = [self.not_(a[0])]
        carry = a[0]
        for i in range(1, ell):
            axc = self.xor(a[i], carry)
            out.append(self.not_(axc))
            if i < ell - 1:
                # majority(a, 1, c) = a | c = (a ^ c) ^ (a & c)
                carry = self.xor(axc, self.and_(a[i], carry))
        return out


def _prune(gates: list[Gate], output: int, num_inputs: int):
    """Drop gates that do not feed the output and renumber wires densely."""
    live = {output}
    kept = []
    for g in reversed(gates):
        if g.out in live:
            kept.append(g)
            live.update(g.ins)
    kept.reverse()
    remap = {w: w for w in range(num_inputs)}
    for i, g in enumerate(kept):
        remap[g.out] = num_inputs + i
    renumbered = [
        Gate(g.op, tuple(remap[w] for w in g.ins), remap[g.out]) for g in kept
    ]
    return renumbered, remap[output]


def build_circuit(n: int, ell: int) -> ComparisonCircuit:
    if n < 2:
        raise ValueError(f"need at least two parties, got {n}")
    if ell < 2:
        raise ValueError(f"need at least two bits, got {ell}")
    b = _Builder(n * ell)
    acc = list(range(ell))
    for k in range(1, n):
        acc = b.add(acc, [k * ell + i for i in range(ell)])
    t = b.decrement(acc)
    out = b.not_(t[ell - 1])
    gates, output = _prune(b.gates, out, n * ell)
    return ComparisonCircuit(n=n, ell=ell, gates=tuple(gates), output=output)
