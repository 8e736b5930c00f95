"""Binary DCOP model and the public parameters every agent agrees on.

Agents and variables are identified by 0-based indices; agent ``k`` owns
variable ``k`` and the public agent order is ``0, 1, ..., n-1``.  Constraints
are keyed by the unordered pair ``(t, k)`` with ``t < k``; the cost matrix
has one row per value of ``t`` and one column per value of ``k``, both in the
natural (public) domain order.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

CostMatrix = tuple[tuple[int, ...], ...]
Assignment = Mapping[int, int]


class InstanceError(ValueError):
    """An instance violates a model invariant."""


@dataclass(frozen=True)
class PublicParams:
    q_inf: int
    S: int
    ell: int


def public_params(n: int, q: int) -> PublicParams:
    """Public bound and share modulus for ``n`` agents with max cost ``q``.

    ``q_inf`` exceeds the cost of any full assignment; ``S`` is the smallest
    power of two strictly greater than ``2 * q_inf`` so that differences of
    two admissible costs never wrap past ``S/2``.

    >>> public_params(5, 100)
    PublicParams(q_inf=1001, S=2048, ell=11)
    """
    if n < 2:
        raise ValueError(f"need at least two agents, got n={n}")
    if q < 1:
        raise ValueError(f"max constraint cost must be >= 1, got q={q}")
    q_inf = n * (n - 1) // 2 * q + 1
    ell = (2 * q_inf).bit_length()
    return PublicParams(q_inf=q_inf, S=1 << ell, ell=ell)


def _freeze_matrix(rows: Sequence[Sequence[int]]) -> CostMatrix:
    return tuple(tuple(int(c) for c in row) for row in rows)


@dataclass(frozen=True)
class DcopInstance:
    """A binary DCOP with one variable per agent.

    ``constraints`` maps ``(t, k)``, ``t < k``, to the matrix
    ``M[r][s] = C_{t,k}(domains[t][r], domains[k][s])``.
    """

    domains: tuple[tuple[int, ...], ...]
    q: int
    constraints: Mapping[tuple[int, int], CostMatrix] = field(default_factory=dict)

    def __post_init__(self):
        domains = tuple(tuple(int(v) for v in d) for d in self.domains)
        object.__setattr__(self, "domains", domains)
        frozen = {
            (int(t), int(k)): _freeze_matrix(m)
            for (t, k), m in sorted(self.constraints.items())
        }
        object.__setattr__(self, "constraints", frozen)
        self.validate()

    @property
    def n(self) -> int:
        return len(self.domains)

    @property
    def params(self) -> PublicParams:
        return public_params(self.n, self.q)

    def validate(self) -> None:
        n = self.n
        if n < 2:
            raise InstanceError(f"need at least two agents, got {n}")
        if self.q < 1:
            raise InstanceError(f"q must be >= 1, got {self.q}")
        for i, dom in enumerate(self.domains):
            if not dom:
                raise InstanceError(f"domain of variable {i} is empty")
            if len(set(dom)) != len(dom):
                raise InstanceError(f"domain of variable {i} has duplicate values")
        for (t, k), m in self.constraints.items():
            if not (0 <= t < k < n):
                raise InstanceError(f"bad constraint pair ({t}, {k})")
            rows, cols = len(self.domains[t]), len(self.domains[k])
            if len(m) != rows or any(len(row) != cols for row in m):
                raise InstanceError(
                    f"matrix for ({t}, {k}) must be {rows}x{cols}"
                )
            for row in m:
                for c in row:
                    if not 0 <= c <= self.q:
                        raise InstanceError(
                            f"cost {c} on ({t}, {k}) outside [0, {self.q}]"
                        )

    def constrained(self, t: int, k: int) -> bool:
        if t > k:
            t, k = k, t
        return (t, k) in self.constraints

    def predecessors(self, k: int) -> list[int]:
        """Constrained neighbours earlier in the order."""
        return [t for t in range(k) if (t, k) in self.constraints]

    def successors(self, k: int) -> list[int]:
        """Constrained neighbours later in the order."""
        return [t for t in range(k + 1, self.n) if (k, t) in self.constraints]

    def neighbors(self, k: int) -> list[int]:
        return self.predecessors(k) + self.successors(k)

    def edges(self) -> list[tuple[int, int]]:
        return list(self.constraints)

    def value_index(self, k: int, value: int) -> int:
        try:
            return self.domains[k].index(value)
        except ValueError:
            raise InstanceError(
                f"value {value!r} not in domain of variable {k}"
            ) from None


def cost_of(instance: DcopInstance, pa: Assignment) -> int:
    """Sum of every constraint whose two endpoints are assigned in ``pa``."""
    idx = {}
    for var, value in pa.items():
        if not 0 <= var < instance.n:
            raise InstanceError(f"unknown variable {var}")
        idx[var] = instance.value_index(var, value)
    total = 0
    for (t, k), m in instance.constraints.items():
        if t in idx and k in idx:
            total += m[idx[t]][idx[k]]
    return total
