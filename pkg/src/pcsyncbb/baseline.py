"""Non-private reference solvers.

``brute_force`` is the correctness oracle; ``plaintext_syncbb`` is the
classical synchronous branch-and-bound with the same control flow and the
same bound discipline (start at ``q_inf``, strict improvement) as the private
protocol, so their comparison sequences can be diffed step for step.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from pcsyncbb.dcop import DcopInstance, cost_of

#: ``ordering(k, traversal)`` returns the value-index permutation agent ``k``
#: scans during its ``traversal``-th pass over its domain.
OrderingProvider = Callable[[int, int], Sequence[int]]


@dataclass
class SearchStats:
    comparisons: int = 0
    node_expansions: int = 0
    messages: int = 0
    new_optima: int = 0
    outcomes: list[bool] = field(default_factory=list)
    bounds: list[int] = field(default_factory=list)


@dataclass
class SolveResult:
    assignment: dict[int, int]
    cost: int
    stats: SearchStats = field(default_factory=SearchStats)


def natural_order(instance: DcopInstance) -> OrderingProvider:
    sizes = [len(d) for d in instance.domains]
    return lambda k, _traversal: range(sizes[k])


def _cost_tensor(instance: DcopInstance) -> np.ndarray:
    sizes = [len(d) for d in instance.domains]
    total = np.zeros(sizes, dtype=np.int64)
    n = instance.n
    for (t, k), m in instance.constraints.items():
        shape = [1] * n
        shape[t], shape[k] = sizes[t], sizes[k]
        total += np.asarray(m, dtype=np.int64).reshape(shape)
    return total


def brute_force(instance: DcopInstance) -> SolveResult:
    """Exhaustive minimum over the full product of domains.

    Ties go to the lexicographically smallest tuple of value indices (the
    first minimum in C order).
    """
    costs = _cost_tensor(instance)
    flat = int(np.argmin(costs))
    idx = np.unravel_index(flat, costs.shape)
    assignment = {k: instance.domains[k][int(i)] for k, i in enumerate(idx)}
    stats = SearchStats(node_expansions=int(costs.size))
    return SolveResult(assignment, int(costs.flat[flat]), stats)


def plaintext_syncbb(
    instance: DcopInstance,
    ordering: Sequence[int] | None = None,
    orderings: OrderingProvider | None = None,
) -> SolveResult:
    """Synchronous branch and bound in the clear.

    ``ordering`` is the agent order (a permutation of ``range(n)``, default
    identity).  ``orderings`` supplies each traversal's value order; the
    default is the natural domain order.  A CPA is extended only while its
    cost is strictly below the bound, and a full assignment becomes the new
    optimum only on strict improvement.
    """
    n = instance.n
    agents = list(range(n)) if ordering is None else list(ordering)
    if sorted(agents) != list(range(n)):
        raise ValueError("agent ordering must be a permutation of range(n)")
    if agents != list(range(n)):
        # relabel so the search below always runs in index order
        inverse = {old: new for new, old in enumerate(agents)}
        relabelled = DcopInstance(
            domains=tuple(instance.domains[a] for a in agents),
            q=instance.q,
            constraints={
                tuple(sorted((inverse[t], inverse[k]))): (
                    m if inverse[t] < inverse[k] else tuple(zip(*m))
                )
                for (t, k), m in instance.constraints.items()
            },
        )
        inner_orderings = None
        if orderings is not None:
            inner_orderings = lambda k, j: orderings(agents[k], j)  # noqa: E731
        res = plaintext_syncbb(relabelled, orderings=inner_orderings)
        res.assignment = {agents[k]: v for k, v in res.assignment.items()}
        return res

    if orderings is None:
        orderings = natural_order(instance)
    sizes = [len(d) for d in instance.domains]
    preds = [instance.predecessors(k) for k in range(n)]
    mats = instance.constraints

    stats = SearchStats()
    ub = instance.params.q_inf
    stats.bounds.append(ub)
    best: list[int] | None = None

    p = [0] * n
    w: list[list[int]] = [[] for _ in range(n)]
    traversals = [0] * n
    x = [-1] * n
    prefix = [0] * (n + 1)  # prefix[k + 1] = cost of CPA over agents 0..k
    k = 0
    while True:
        if p[k] == 0:
            w[k] = list(orderings(k, traversals[k]))
            traversals[k] += 1
        p[k] += 1
        if p[k] > sizes[k]:
            if k == 0:
                stats.messages += n - 1  # COMPLETE broadcast
                break
            stats.messages += 1  # BACKTRACK
            x[k] = -1
            k -= 1
            continue
        s = w[k][p[k] - 1]
        x[k] = s
        stats.node_expansions += 1
        prefix[k + 1] = prefix[k] + sum(mats[(t, k)][x[t]][s] for t in preds[k])
        cost = prefix[k + 1]
        below = cost < ub
        stats.comparisons += 1
        stats.outcomes.append(below)
        if k == n - 1:
            if below:
                ub = cost
                best = list(x)
                stats.new_optima += 1
                stats.bounds.append(ub)
                stats.messages += n - 1
            continue
        if below:
            stats.messages += 1  # CPA_MSG
            k += 1
            p[k] = 0

    assert best is not None, "first full assignment always beats q_inf"
    assignment = {i: instance.domains[i][best[i]] for i in range(n)}
    result = SolveResult(assignment, cost_of(instance, assignment), stats)
    assert result.cost == ub
    return result
