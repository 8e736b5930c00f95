"""Benchmark instance families: uniform random, weighted graph colouring and
Barabási-Albert scale-free networks.

Every generator takes an explicit seed and draws from its own
``numpy.random.Generator``, so the same arguments give the same instance.
"""
from __future__ import annotations

from itertools import combinations

import networkx as nx
import numpy as np

from pcsyncbb.dcop import DcopInstance

MAX_CONNECT_RETRIES = 1000


class GenerationError(RuntimeError):
    pass


def _random_connected_edges(n, p1, rng, max_retries):
    if not 0.0 < p1 <= 1.0:
        raise ValueError(f"density must lie in (0, 1], got {p1}")
    if n < 2:
        raise ValueError(f"need at least two agents, got n={n}")
    pairs = list(combinations(range(n), 2))
    for _ in range(max_retries):
        draws = rng.random(len(pairs))
        edges = [pair for pair, u in zip(pairs, draws) if u < p1]
        g = nx.Graph()
        g.add_nodes_from(range(n))
        g.add_edges_from(edges)
        if nx.is_connected(g):
            return edges
    raise GenerationError(
        f"no connected graph with n={n}, p1={p1} after {max_retries} attempts"
    )


def _uniform_matrix(rng, rows, cols, q):
    return rng.integers(0, q + 1, size=(rows, cols)).tolist()


def gen_random(
    n: int,
    domain_size: int,
    p1: float,
    q: int,
    seed: int | None = None,
    max_retries: int = MAX_CONNECT_RETRIES,
) -> DcopInstance:
    """Unstructured random DCOP.

    Each pair of agents is constrained independently with probability ``p1``
    (redrawn until the constraint graph is connected); costs are uniform on
    ``[0, q]``.
    """
    if domain_size < 1:
        raise ValueError("domain size must be positive")
    rng = np.random.default_rng(seed)
    edges = _random_connected_edges(n, p1, rng, max_retries)
    domains = [tuple(range(domain_size))] * n
    constraints = {
        e: _uniform_matrix(rng, domain_size, domain_size, q) for e in edges
    }
    return DcopInstance(domains=domains, q=q, constraints=constraints)


def gen_graph_coloring(
    n: int,
    p1: float,
    q: int,
    colors: int = 3,
    seed: int | None = None,
    max_retries: int = MAX_CONNECT_RETRIES,
) -> DcopInstance:
    """Graph colouring with private penalties.

    Constraint matrices are diagonal: neighbours taking the same colour pay a
    random cost in ``[1, q]``, different colours cost nothing.
    """
    if colors < 2:
        raise ValueError(f"need at least two colours, got {colors}")
    rng = np.random.default_rng(seed)
    edges = _random_connected_edges(n, p1, rng, max_retries)
    constraints = {}
    for e in edges:
        diag = rng.integers(1, q + 1, size=colors)
        m = np.zeros((colors, colors), dtype=np.int64)
        np.fill_diagonal(m, diag)
        constraints[e] = m.tolist()
    domains = [tuple(range(colors))] * n
    return DcopInstance(domains=domains, q=q, constraints=constraints)


def ba_edges(n: int, attach: int, rng: np.random.Generator) -> list[tuple[int, int]]:
    """Preferential-attachment edge list grown from a clique of ``attach`` nodes."""
    if not 1 <= attach < n:
        raise ValueError(f"attach count must satisfy 1 <= m < n, got m={attach}, n={n}")
    edges = list(combinations(range(attach), 2))
    # one entry per edge endpoint, so uniform sampling is degree-proportional
    endpoints = [v for e in edges for v in e]
    for new in range(attach, n):
        if new == attach:
            targets = set(range(attach))
        else:
            targets = set()
            while len(targets) < attach:
                targets.add(endpoints[rng.integers(len(endpoints))])
        for t in sorted(targets):
            edges.append((t, new))
            endpoints.extend((t, new))
    return edges


def gen_scale_free(
    n: int,
    attach: int,
    domain_size: int,
    q: int,
    seed: int | None = None,
) -> DcopInstance:
    """Barabási-Albert scale-free DCOP with uniform random costs."""
    if domain_size < 1:
        raise ValueError("domain size must be positive")
    rng = np.random.default_rng(seed)
    edges = ba_edges(n, attach, rng)
    domains = [tuple(range(domain_size))] * n
    constraints = {
        e: _uniform_matrix(rng, domain_size, domain_size, q) for e in sorted(edges)
    }
    return DcopInstance(domains=domains, q=q, constraints=constraints)


def generate(family: str, *, n: int, p1: float, domain: int, q: int,
             seed: int | None, attach: int = 2) -> DcopInstance:
    """Dispatch on a benchmark family name (``random|coloring|scalefree``).

    For ``coloring`` the domain size is the number of colours.
    """
    if family == "random":
        return gen_random(n, domain, p1, q, seed)
    if family == "coloring":
        return gen_graph_coloring(n, p1, q, colors=domain, seed=seed)
    if family == "scalefree":
        return gen_scale_free(n, min(attach, n - 1), domain, q, seed)
    raise ValueError(f"unknown benchmark family {family!r}")
