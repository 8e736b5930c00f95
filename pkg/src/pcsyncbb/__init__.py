"""Collusion-resistant privacy-preserving SyncBB for DCOPs."""

from pcsyncbb.dcop import (
    Assignment,
    CostMatrix,
    DcopInstance,
    PublicParams,
    cost_of,
    public_params,
)
from pcsyncbb.generators import gen_graph_coloring, gen_random, gen_scale_free
from pcsyncbb.instance_io import parse_instance, serialize_instance
from pcsyncbb.baseline import SearchStats, SolveResult, brute_force, plaintext_syncbb
from pcsyncbb.engine import PcSyncBB, RunConfig, RunMetrics, RunResult, run

__all__ = [
    "Assignment",
    "CostMatrix",
    "DcopInstance",
    "PcSyncBB",
    "PublicParams",
    "RunConfig",
    "RunMetrics",
    "RunResult",
    "SearchStats",
    "SolveResult",
    "brute_force",
    "cost_of",
    "gen_graph_coloring",
    "gen_random",
    "gen_scale_free",
    "parse_instance",
    "plaintext_syncbb",
    "public_params",
    "run",
    "serialize_instance",
]
