"""The private branch-and-bound protocol run by ``n`` agents over the simnet.

Every agent holds additive shares (mod ``S``) of the current partial
assignment's cost and of the upper bound; nobody ever sees either value.
Shares for a newly assigned variable are refreshed with the encrypted
indicator-vector exchange, and the prune / new-optimum decision is a secure
comparison of the two shared sums.

The event loop is deterministic.  Sub-protocols that need a reply before the
initiator can continue (the Paillier share update and the comparison) send
their messages and then drain the queue; only data-carrying messages can be
pending at that point, which :meth:`PcSyncBB._drain` enforces.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable

from pcsyncbb.baseline import OrderingProvider, SearchStats, SolveResult
from pcsyncbb.compare.backends import IdealBackend, MaskedBits, MpcBackend
from pcsyncbb.crypto.indicator import EncIndicatorVector, build_indicator_vectors
from pcsyncbb.crypto.paillier import Ciphertext, PaillierContext, PaillierPublicKey, keygen
from pcsyncbb.dcop import CostMatrix, DcopInstance, PublicParams, cost_of
from pcsyncbb.rng import Drbg
from pcsyncbb.simnet import AgentIndex, CipherPayload, Message, Network, Tag, Trace

TORCH_TAGS = (Tag.CPA_MSG, Tag.BACKTRACK_MSG)


class ProtocolError(RuntimeError):
    pass


class CutoffExceeded(RuntimeError):
    pass


Observer = Callable[..., None]


@dataclass
class RunConfig:
    backend: str = "ideal"  # "ideal" | "mpc"
    keybits: int = 2048
    seed: int | None = None
    orderings: OrderingProvider | None = None
    observer: Observer | None = None
    cutoff_secs: float | None = None
    keep_payloads: bool = True


@dataclass
class RunMetrics:
    comparisons: int = 0
    assignments: int = 0
    new_optima: int = 0
    encryptions: int = 0
    decryptions: int = 0
    exponentiations: int = 0
    multiplications: int = 0
    keygens: int = 0
    messages: int = 0
    bytes: int = 0
    mpc_rounds: int = 0
    mpc_bits: int = 0
    triples: int = 0
    wall_secs: float = 0.0

    @property
    def paillier_ops(self) -> int:
        return self.encryptions + self.decryptions + self.exponentiations + self.multiplications

    def as_row(self) -> dict[str, float]:
        row = {k: getattr(self, k) for k in self.__dataclass_fields__}
        row["paillier_ops"] = self.paillier_ops
        return row


@dataclass
class RunResult:
    result: SolveResult
    metrics: RunMetrics
    trace: Trace


@dataclass
class AgentState:
    """Everything agent ``k`` knows.  Matrices only for its own constraints."""

    k: int
    n: int
    domain: tuple[int, ...]
    preds: list[int]
    succs: list[int]
    matrices: dict[int, CostMatrix]  # t -> M_{t,k} for t in preds
    params: PublicParams
    s_cpa: list[int] = field(default_factory=list)
    s_ub: int = 0
    p: int = 0
    w: list[int] = field(default_factory=list)
    traversals: int = 0
    x: int | None = None
    optimal_setting: int | None = None
    paillier: PaillierContext | None = None
    z_vectors: list[EncIndicatorVector] = field(default_factory=list)
    pred_keys: dict[int, PaillierPublicKey] = field(default_factory=dict)
    received_z: dict[int, tuple[Ciphertext, ...]] = field(default_factory=dict)
    mpc_inbox: dict[str, dict[int, MaskedBits]] = field(default_factory=dict)
    terminated: bool = False

    @property
    def neighbors(self) -> list[int]:
        return self.preds + self.succs

    def value_index(self, v: int) -> int:
        return self.domain.index(v)

    def cpa_share(self) -> int:
        S = self.params.S
        return sum(self.s_cpa[t] for t in self.neighbors) % S

    def compare_input(self) -> int:
        """``x_k = (b_k - a_k) mod S``."""
        S = self.params.S
        return (self.s_ub - self.cpa_share()) % S


class _NetworkTransport:
    """Routes MPC rounds through the simulated network."""

    def __init__(self, engine: "PcSyncBB"):
        self.engine = engine

    def exchange(self, kind, outbox):
        net = self.engine.network
        tag = Tag(kind)
        for sender in sorted(outbox):
            for receiver in sorted(outbox[sender]):
                net.send(tag, sender, receiver, outbox[sender][receiver])
        self.engine._drain()
        inbox = {}
        for a in self.engine.agents:
            inbox[a.k] = a.mpc_inbox.pop(kind, {})
        return inbox


class PcSyncBB:
    """One protocol run over one instance."""

    def __init__(self, instance: DcopInstance, config: RunConfig | None = None):
        self.instance = instance
        self.config = config or RunConfig()
        self.params = instance.params
        self.n = instance.n
        seed = self.config.seed
        if seed is None:
            seed = Drbg(None).getrandbits(64)
        self.seed = seed
        self.metrics = RunMetrics()
        self.network = Network(self.n, Trace(self.config.keep_payloads))
        self.stats = SearchStats()
        self.torch: int | None = None
        self.cpa_len = 0  # simulator bookkeeping for instrumentation only
        self.observer = self.config.observer
        self._deadline = None
        self.agents = [self._make_agent(k) for k in range(self.n)]
        self._rng_order = [Drbg(seed, "agent", k, "order") for k in range(self.n)]
        self._rng_rho = [Drbg(seed, "agent", k, "rho") for k in range(self.n)]
        self._rng_key = [Drbg(seed, "agent", k, "paillier") for k in range(self.n)]
        for k in range(self.n):
            self.network.register(k, self._handler(k))
        if self.config.backend == "ideal":
            self.backend = IdealBackend(self.params.S)
            self._transport = None
        elif self.config.backend == "mpc":
            self.backend = MpcBackend(self.n, self.params.ell, rng=Drbg(seed, "mpc"))
            self._transport = _NetworkTransport(self)
        else:
            raise ValueError(f"unknown comparison backend {self.config.backend!r}")

    def _make_agent(self, k: int) -> AgentState:
        inst = self.instance
        preds = inst.predecessors(k)
        return AgentState(
            k=k,
            n=self.n,
            domain=inst.domains[k],
            preds=preds,
            succs=inst.successors(k),
            matrices={t: inst.constraints[(t, k)] for t in preds},
            params=self.params,
        )

    def _handler(self, k: int):
        return lambda msg: self._receive(self.agents[k], msg)

    def _notify(self, event: str, **info) -> None:
        if self.observer is not None:
            self.observer(event, self, **info)

    def _drain(self) -> None:
        """Deliver all queued data messages in FIFO order."""
        for msg in self.network.queue:
            if msg.tag in TORCH_TAGS:
                raise ProtocolError(
                    f"{msg.tag} from agent {msg.sender} pending inside a sub-protocol"
                )
        self.network.flush()

    def _check_cutoff(self) -> None:
        if self._deadline is not None and time.monotonic() > self._deadline:
            raise CutoffExceeded(f"run exceeded {self.config.cutoff_secs}s")

    # ------------------------------------------------------------------ setup

    def setup(self) -> None:
        """Key generation, indicator vectors and public-key distribution."""
        for a in self.agents:
            if a.k < self.n - 1:
                ctx = keygen(self.config.keybits, self._rng_key[a.k])
                if ctx.public.n <= self.params.S ** 2:
                    raise ProtocolError("Paillier modulus must exceed S^2")
                a.paillier = ctx
                a.z_vectors = build_indicator_vectors(
                    ctx.public, len(a.domain), self._rng_key[a.k]
                )
                self.metrics.keygens += 1
                self.metrics.encryptions += len(a.domain)
                for t in a.succs:
                    self.network.send(Tag.PUBKEY, a.k, t, ctx.public)
        # initial indicator vectors, superseded on the agent's first assignment
        for a in self.agents:
            if a.paillier is not None:
                z = a.z_vectors[0]
                payload = CipherPayload(z.ciphertexts, a.paillier.public.ciphertext_bytes, vector=True)
                for t in a.succs:
                    self.network.send(Tag.Z_VECTOR, a.k, t, payload)
        self.network.flush()

    def init(self) -> None:
        for a in self.agents:
            a.s_cpa = [0] * self.n
            a.p = 0
            a.s_ub = self.params.q_inf if a.k == 0 else 0
        self.stats.bounds.append(self.params.q_inf)
        self._notify("init")

    def run(self) -> RunResult:
        start = time.monotonic()
        if self.config.cutoff_secs is not None:
            self._deadline = start + self.config.cutoff_secs
        self.setup()
        self.init()
        self.torch = 0
        self.assign_cpa(self.agents[0])
        self.network.run()
        if not all(a.terminated for a in self.agents):
            raise ProtocolError("event loop drained before COMPLETE reached every agent")
        self.metrics.wall_secs = time.monotonic() - start
        return self._result()

    def _result(self) -> RunResult:
        assignment = {a.k: a.x for a in self.agents}
        cost = cost_of(self.instance, assignment)
        m = self.metrics
        m.messages = len(self.network.trace)
        m.bytes = self.network.trace.total_bytes()
        if isinstance(self.backend, MpcBackend):
            m.mpc_rounds = self.backend.online.rounds
            m.mpc_bits = self.backend.online.bits_sent
            m.triples = self.backend.triples_used
        self.stats.messages = m.messages
        self.stats.comparisons = m.comparisons
        self.stats.node_expansions = m.assignments
        self.stats.new_optima = m.new_optima
        return RunResult(SolveResult(assignment, cost, self.stats), m, self.network.trace)

    # --------------------------------------------------------------- protocol

    def _new_ordering(self, a: AgentState) -> list[int]:
        d = len(a.domain)
        if self.config.orderings is not None:
            order = [int(i) for i in self.config.orderings(a.k, a.traversals)]
            if sorted(order) != list(range(d)):
                raise ProtocolError(f"injected ordering for agent {a.k} is not a permutation")
        else:
            order = list(range(d))
            self._rng_order[a.k].shuffle(order)
        a.traversals += 1
        return [a.domain[i] for i in order]

    def assign_cpa(self, a: AgentState) -> None:
        if self.torch != a.k:
            raise ProtocolError(f"agent {a.k} acted without holding the torch ({self.torch})")
        while True:
            self._check_cutoff()
            if a.p == 0:
                a.w = self._new_ordering(a)
            a.p += 1
            if a.p > len(a.domain):
                self.backtrack(a)
                return
            v = a.w[a.p - 1]
            a.x = v
            self.metrics.assignments += 1
            self.update_shares_in_cpa(a, v)
            below = self.compare_cpa_cost_to_upper_bound(a.k)
            if a.k == self.n - 1:
                if below:
                    self.network.broadcast(Tag.NEW_OPTIMUM_FOUND, a.k)
                    self._on_new_optimum(a)
                    self._drain()
                    self.metrics.new_optima += 1
                    self.stats.bounds.append(self.reconstruct_bound())
                    self._notify("new_optimum")
                continue
            if not below:
                continue
            self.torch = None
            self.network.send(Tag.CPA_MSG, a.k, a.k + 1)
            return

    def update_shares_in_cpa(self, a: AgentState, v: int) -> None:
        S = self.params.S
        s = a.value_index(v)
        for t in a.preds:
            z = a.received_z.get(t)
            if z is None:
                raise ProtocolError(f"agent {a.k} has no indicator vector from {t}")
            key = a.pred_keys[t]
            rho = self._rng_rho[a.k].randrange(S)
            column = [(row[s] - rho) % S for row in a.matrices[t]]
            y = key.linear_combination(z, column)
            self.metrics.exponentiations += sum(1 for e in column if e)
            self.metrics.multiplications += max(0, sum(1 for e in column if e) - 1)
            self.network.send(
                Tag.Y_VALUE, a.k, t, CipherPayload((y,), key.ciphertext_bytes)
            )
            a.s_cpa[t] = rho
        self._drain()
        self.cpa_len = a.k + 1
        for t in a.preds:
            self._notify("pair_update", t=t, k=a.k)
        self._notify("update", k=a.k)
        if a.k < self.n - 1:
            z = a.z_vectors[s]
            payload = CipherPayload(z.ciphertexts, a.paillier.public.ciphertext_bytes, vector=True)
            for t in a.succs:
                self.network.send(Tag.Z_VECTOR, a.k, t, payload)

    def backtrack(self, a: AgentState) -> None:
        if a.k > 0:
            for t in a.preds:
                a.s_cpa[t] = 0
                self.network.send(Tag.ZERO_SHARE_MSG, a.k, t, AgentIndex(a.k))
            self._drain()
            self.cpa_len = a.k
            self._notify("backtrack", k=a.k)
            self.torch = None
            self.network.send(Tag.BACKTRACK_MSG, a.k, a.k - 1)
        else:
            self.torch = None
            self.network.broadcast(Tag.COMPLETE, a.k)
            self._on_complete(a)

    def compare_cpa_cost_to_upper_bound(self, initiator: int) -> bool:
        inputs = [a.compare_input() for a in self.agents]
        result = self.backend.compare(inputs, self._transport)
        self.metrics.comparisons += 1
        self.stats.outcomes.append(result)
        self._notify("compare", k=initiator, result=result, inputs=inputs)
        return result

    # --------------------------------------------------------------- handlers

    def _receive(self, a: AgentState, msg: Message) -> None:
        tag = msg.tag
        if tag == Tag.CPA_MSG:
            self._require_top_level(msg)
            self.torch = a.k
            a.p = 0
            self.assign_cpa(a)
        elif tag == Tag.BACKTRACK_MSG:
            self._require_top_level(msg)
            self.torch = a.k
            self.assign_cpa(a)
        elif tag == Tag.ZERO_SHARE_MSG:
            a.s_cpa[msg.payload.value] = 0
        elif tag == Tag.NEW_OPTIMUM_FOUND:
            self._on_new_optimum(a)
        elif tag == Tag.COMPLETE:
            self._on_complete(a)
        elif tag == Tag.Y_VALUE:
            (y,) = msg.payload.ciphertexts
            plain = a.paillier.decrypt(y)
            self.metrics.decryptions += 1
            if not 0 <= plain < self.params.S:
                raise ProtocolError(f"agent {a.k} decrypted an out-of-range share")
            a.s_cpa[msg.sender] = plain
        elif tag == Tag.Z_VECTOR:
            a.received_z[msg.sender] = msg.payload.ciphertexts
        elif tag == Tag.PUBKEY:
            a.pred_keys[msg.sender] = msg.payload
        elif tag in (Tag.MPC_INPUT, Tag.MPC_OPEN, Tag.MPC_OUTPUT):
            a.mpc_inbox.setdefault(str(tag), {})[msg.sender] = msg.payload
        else:
            raise ProtocolError(f"unexpected message {tag}")

    def _require_top_level(self, msg: Message) -> None:
        if self.network.depth > 1:
            raise ProtocolError(f"{msg.tag} delivered inside a sub-protocol")

    def _on_new_optimum(self, a: AgentState) -> None:
        a.s_ub = a.cpa_share()
        a.optimal_setting = a.x

    def _on_complete(self, a: AgentState) -> None:
        a.x = a.optimal_setting
        a.terminated = True

    # ------------------------------------------------------ god's-eye helpers

    def current_cpa(self) -> dict[int, int]:
        return {a.k: a.x for a in self.agents[: self.cpa_len]}

    def reconstruct_cpa_cost(self) -> int:
        return sum(a.cpa_share() for a in self.agents) % self.params.S

    def reconstruct_bound(self) -> int:
        return sum(a.s_ub for a in self.agents) % self.params.S

    def full_assignment(self) -> dict[int, int]:
        return {a.k: a.x for a in self.agents}


def run(instance: DcopInstance, config: RunConfig | None = None) -> RunResult:
    """Solve ``instance`` with the private protocol."""
    return PcSyncBB(instance, config).run()
