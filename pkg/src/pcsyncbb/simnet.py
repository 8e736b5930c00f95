"""In-process simulated network with FIFO delivery, tracing and a cost model.

The scheduler is a single global FIFO queue, which in particular keeps every
sender-to-receiver channel in order.  Time is logical (one step per
delivery); wall-clock estimates come only from :class:`CostModel`.
"""
from __future__ import annotations

import hashlib
from collections import deque
from dataclasses import dataclass, fields
from enum import Enum
from pathlib import Path
from typing import Callable, Iterable

from pcsyncbb.compare.backends import MaskedBits
from pcsyncbb.crypto.paillier import Ciphertext, PaillierPublicKey


class Tag(str, Enum):
    CPA_MSG = "CPA_MSG"
    BACKTRACK_MSG = "BACKTRACK_MSG"
    ZERO_SHARE_MSG = "ZERO_SHARE_MSG"
    NEW_OPTIMUM_FOUND = "NEW_OPTIMUM_FOUND"
    COMPLETE = "COMPLETE"
    Z_VECTOR = "Z_VECTOR"
    Y_VALUE = "Y_VALUE"
    PUBKEY = "PUBKEY"
    MPC_INPUT = "MPC_INPUT"
    MPC_OPEN = "MPC_OPEN"
    MPC_OUTPUT = "MPC_OUTPUT"

    def __str__(self) -> str:
        return self.value


MPC_TAGS = frozenset({"MPC_INPUT", "MPC_OPEN", "MPC_OUTPUT"})


@dataclass(frozen=True)
class AgentIndex:
    value: int


@dataclass(frozen=True)
class CipherPayload:
    """One or more Paillier ciphertexts, each encoded in ``width`` bytes."""

    ciphertexts: tuple[Ciphertext, ...]
    width: int
    vector: bool = False


def payload_kind(payload) -> str:
    if payload is None:
        return "none"
    if isinstance(payload, AgentIndex):
        return "index"
    if isinstance(payload, CipherPayload):
        return "ciphertext-vector" if payload.vector else "ciphertext"
    if isinstance(payload, PaillierPublicKey):
        return "public-key"
    if isinstance(payload, MaskedBits):
        return "masked-bits"
    return "unknown"


def payload_bytes(payload) -> int:
    if payload is None:
        return 0
    if isinstance(payload, AgentIndex):
        return 4
    if isinstance(payload, CipherPayload):
        return payload.width * len(payload.ciphertexts)
    if isinstance(payload, PaillierPublicKey):
        return payload.key_bytes
    if isinstance(payload, MaskedBits):
        return payload.nbytes
    raise TypeError(f"cannot size payload of type {type(payload).__name__}")


@dataclass(frozen=True)
class Message:
    tag: Tag
    sender: int
    receiver: int
    payload: object = None
    broadcast: bool = False


@dataclass(frozen=True)
class TraceEvent:
    step: int
    sender: int
    receiver: int
    tag: str
    kind: str
    nbytes: int
    payload: object = None

    def line(self) -> str:
        return (
            f"{self.step} | {self.sender} -> {self.receiver} | {self.tag} | "
            f"{self.kind} | {self.nbytes}"
        )


class TraceFormatError(ValueError):
    pass


class Trace:
    def __init__(self, keep_payloads: bool = True):
        self.events: list[TraceEvent] = []
        self.keep_payloads = keep_payloads
        self._hash = hashlib.sha256()

    def record(self, step: int, msg: Message) -> None:
        ev = TraceEvent(
            step,
            msg.sender,
            msg.receiver,
            str(msg.tag),
            payload_kind(msg.payload),
            payload_bytes(msg.payload),
            msg.payload if self.keep_payloads else None,
        )
        self.events.append(ev)
        self._hash.update(ev.line().encode())
        self._hash.update(repr(msg.payload).encode())

    def __len__(self) -> int:
        return len(self.events)

    def __iter__(self):
        return iter(self.events)

    def digest(self) -> str:
        """Hash over every event including payload contents."""
        return self._hash.hexdigest()

    def dump(self) -> str:
        return "".join(ev.line() + "\n" for ev in self.events)

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dump(), encoding="utf-8")

    def total_bytes(self) -> int:
        return sum(ev.nbytes for ev in self.events)

    def count(self, tag: str | None = None) -> int:
        if tag is None:
            return len(self.events)
        return sum(ev.tag == str(tag) for ev in self.events)


def parse_trace(text: str) -> list[TraceEvent]:
    events = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        parts = [p.strip() for p in line.split("|")]
        try:
            step, route, tag, kind, nbytes = parts
            sender, receiver = (int(x) for x in route.split("->"))
            events.append(TraceEvent(int(step), sender, receiver, tag, kind, int(nbytes)))
        except ValueError:
            raise TraceFormatError(f"line {lineno}: malformed trace event {line!r}") from None
    return events


class NetworkError(RuntimeError):
    pass


class Network:
    """FIFO mailbox shared by ``n`` registered endpoints."""

    def __init__(self, n: int, trace: Trace | None = None):
        self.n = n
        self.queue: deque[Message] = deque()
        self.handlers: dict[int, Callable[[Message], None]] = {}
        self.trace = trace if trace is not None else Trace()
        self.step = 0
        self.sent = 0
        self.depth = 0  # > 0 while a handler is running

    def register(self, endpoint: int, handler: Callable[[Message], None]) -> None:
        self.handlers[endpoint] = handler

    def _check(self, endpoint: int) -> None:
        if endpoint not in self.handlers:
            raise NetworkError(f"endpoint {endpoint} is not registered")

    def send(self, tag: Tag, sender: int, receiver: int, payload=None) -> None:
        self._check(sender)
        self._check(receiver)
        if sender == receiver:
            raise NetworkError("agents do not message themselves")
        self.queue.append(Message(tag, sender, receiver, payload))
        self.sent += 1

    def broadcast(self, tag: Tag, sender: int, payload=None) -> None:
        self._check(sender)
        for r in sorted(self.handlers):
            if r != sender:
                self.queue.append(Message(tag, sender, r, payload, broadcast=True))
                self.sent += 1

    def pending(self) -> int:
        return len(self.queue)

    def deliver_next(self) -> bool:
        """Deliver the oldest message; ``False`` when nothing is queued."""
        if not self.queue:
            return False
        msg = self.queue.popleft()
        self.step += 1
        self.trace.record(self.step, msg)
        self.depth += 1
        try:
            self.handlers[msg.receiver](msg)
        finally:
            self.depth -= 1
        return True

    def flush(self) -> None:
        while self.deliver_next():
            pass

    run = flush


@dataclass
class CostModel:
    """Linear simulated-time model; every field is in milliseconds."""

    message_latency_ms: float = 0.0
    byte_latency_ms: float = 0.0
    paillier_op_ms: float = 0.0
    compare_offline_ms: float = 0.0
    compare_online_ms: float = 0.0

    def __post_init__(self):
        for f in fields(self):
            if getattr(self, f.name) < 0:
                raise ValueError(f"{f.name} must be non-negative")

    @classmethod
    def parse(cls, text: str) -> "CostModel":
        known = {f.name for f in fields(cls)}
        values = {}
        for lineno, line in enumerate(text.splitlines(), start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in known:
                raise ValueError(f"line {lineno}: expected one of {sorted(known)} = value")
            values[key] = float(value)
        return cls(**values)

    @classmethod
    def load(cls, path: str | Path) -> "CostModel":
        return cls.parse(Path(path).read_text(encoding="utf-8"))

    def dumps(self) -> str:
        return "".join(f"{f.name} = {getattr(self, f.name)}\n" for f in fields(self))

    @classmethod
    def reference_costs(cls, n: int, **overrides) -> "CostModel":
        """Per-comparison costs measured for the honest-majority garbling protocol
        on a LAN (offline, online; ms), indexed by the number of agents."""
        if n not in REFERENCE_COMPARE_MS:
            raise ValueError(f"no published comparison timing for n={n}")
        offline, online = REFERENCE_COMPARE_MS[n]
        return cls(compare_offline_ms=offline, compare_online_ms=online, **overrides)


REFERENCE_COMPARE_MS = {
    5: (6.7, 0.51),
    7: (12.4, 0.85),
    9: (20.2, 1.3),
    11: (32.3, 1.6),
    13: (47.2, 2.4),
    15: (72.0, 2.5),
    17: (94.3, 2.7),
    19: (135.3, 3.6),
}


def simulated_time(events: Iterable[TraceEvent], metrics, model: CostModel) -> float:
    """Modelled run time in ms.

    Sums per-message and per-byte latency over the trace, Paillier operations
    and comparisons from ``metrics``.  MPC sub-protocol messages are skipped:
    their cost is already inside the per-comparison figures.
    """
    total = 0.0
    for ev in events:
        if ev.tag in MPC_TAGS:
            continue
        total += model.message_latency_ms + ev.nbytes * model.byte_latency_ms
    total += metrics.paillier_ops * model.paillier_op_ms
    total += metrics.comparisons * (model.compare_offline_ms + model.compare_online_ms)
    return total
