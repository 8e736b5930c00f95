"""Structural leakage checks over a protocol transcript.

The audit never looks at agent state.  It inspects only what crosses the
wire, as seen by a coalition of agents, and checks that every payload has one
of the shapes the protocol is allowed to send: a bare command, an agent
index, Paillier ciphertexts (or a public key during setup), or XOR-masked
bits from the comparison sub-protocol.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

from pcsyncbb.compare.backends import MaskedBits
from pcsyncbb.crypto.paillier import PaillierPublicKey
from pcsyncbb.simnet import AgentIndex, CipherPayload, TraceEvent

# tag -> payload kind it must carry
ALLOWED_KINDS = {
    "CPA_MSG": "none",
    "BACKTRACK_MSG": "none",
    "COMPLETE": "none",
    "NEW_OPTIMUM_FOUND": "none",
    "ZERO_SHARE_MSG": "index",
    "Z_VECTOR": "ciphertext-vector",
    "Y_VALUE": "ciphertext",
    "PUBKEY": "public-key",
    "MPC_INPUT": "masked-bits",
    "MPC_OPEN": "masked-bits",
    "MPC_OUTPUT": "masked-bits",
}

# payload kind -> leakage class
LEAKAGE_CLASS = {
    "none": "command",
    "index": "index",
    "ciphertext": "ciphertext",
    "ciphertext-vector": "ciphertext",
    "masked-bits": "masked-bit",
    "public-key": "public-key",
}

SEARCH_CLASSES = frozenset({"command", "index", "ciphertext", "masked-bit"})


class AuditError(AssertionError):
    pass


@dataclass
class AuditReport:
    coalition: frozenset[int] | None
    events: int = 0
    classes: dict[str, int] = field(default_factory=dict)
    violations: list[str] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def summary(self) -> str:
        who = "all agents" if self.coalition is None else (
            "coalition " + ",".join(map(str, sorted(self.coalition)))
        )
        counts = ", ".join(f"{k}={v}" for k, v in sorted(self.classes.items()))
        verdict = "PASS" if self.ok else f"FAIL ({len(self.violations)} violations)"
        return f"{verdict}: {self.events} events visible to {who}; {counts}"

    def raise_on_failure(self) -> None:
        if self.violations:
            shown = "\n  ".join(self.violations[:20])
            raise AuditError(f"{self.summary()}\n  {shown}")


def coalition_view(events: Iterable[TraceEvent], coalition: Sequence[int] | None):
    """Events a coalition sends or receives.  ``None`` means the full transcript."""
    if coalition is None:
        return list(events)
    members = set(coalition)
    return [ev for ev in events if ev.sender in members or ev.receiver in members]


def _expected_bytes(ev: TraceEvent) -> int | None:
    if ev.kind == "none":
        return 0
    if ev.kind == "index":
        return 4
    return None


def audit_events(
    events: Iterable[TraceEvent],
    coalition: Sequence[int] | None = None,
    *,
    keys: dict[int, PaillierPublicKey] | None = None,
    S: int | None = None,
) -> AuditReport:
    """Check every visible event.

    With payloads kept in memory (``keep_payloads=True`` runs) the checks go
    deeper: ZERO_SHARE indices must name their sender, ciphertexts must be
    valid group elements under the right key and never small integers, and
    masked bits must be opaque bit words.  ``keys`` maps an agent to its
    public key, ``S`` is the share modulus.
    """
    report = AuditReport(None if coalition is None else frozenset(coalition))
    for ev in coalition_view(events, coalition):
        report.events += 1
        where = f"step {ev.step} ({ev.sender}->{ev.receiver} {ev.tag})"
        want = ALLOWED_KINDS.get(ev.tag)
        if want is None:
            report.violations.append(f"{where}: unknown tag")
            continue
        if ev.kind != want:
            report.violations.append(f"{where}: payload kind {ev.kind}, expected {want}")
            continue
        cls = LEAKAGE_CLASS[ev.kind]
        report.classes[cls] = report.classes.get(cls, 0) + 1
        nb = _expected_bytes(ev)
        if nb is not None and ev.nbytes != nb:
            report.violations.append(f"{where}: {ev.nbytes} bytes for a {ev.kind} payload")
        if ev.payload is not None:
            problem = _inspect_payload(ev, keys, S)
            if problem:
                report.violations.append(f"{where}: {problem}")
    return report


def _inspect_payload(ev: TraceEvent, keys, S) -> str | None:
    p = ev.payload
    if ev.kind == "index":
        if not isinstance(p, AgentIndex) or p.value != ev.sender:
            return f"index payload {p!r} does not name the sender"
    elif ev.kind in ("ciphertext", "ciphertext-vector"):
        if not isinstance(p, CipherPayload):
            return "ciphertext payload of the wrong type"
        if ev.kind == "ciphertext" and len(p.ciphertexts) != 1:
            return "Y_VALUE must carry exactly one ciphertext"
        # Y_VALUE is encrypted under the receiver's key, Z_VECTOR under the sender's
        owner = ev.receiver if ev.tag == "Y_VALUE" else ev.sender
        key = keys.get(owner) if keys else None
        for c in p.ciphertexts:
            if S is not None and c.value < S:
                return f"ciphertext value {c.value} lies inside the plaintext range"
            if key is not None:
                if c.key_id != key.key_id:
                    return f"ciphertext not under agent {owner}'s key"
                if not key.is_valid_ciphertext(c.value):
                    return "ciphertext is not a unit modulo n^2"
    elif ev.kind == "masked-bits":
        if not isinstance(p, MaskedBits):
            return "masked-bit payload of the wrong type"
        limit = 1 << p.width
        if any(not 0 <= w < limit for w in p.words):
            return "masked word wider than the batch"
    elif ev.kind == "public-key":
        if not isinstance(p, PaillierPublicKey):
            return "public-key payload of the wrong type"
        if keys and keys.get(ev.sender) is not None and keys[ev.sender].n != p.n:
            return "published key differs from the sender's key"
    return None


def audit_run(engine, coalition: Sequence[int] | None = None) -> AuditReport:
    """Deep audit of a finished :class:`~pcsyncbb.engine.PcSyncBB` run."""
    keys = {a.k: a.paillier.public for a in engine.agents if a.paillier is not None}
    return audit_events(engine.network.trace, coalition, keys=keys, S=engine.params.S)


def parse_coalition(text: str) -> list[int]:
    try:
        members = sorted({int(x) for x in text.split(",") if x.strip()})
    except ValueError:
        raise ValueError(f"coalition must be comma-separated agent indices, got {text!r}") from None
    if not members:
        raise ValueError("coalition is empty")
    return members
