import dataclasses

import pytest

from pcsyncbb.audit import AuditError, audit_events, audit_run, coalition_view, parse_coalition
from pcsyncbb.compare.backends import MaskedBits
from pcsyncbb.crypto.paillier import Ciphertext
from pcsyncbb.engine import PcSyncBB, RunConfig
from pcsyncbb.generators import gen_random
from pcsyncbb.simnet import AgentIndex, CipherPayload, parse_trace


@pytest.fixture(scope="module")
def finished():
    inst = gen_random(5, 3, 0.6, 30, seed=4)
    eng = PcSyncBB(inst, RunConfig(keybits=512, seed=4, backend="mpc"))
    eng.run()
    return eng


def test_clean_run_passes(finished):
    report = audit_run(finished)
    assert report.ok, report.violations
    assert set(report.classes) == {"command", "index", "ciphertext", "masked-bit", "public-key"}
    report.raise_on_failure()
    assert report.summary().startswith("PASS")


def test_text_trace_passes(finished):
    events = parse_trace(finished.network.trace.dump())
    assert audit_events(events, [2, 3]).ok


def test_coalition_view(finished):
    view = coalition_view(finished.network.trace, [1])
    assert view and all(1 in (ev.sender, ev.receiver) for ev in view)
    assert len(coalition_view(finished.network.trace, None)) == len(finished.network.trace)
    assert parse_coalition("3, 1,3") == [1, 3]
    with pytest.raises(ValueError):
        parse_coalition("a,b")
    with pytest.raises(ValueError):
        parse_coalition(",")


def _tamper(finished, tag, payload, kind=None):
    events = list(finished.network.trace)
    i = next(i for i, ev in enumerate(events) if ev.tag == tag)
    changes = {"payload": payload}
    if kind is not None:
        changes["kind"] = kind
    events[i] = dataclasses.replace(events[i], **changes)
    keys = {a.k: a.paillier.public for a in finished.agents if a.paillier is not None}
    return audit_events(events, keys=keys, S=finished.params.S)


def test_plaintext_cost_in_y_value_is_caught(finished):
    ev = next(ev for ev in finished.network.trace if ev.tag == "Y_VALUE")
    key_id = ev.payload.ciphertexts[0].key_id
    leaked = CipherPayload((Ciphertext(42, key_id),), ev.payload.width)
    report = _tamper(finished, "Y_VALUE", leaked)
    assert not report.ok
    with pytest.raises(AuditError):
        report.raise_on_failure()


def test_wrong_key_and_bad_index_caught(finished):
    z = next(ev for ev in finished.network.trace if ev.tag == "Z_VECTOR")
    foreign = CipherPayload(tuple(Ciphertext(c.value, "deadbeef") for c in z.payload.ciphertexts),
                            z.payload.width, vector=True)
    assert not _tamper(finished, "Z_VECTOR", foreign).ok
    zs = next(ev for ev in finished.network.trace if ev.tag == "ZERO_SHARE_MSG")
    assert not _tamper(finished, "ZERO_SHARE_MSG", AgentIndex(zs.sender + 1)).ok


def test_wrong_kind_caught(finished):
    # a CPA_MSG carrying a value instead of nothing
    report = _tamper(finished, "CPA_MSG", AgentIndex(3), kind="index")
    assert not report.ok
    assert not _tamper(finished, "MPC_OPEN", MaskedBits((5,), 1)).ok
