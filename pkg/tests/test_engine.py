import pytest

from invariants import ShareInvariantChecker
from pcsyncbb.baseline import brute_force, natural_order, plaintext_syncbb
from pcsyncbb.dcop import DcopInstance, cost_of
from pcsyncbb.engine import CutoffExceeded, PcSyncBB, ProtocolError, RunConfig, run
from pcsyncbb.generators import gen_graph_coloring, gen_random, generate
from pcsyncbb.simnet import AgentIndex, Message, Tag

KEY = 512


def _cfg(seed=0, **kw):
    return RunConfig(keybits=KEY, seed=seed, **kw)


def test_small_runs_match_brute_force():
    for seed in range(15):
        inst = gen_random(5, 3, 0.5, 30, seed=seed)
        out = run(inst, _cfg(seed))
        assert out.result.cost == brute_force(inst).cost
        assert cost_of(inst, out.result.assignment) == out.result.cost


def test_every_agent_holds_optimal_setting():
    inst = gen_random(5, 3, 0.6, 30, seed=3)
    eng = PcSyncBB(inst, _cfg(3))
    out = eng.run()
    assert all(a.terminated for a in eng.agents)
    assert {a.k: a.optimal_setting for a in eng.agents} == out.result.assignment


def test_mpc_backend_run():
    inst = gen_random(4, 3, 0.7, 20, seed=9)
    out = run(inst, _cfg(9, backend="mpc"))
    assert out.result.cost == brute_force(inst).cost
    assert out.metrics.mpc_rounds > 0
    assert out.trace.count("MPC_OPEN") > 0


def test_proper_coloring_costs_zero():
    inst = gen_graph_coloring(6, 0.3, 10, colors=3, seed=1)
    assert brute_force(inst).cost == 0
    assert run(inst, _cfg(1)).result.cost == 0


def test_init_state():
    inst = gen_random(3, 2, 1.0, 5, seed=0)
    eng = PcSyncBB(inst, _cfg())
    eng.setup()
    eng.init()
    assert [a.s_ub for a in eng.agents] == [inst.params.q_inf, 0, 0]
    assert eng.reconstruct_bound() == inst.params.q_inf
    assert eng.reconstruct_cpa_cost() == 0
    assert all(a.p == 0 for a in eng.agents)


def test_share_invariants_hold():
    for seed in range(5):
        inst = generate("random", n=5, p1=0.6, domain=3, q=20, seed=seed)
        chk = ShareInvariantChecker(inst)
        run(inst, _cfg(seed, observer=chk))
        assert chk.violations == []
        assert chk.counts["pair"] > 0 and chk.counts["compare"] > 0
        assert all(x > y for x, y in zip(chk.bounds[1:], chk.bounds[2:]))


def test_natural_order_matches_plaintext_outcomes():
    for seed in range(5):
        inst = gen_random(5, 3, 0.5, 30, seed=seed)
        out = run(inst, _cfg(seed, orderings=natural_order(inst)))
        ref = plaintext_syncbb(inst)
        assert out.result.stats.outcomes == ref.stats.outcomes
        assert out.result.stats.bounds == ref.stats.bounds
        assert out.result.assignment == ref.assignment


def test_deterministic_replay():
    inst = gen_random(5, 3, 0.5, 30, seed=2)
    a = run(inst, _cfg(42))
    b = run(inst, _cfg(42))
    c = run(inst, _cfg(43))
    assert a.trace.dump() == b.trace.dump()
    assert a.trace.digest() == b.trace.digest()
    assert a.trace.digest() != c.trace.digest()


def test_message_routing():
    inst = gen_random(6, 3, 0.5, 30, seed=5)
    eng = PcSyncBB(inst, _cfg(5))
    out = eng.run()
    for ev in out.trace:
        if ev.tag == "Y_VALUE" or ev.tag == "ZERO_SHARE_MSG":
            assert ev.receiver in inst.predecessors(ev.sender)
        elif ev.tag in ("Z_VECTOR", "PUBKEY"):
            assert ev.receiver in inst.successors(ev.sender)
        elif ev.tag == "CPA_MSG":
            assert ev.receiver == ev.sender + 1
        elif ev.tag == "BACKTRACK_MSG":
            assert ev.receiver == ev.sender - 1
    assert out.trace.count("COMPLETE") == inst.n - 1
    assert out.metrics.messages == len(out.trace) == eng.network.sent
    # the last agent never publishes a key
    assert eng.agents[-1].paillier is None


def test_agents_only_hold_own_constraints():
    inst = gen_random(6, 3, 0.5, 30, seed=8)
    eng = PcSyncBB(inst, _cfg(8))
    for a in eng.agents:
        assert set(a.matrices) == set(inst.predecessors(a.k))
        for t in a.matrices:
            assert inst.constrained(t, a.k)


def test_torch_discipline_enforced():
    inst = gen_random(3, 2, 1.0, 5, seed=0)
    eng = PcSyncBB(inst, _cfg())
    eng.setup()
    eng.init()
    eng.torch = 0
    with pytest.raises(ProtocolError):
        eng.assign_cpa(eng.agents[1])


def test_missing_indicator_vector_is_an_error():
    inst = gen_random(3, 2, 1.0, 5, seed=0)
    eng = PcSyncBB(inst, _cfg())
    eng.setup()
    eng.init()
    eng.agents[1].received_z.clear()
    eng.torch = 1
    with pytest.raises(ProtocolError):
        eng.update_shares_in_cpa(eng.agents[1], inst.domains[1][0])


def test_torch_message_inside_subprotocol_rejected():
    inst = gen_random(3, 2, 1.0, 5, seed=0)
    eng = PcSyncBB(inst, _cfg())
    eng.setup()
    eng.network.send(Tag.CPA_MSG, 0, 1)
    with pytest.raises(ProtocolError):
        eng._drain()


def test_zero_share_idempotent():
    inst = gen_random(3, 2, 1.0, 5, seed=0)
    eng = PcSyncBB(inst, _cfg())
    eng.setup()
    eng.init()
    a0 = eng.agents[0]
    a0.s_cpa[1] = 17
    msg = Message(Tag.ZERO_SHARE_MSG, 1, 0, AgentIndex(1))
    eng._receive(a0, msg)
    before = list(a0.s_cpa)
    eng._receive(a0, msg)
    assert a0.s_cpa == before and a0.s_cpa[1] == 0


def test_cutoff():
    inst = gen_random(7, 4, 0.9, 100, seed=0)
    with pytest.raises(CutoffExceeded):
        run(inst, _cfg(0, cutoff_secs=0.0))


def test_bad_backend_and_ordering():
    inst = gen_random(3, 2, 1.0, 5, seed=0)
    with pytest.raises(ValueError):
        PcSyncBB(inst, _cfg(backend="garbled"))
    with pytest.raises(ProtocolError):
        run(inst, _cfg(orderings=lambda k, j: [0, 0]))


def test_non_integer_domains():
    inst = DcopInstance(domains=[(10, 20), (-1, 5, 7), (3,)], q=4,
                        constraints={(0, 1): [[1, 2, 3], [4, 0, 1]], (1, 2): [[2], [0], [4]],
                                     (0, 2): [[1], [0]]})
    out = run(inst, _cfg(1))
    assert out.result.cost == brute_force(inst).cost
    assert cost_of(inst, out.result.assignment) == out.result.cost
    assert all(out.result.assignment[k] in inst.domains[k] for k in range(3))
