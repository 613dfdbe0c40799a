import pytest

from services.compiler import compile_domain
from services.lang import FALSE
from services.symdomain import VariableVectors, build_seq
from utils.bdd import NodeStore
from utils.errors import ContractError, UsageError

S1 = frozenset({"In_1"})
S2 = frozenset({"In_1", "Clogged"})
S3 = frozenset({"In_2"})
S4 = frozenset({"In_2", "Clogged"})
S5 = frozenset({"In_1", "Defused"})
S6 = frozenset({"In_1", "Defused", "Clogged"})
S7 = frozenset({"In_2", "Defused"})
S8 = frozenset({"In_2", "Defused", "Clogged"})


def test_seq_is_one_hot():
    store = NodeStore(unique_table_bits=8)
    alpha = [store.add_var(name) for name in "abcd"]
    seq = build_seq(store, alpha)
    assert store.sat_count(seq, alpha) == 4
    for sat in store.enumerate_sats(seq, alpha):
        assert sum(sat.values()) == 1
    with pytest.raises(UsageError):
        build_seq(store, [])


def test_encode_decode(btuc_domain):
    dom = btuc_domain
    belief = dom.encode_belief([S1, S3, S6])
    assert dom.decode_belief(belief) == {S1, S3, S6}
    assert dom.belief_size(belief) == 3
    assert dom.decode_belief(dom.init) == {S1, S2, S3, S4}
    assert dom.decode_belief(dom.goal) == {S5, S7}
    with pytest.raises(UsageError):
        dom.encode_state({"Teleported"})
    with pytest.raises(UsageError):
        dom.decode_belief(dom.store.mk_var(dom.action_var("Flush")))


def test_shift_round_trip(btuc_domain):
    dom = btuc_domain
    shifted = dom.shift_forward(dom.init)
    assert dom.store.support(shifted) <= set(dom.vectors.x_next)
    assert dom.shift_backward(shifted) == dom.init


def test_action_image(btuc_domain):
    dom = btuc_domain
    after = dom.action_image("Flush", dom.init)
    assert dom.decode_belief(after) == {S1, S3}
    after = dom.action_image("Dunk_1", after)
    assert dom.decode_belief(after) == {S3, S4, S5, S6}


def test_forward_image(btuc_domain):
    dom = btuc_domain
    reached = dom.forward_image(dom.encode_state(S1))
    # Flush keeps S1, Dunk_1 defuses, Dunk_2 may clog
    assert dom.decode_belief(reached) == {S1, S2, S5, S6}


def test_is_applicable(btuc_domain):
    dom = btuc_domain
    assert dom.is_applicable("Flush", dom.init)
    assert not dom.is_applicable("Dunk_1", dom.init)
    assert dom.is_applicable("Dunk_1", dom.encode_belief([S1, S3]))
    with pytest.raises(ContractError):
        dom.is_applicable("Flush", dom.store.false)
    with pytest.raises(UsageError):
        dom.is_applicable("Jump", dom.init)


def test_strong_preimage(btuc_domain):
    dom = btuc_domain
    # states from which Flush surely reaches the goal
    assert dom.decode_belief(dom.strong_preimage("Flush", dom.goal)) == {S5, S6, S7, S8}
    # Dunk_1 from an unclogged In_1 state may clog the toilet
    assert dom.decode_belief(dom.strong_preimage("Dunk_1", dom.goal)) == set()
    target = dom.encode_belief([S5, S6, S3, S4])
    assert dom.decode_belief(dom.strong_preimage("Dunk_1", target)) == {S1, S3, S5}


def test_strong_preimage_all_carries_action(btuc_domain):
    dom = btuc_domain
    pairs = dom.strong_preimage_all(dom.goal)
    for action in dom.action_names:
        assert dom.project(pairs, action) == dom.strong_preimage(action, dom.goal)


def test_action_relation_is_memoized(btuc_domain):
    dom = btuc_domain
    assert dom.action_relation("Flush") is dom.action_relation("Flush")


def test_plan_blocks(btuc_domain):
    dom = btuc_domain
    first = dom.new_plan_block(1)
    second = dom.new_plan_block(2)
    assert dom.new_plan_block(1) is first
    assert [v.name for v in first] == ["pi1:Dunk_1", "pi1:Dunk_2", "pi1:Flush"]
    last_action = max(v.index for v in dom.vectors.alpha)
    first_state = min(v.index for v in dom.vectors.x)
    assert last_action < first[0].index < second[0].index < first_state
    with pytest.raises(UsageError):
        dom.new_plan_block(4)


def test_empty_initial_state_is_rejected(btuc_ast):
    btuc_ast.initially = FALSE
    with pytest.raises(ContractError):
        compile_domain(btuc_ast)


def test_vectors_declare_order():
    store = NodeStore(unique_table_bits=8)
    vectors = VariableVectors.declare(store, ["go"], ["p", "q"])
    assert [v.name for v in store.ordering()] == ["go", "p", "p'", "q", "q'"]
    assert vectors.plan_blocks == []
