import pytest

from services.compiler import ExplicitModel, compile_domain, explicit_step, formula_to_bdd, validate
from services.generators import FamilySpec, build
from services.lang import parse
from services.oracle import enumerate_automaton, legal_states
from utils.bdd import NodeStore
from utils.config import EngineSettings
from utils.errors import DomainValidationError, UsageError

S1 = frozenset({"In_1"})
S2 = frozenset({"In_1", "Clogged"})
S5 = frozenset({"In_1", "Defused"})
S6 = frozenset({"In_1", "Defused", "Clogged"})


def transitions(dom):
    """Every (s, a, s') of a compiled domain, decoded"""
    found = set()
    for s in dom.decode_belief(dom.states):
        for action in dom.action_names:
            for t in dom.decode_belief(dom.action_image(action, dom.encode_state(s))):
                found.add((s, action, t))
    return found


def test_fixture_automaton(btuc_domain):
    dom = btuc_domain
    assert dom.belief_size(dom.states) == 8
    triples = transitions(dom)
    assert (S2, "Flush", S1) in triples
    assert {t for s, a, t in triples if s == S1 and a == "Dunk_1"} == {S5, S6}
    assert not [t for s, a, t in triples if "Clogged" in s and a.startswith("Dunk")]
    assert len({(s, a) for s, a, _ in triples}) == 16


def test_applicable_pairs(btuc_domain):
    dom = btuc_domain
    store = dom.store
    pairs = store.sat_count(dom.applicable & dom.seq & dom.states, dom.vectors.x + dom.vectors.alpha)
    assert pairs == 16


def test_symbolic_and_explicit_agree(btuc_ast, btuc_domain):
    assert transitions(btuc_domain) == enumerate_automaton(btuc_ast)


@pytest.mark.parametrize(
    "spec",
    [
        FamilySpec("BTC", (3,)),
        FamilySpec("BMTC", (2, 2), "mid"),
        FamilySpec("URING", (2,)),
        FamilySpec("NDRING", (2, 1)),
        FamilySpec("SQUARE", (3,), "corner"),
        FamilySpec("OMELETTE", (2,)),
    ],
)
def test_generated_domains_agree_with_explicit_semantics(spec):
    ast = validate(build(spec))
    assert transitions(compile_domain(ast)) == enumerate_automaton(ast)


def test_legal_states(btuc_ast, btuc_domain):
    assert set(legal_states(btuc_ast)) == btuc_domain.decode_belief(btuc_domain.states)


def test_explicit_step(btuc_ast):
    assert explicit_step(btuc_ast, S1, "Dunk_1") == {S5, S6}
    assert explicit_step(btuc_ast, S2, "Dunk_1") == set()
    assert explicit_step(btuc_ast, S2, "Flush") == {S1}
    with pytest.raises(UsageError):
        explicit_step(btuc_ast, S1, "Jump")
    with pytest.raises(UsageError):
        # violates In_1 <-> !In_2
        explicit_step(btuc_ast, frozenset({"In_1", "In_2"}), "Flush")


def test_non_inertial_fluent_is_free():
    ast = parse(
        """
        DOMAIN Noise
        ACTIONS Tick;
        FLUENTS Up, Static : boolean;
        INERTIAL Up;
        Tick CAUSES Up;
        INITIALLY !Up & !Static;
        CONFORMANT Up;
        """
    )
    start = frozenset()
    assert explicit_step(ast, start, "Tick") == {frozenset({"Up"}), frozenset({"Up", "Static"})}
    dom = compile_domain(ast)
    after = dom.action_image("Tick", dom.encode_state(start))
    assert dom.decode_belief(after) == {frozenset({"Up"}), frozenset({"Up", "Static"})}


def test_always_dominates_inertia():
    ast = parse(
        """
        DOMAIN Linked
        ACTIONS Push;
        FLUENTS A, B : boolean;
        INERTIAL A, B;
        ALWAYS A -> B;
        Push CAUSES A;
        INITIALLY !A & !B;
        CONFORMANT A;
        """
    )
    # inertia would keep B false, which ALWAYS forbids once A holds
    assert explicit_step(ast, frozenset(), "Push") == set()
    dom = compile_domain(ast)
    assert not dom.is_applicable("Push", dom.init)


def test_conflicting_effects_are_rejected():
    text = """
        DOMAIN Clash
        ACTIONS Toggle;
        FLUENTS On, Armed : boolean;
        INERTIAL On, Armed;
        Toggle CAUSES On IF Armed;
        Toggle CAUSES !On IF Armed;
        INITIALLY !On;
        CONFORMANT On;
        """
    with pytest.raises(DomainValidationError) as info:
        validate(parse(text))
    assert "Toggle" in str(info.value)


def test_unreachable_conflict_is_accepted():
    text = """
        DOMAIN Guarded
        ACTIONS Toggle;
        FLUENTS On, Armed : boolean;
        INERTIAL On, Armed;
        Toggle HAS PRECONDITIONS !Armed;
        Toggle CAUSES On IF Armed;
        Toggle CAUSES !On IF Armed;
        Toggle CAUSES On;
        INITIALLY !On;
        CONFORMANT On;
        """
    ast = validate(parse(text))
    assert ast.name == "Guarded"


@pytest.mark.parametrize(
    "clause, fragment",
    [
        ("INITIALLY On & !On;", "initial set is empty"),
        ("CONFORMANT FALSE;", "goal set is empty"),
    ],
)
def test_empty_initial_or_goal(clause, fragment):
    base = {
        "INITIALLY": "INITIALLY !On;",
        "CONFORMANT": "CONFORMANT On;",
    }
    base[clause.split()[0]] = clause
    text = f"""DOMAIN Empty
ACTIONS Press;
FLUENTS On : boolean;
INERTIAL On;
Press CAUSES On;
{base["INITIALLY"]}
{base["CONFORMANT"]}
"""
    with pytest.raises(DomainValidationError) as info:
        validate(parse(text))
    assert fragment in str(info.value)
    assert info.value.span is not None


def test_inconsistent_always():
    text = """DOMAIN Never
ACTIONS Press;
FLUENTS On : boolean;
ALWAYS On & !On;
INITIALLY TRUE;
CONFORMANT TRUE;
"""
    with pytest.raises(DomainValidationError):
        validate(parse(text))


def test_formula_to_bdd_matches_evaluate(btuc_ast):
    store = NodeStore(unique_table_bits=8)
    variables = {f: store.add_var(f) for f in btuc_ast.fluents}
    goal = formula_to_bdd(store, btuc_ast.goal, variables)
    model = ExplicitModel(btuc_ast)
    for s in range(1 << len(btuc_ast.fluents)):
        names = model.names_of(s)
        assignment = {variables[f]: f in names for f in btuc_ast.fluents}
        assert store.eval(goal, assignment) == model.goal(s)


def test_compile_uses_engine_settings(btuc_ast):
    dom = compile_domain(btuc_ast, settings=EngineSettings(unique_table_bits=6, computed_table_bits=4))
    assert dom.store.stats()["computed_table_size"] == 16
    assert dom.source is btuc_ast


def test_state_variables_are_interleaved(btuc_domain):
    names = [v.name for v in btuc_domain.store.ordering()]
    states = names[names.index("In_1") :]
    assert states == ["In_1", "In_1'", "In_2", "In_2'", "Defused", "Defused'", "Clogged", "Clogged'"]
    assert names[:3] == ["Dunk_1", "Dunk_2", "Flush"]
