import itertools

import pytest

from utils.bdd import FALSE, TRUE, NodeStore
from utils.errors import ResourceError, UnsupportedOperationError, UsageError


def make_store(n, **kwargs):
    store = NodeStore(unique_table_bits=10, **kwargs)
    names = [f"v{k}" for k in range(n)]
    variables = [store.add_var(name) for name in names]
    return store, variables


def random_function(store, variables, rng, depth=4):
    """A random formula as (decision diagram, python predicate over a value tuple)"""
    if depth == 0 or rng.random() < 0.2:
        if rng.random() < 0.1:
            value = rng.random() < 0.5
            return store.constant(value), lambda a: value
        k = rng.randrange(len(variables))
        return store.mk_var(variables[k]), lambda a: a[k]
    op = rng.choice(["and", "or", "xor", "implies", "iff", "not"])
    f, pf = random_function(store, variables, rng, depth - 1)
    if op == "not":
        return ~f, lambda a: not pf(a)
    g, pg = random_function(store, variables, rng, depth - 1)
    python = {
        "and": lambda a: pf(a) and pg(a),
        "or": lambda a: pf(a) or pg(a),
        "xor": lambda a: pf(a) != pg(a),
        "implies": lambda a: (not pf(a)) or pg(a),
        "iff": lambda a: pf(a) == pg(a),
    }[op]
    return store.apply(op, f, g), python


def from_truth_table(store, variables, predicate):
    """Disjunction of the minterms where predicate holds"""
    result = store.false
    for values in itertools.product((False, True), repeat=len(variables)):
        if predicate(values):
            result = result | store.cube(dict(zip(variables, values)))
    return result


def truth_table(store, f, variables):
    return [
        store.eval(f, dict(zip(variables, values)))
        for values in itertools.product((False, True), repeat=len(variables))
    ]


def test_canonical_against_truth_table(rng):
    for _ in range(2000):
        store, variables = make_store(rng.randint(1, 7))
        f, predicate = random_function(store, variables, rng)
        assert f == from_truth_table(store, variables, predicate)
        for values in itertools.product((False, True), repeat=len(variables)):
            assert store.eval(f, dict(zip(variables, values))) == bool(predicate(values))


def test_quantifier_expansion(rng):
    for _ in range(2000):
        store, variables = make_store(rng.randint(1, 10))
        f, _ = random_function(store, variables, rng)
        v = rng.choice(variables)
        low = store.restrict(f, {v: False})
        high = store.restrict(f, {v: True})
        assert store.exists([v], f) == low | high
        assert store.forall([v], f) == low & high
        assert v not in store.support(store.exists([v], f))


def test_forall_exists_duality(rng):
    for _ in range(2000):
        store, variables = make_store(rng.randint(1, 10))
        f, _ = random_function(store, variables, rng)
        chosen = [v for v in variables if rng.random() < 0.5]
        assert store.forall(chosen, f) == ~store.exists(chosen, ~f)
        g, _ = random_function(store, variables, rng)
        assert store.and_exists(f, g, chosen) == store.exists(chosen, f & g)


def test_de_morgan(rng):
    for _ in range(2000):
        store, variables = make_store(rng.randint(1, 10))
        f, _ = random_function(store, variables, rng)
        g, _ = random_function(store, variables, rng)
        assert ~(f & g) == ~f | ~g
        assert ~(f | g) == ~f & ~g
        assert ~~f == f
        assert f.implies(g) == ~f | g
        assert f.iff(g) == ~(f ^ g)


def test_shift_is_inverse(rng):
    for _ in range(2000):
        n = rng.randint(1, 5)
        store = NodeStore(unique_table_bits=10)
        x, x_next = [], []
        for k in range(n):
            x.append(store.add_var(f"x{k}"))
            x_next.append(store.add_var(f"x{k}'"))
        f, predicate = random_function(store, x, rng)
        shifted = store.rename(f, x, x_next)
        assert store.support(shifted) <= set(x_next)
        assert store.rename(shifted, x_next, x) == f
        assert shifted == from_truth_table(store, x_next, predicate)


def test_rename_not_monotone(rng):
    for _ in range(300):
        n = rng.randint(2, 4)
        store, variables = make_store(2 * n)
        src, dst = variables[:n], variables[n:]
        target = list(dst)
        rng.shuffle(target)
        f, predicate = random_function(store, src, rng)
        renamed = store.rename(f, src, target)

        # renamed(target = values) == f(src = values)
        def moved(values, target=target):
            by_var = dict(zip(variables, values))
            return predicate(tuple(by_var[t] for t in target))

        assert renamed == from_truth_table(store, variables, moved)


def test_compose(rng):
    for _ in range(300):
        store, variables = make_store(rng.randint(2, 6))
        f, pf = random_function(store, variables, rng)
        g, pg = random_function(store, variables, rng)
        k = rng.randrange(len(variables))
        composed = store.compose(f, variables[k], g)

        def expected(values):
            replaced = list(values)
            replaced[k] = pg(values)
            return pf(tuple(replaced))

        assert composed == from_truth_table(store, variables, expected)


def test_sat_count_and_enumeration(rng):
    for _ in range(300):
        store, variables = make_store(rng.randint(1, 7))
        f, predicate = random_function(store, variables, rng)
        rows = [
            values
            for values in itertools.product((False, True), repeat=len(variables))
            if predicate(values)
        ]
        assert store.sat_count(f, variables) == len(rows)
        sats = store.enumerate_sats(f, variables)
        assert [tuple(s[v] for v in variables) for s in sats] == rows
        assert store.enumerate_sats(f, variables, limit=1) == sats[:1]


def test_sat_count_over_superset():
    store, (a, b, c) = make_store(3)
    assert store.sat_count(store.mk_var(b), [a, b, c]) == 4
    assert store.sat_count(store.true, [a, b, c]) == 8
    assert store.sat_count(store.false, [a, b, c]) == 0


def test_memo_does_not_change_results(rng):
    for _ in range(200):
        n = rng.randint(1, 6)
        seed = rng.random()
        results = []
        for kwargs in ({}, {"memo": False}, {"computed_table_bits": 1}):
            store, variables = make_store(n, **kwargs)
            local = type(rng)(seed)
            f, _ = random_function(store, variables, local, depth=5)
            results.append(truth_table(store, f, variables))
        assert results[0] == results[1] == results[2]


def test_memo_counts_hits():
    store, (a, b) = make_store(2)
    f = store.mk_var(a) & store.mk_var(b)
    g = store.mk_var(a) | store.mk_var(b)
    store.apply("xor", f, g)
    store.apply("xor", f, g)
    assert store.stats()["computed_table_hits"] > 0

    store, (a, b) = make_store(2, memo=False)
    f = store.mk_var(a) & store.mk_var(b)
    store.apply("xor", f, store.mk_var(b))
    assert store.stats()["computed_table_hits"] == 0


def equality(store, xs, ys):
    return store.conjoin(store.mk_var(x).iff(store.mk_var(y)) for x, y in zip(xs, ys))


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_interleaved_order_is_linear(n):
    store = NodeStore(unique_table_bits=10)
    xs, ys = [], []
    for k in range(n):
        xs.append(store.add_var(f"x{k}"))
        ys.append(store.add_var(f"y{k}"))
    f = equality(store, xs, ys)

    def same(values):
        return all(values[2 * k] == values[2 * k + 1] for k in range(n))

    assert f == from_truth_table(store, store.ordering(), same)
    assert store.node_count(f) == 3 * n + 2


@pytest.mark.parametrize("n", [1, 2, 3, 4, 5])
def test_separated_order_is_exponential(n):
    store = NodeStore(unique_table_bits=10)
    xs = [store.add_var(f"x{k}") for k in range(n)]
    ys = [store.add_var(f"y{k}") for k in range(n)]
    f = equality(store, xs, ys)

    def same(values):
        return all(values[k] == values[n + k] for k in range(n))

    assert f == from_truth_table(store, store.ordering(), same)
    assert store.node_count(f) == 3 * 2**n - 1


def test_constants_and_leaves():
    store, (a,) = make_store(1)
    assert store.true.node == TRUE and store.false.node == FALSE
    assert (store.mk_var(a) & ~store.mk_var(a)).is_false
    assert (store.mk_var(a) | ~store.mk_var(a)).is_true
    assert store.node_count(store.true) == 1
    assert store.node_count(store.mk_var(a)) == 3


def test_group_order_keeps_late_variables_in_place():
    store = NodeStore(unique_table_bits=10)
    store.order_hint(["actions", "plans", "states"])
    act = store.add_var("a", "actions")
    s = store.add_var("s", "states")
    f = store.mk_var(s) & store.mk_var(act)
    late = store.add_var("pi1:a", "plans")
    assert act.index < late.index < s.index
    assert [v.name for v in store.ordering()] == ["a", "pi1:a", "s"]
    assert store.group_of("pi1:a") == "plans"
    # existing functions are untouched by the new variable
    assert store.support(f) == {act, s}


def test_order_hint_after_nodes_is_rejected():
    store, _ = make_store(1)
    with pytest.raises(UnsupportedOperationError):
        store.order_hint(["a", "b"])


def test_reorder_is_a_no_op():
    store, (a, b) = make_store(2)
    f = store.mk_var(a) & store.mk_var(b)
    store.reorder()
    assert store.mk_var(a) & store.mk_var(b) == f


def test_usage_errors():
    store, (a, b) = make_store(2)
    other, (c,) = make_store(1)
    with pytest.raises(UsageError):
        store.mk_var("missing")
    with pytest.raises(UsageError):
        store.add_var("v0")
    with pytest.raises(UsageError):
        store.mk_var(a) & other.mk_var(c)
    with pytest.raises(UsageError):
        store.apply("nand", store.true, store.false)
    with pytest.raises(UsageError):
        store.eval(store.mk_var(a) & store.mk_var(b), {a: True})
    with pytest.raises(UsageError):
        store.rename(store.mk_var(a), [a], [a, b])
    with pytest.raises(UsageError):
        # b already occurs in the function
        store.rename(store.mk_var(a) & store.mk_var(b), [a], [b])
    with pytest.raises(UsageError):
        store.enumerate_sats(store.mk_var(a) & store.mk_var(b), [a])


def test_swap_rename_is_allowed():
    store, (a, b) = make_store(2)
    f = store.mk_var(a) & ~store.mk_var(b)
    assert store.rename(f, [a, b], [b, a]) == store.mk_var(b) & ~store.mk_var(a)


def test_node_limit_raises_resource_error():
    store = NodeStore(unique_table_bits=4, max_nodes=8)
    variables = [store.add_var(f"v{k}") for k in range(12)]
    with pytest.raises(ResourceError):
        store.conjoin(store.mk_var(v) for v in variables)


def test_table_grows_past_initial_capacity():
    store = NodeStore(unique_table_bits=2)
    variables = [store.add_var(f"v{k}") for k in range(10)]
    f = store.disjoin(store.mk_var(v) for v in variables)
    assert store.stats()["unique_table_capacity"] >= len(store)
    assert store.sat_count(f, variables) == 2**10 - 1


def test_env_override_of_table_size(monkeypatch):
    monkeypatch.setenv("CMBP_UNIQUE_TABLE_BITS", "5")
    assert NodeStore().capacity == 32


def test_pick_and_cube():
    store, (a, b, c) = make_store(3)
    f = store.mk_var(a) & ~store.mk_var(c)
    assert store.pick(f, [a, b, c]) == {a: True, b: False, c: False}
    assert store.pick(store.false, [a]) is None
    assert store.cube({a: True, c: False}) == f


def test_to_dot():
    store, (a, b) = make_store(2)
    dot = store.to_dot(store.mk_var(a) | store.mk_var(b))
    assert dot.startswith("digraph bdd {")
    assert '[label="v0"]' in dot
    assert "style=dashed" in dot
    assert 'label="TRUE"' in dot
