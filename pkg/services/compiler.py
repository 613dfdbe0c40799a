"""From a parsed description to an automaton.

Transition semantics of action a from state s to state s':
  * s satisfies the precondition of a, and s, s' both satisfy every ALWAYS formula
  * a causal rule whose condition holds in s forces its literal in s'
  * a fluent no rule forces keeps its value when it is inertial and a does not
    possibly change it; otherwise it is free

`compile_domain` builds this relation symbolically, `ExplicitModel` computes it
state by state without decision diagrams.
"""
import itertools
import logging
from typing import AbstractSet, Dict, FrozenSet, List, Mapping, Optional, Set, Tuple

from services.lang import Const, DomainAst, Formula, Not, Var, bitmask_predicate
from services.symdomain import SymbolicDomain, VariableVectors, build_seq
from utils.bdd import Bdd, NodeStore, VarId
from utils.config import EngineSettings
from utils.errors import DomainValidationError, UsageError

logger = logging.getLogger(__name__)


def formula_to_bdd(store: NodeStore, formula: Formula, variables: Mapping[str, VarId]) -> Bdd:
    if isinstance(formula, Const):
        return store.constant(formula.value)
    if isinstance(formula, Var):
        return store.mk_var(variables[formula.name])
    if isinstance(formula, Not):
        return ~formula_to_bdd(store, formula.arg, variables)
    left = formula_to_bdd(store, formula.left, variables)
    right = formula_to_bdd(store, formula.right, variables)
    if formula.op == "&":
        return left & right
    if formula.op == "|":
        return left | right
    if formula.op == "->":
        return left.implies(right)
    return left.iff(right)


def validate(ast: DomainAst) -> DomainAst:
    """Static checks needing satisfiability: nonempty state space, initial and
    goal sets, and no action forcing a fluent both ways in a reachable situation.

    Raises:
        DomainValidationError: naming the offending clause
    """
    store = NodeStore(unique_table_bits=12, computed_table_bits=14)
    variables = {f: store.add_var(f) for f in ast.fluents}
    legal = formula_to_bdd(store, ast.state_constraint, variables)
    if legal.is_false:
        raise DomainValidationError("the ALWAYS constraints admit no state")
    if (formula_to_bdd(store, ast.initially, variables) & legal).is_false:
        raise DomainValidationError(
            "the initial set is empty (INITIALLY contradicts ALWAYS)", ast.spans.get("INITIALLY")
        )
    if (formula_to_bdd(store, ast.goal, variables) & legal).is_false:
        raise DomainValidationError(
            "the goal set is empty (CONFORMANT contradicts ALWAYS)", ast.spans.get("CONFORMANT")
        )

    for action in ast.actions:
        entry = ast.effects_of(action)
        fires = legal & formula_to_bdd(store, entry.precondition, variables)
        if fires.is_false:
            logger.warning("action %s is never applicable", action)
            continue
        for rule in entry.causes:
            if not rule.positive:
                continue
            when = formula_to_bdd(store, rule.condition, variables)
            for other in entry.causes:
                if other.positive or other.fluent != rule.fluent:
                    continue
                clash = fires & when & formula_to_bdd(store, other.condition, variables)
                if not clash.is_false:
                    raise DomainValidationError(
                        f"action '{action}' can cause both {rule.fluent} and !{rule.fluent}",
                        ast.spans.get(action),
                    )
    return ast


def compile_domain(
    ast: DomainAst,
    store: Optional[NodeStore] = None,
    settings: Optional[EngineSettings] = None,
) -> SymbolicDomain:
    if store is None:
        settings = settings or EngineSettings()
        store = NodeStore(
            unique_table_bits=settings.unique_table_bits,
            computed_table_bits=settings.computed_table_bits,
            max_nodes=settings.max_nodes,
        )
    vectors = VariableVectors.declare(store, ast.actions, ast.fluents)
    current = dict(zip(ast.fluents, vectors.x))
    following = dict(zip(ast.fluents, vectors.x_next))
    inertial = set(ast.inertial)

    legal = formula_to_bdd(store, ast.state_constraint, current)
    legal_next = formula_to_bdd(store, ast.state_constraint, following)
    seq = build_seq(store, vectors.alpha)

    steps = store.false
    for action, act_var in zip(ast.actions, vectors.alpha):
        entry = ast.effects_of(action)
        step = formula_to_bdd(store, entry.precondition, current)
        changing = set(entry.possibly_changes)
        # bottom-up over the state order keeps intermediate results small
        for fluent in reversed(ast.fluents):
            pos = store.disjoin(
                formula_to_bdd(store, r.condition, current)
                for r in entry.causes
                if r.fluent == fluent and r.positive
            )
            neg = store.disjoin(
                formula_to_bdd(store, r.condition, current)
                for r in entry.causes
                if r.fluent == fluent and not r.positive
            )
            now = store.mk_var(current[fluent])
            after = store.mk_var(following[fluent])
            if fluent in inertial and fluent not in changing:
                unforced = after.iff(now)
            else:
                unforced = store.true
            frame = pos.implies(after) & neg.implies(~after) & (pos | neg | unforced)
            step = step & frame
        steps = steps | (store.mk_var(act_var) & step)

    trans = seq & legal & legal_next & steps
    dom = SymbolicDomain(
        store,
        vectors,
        ast.actions,
        ast.fluents,
        states=legal,
        trans=trans,
        init=formula_to_bdd(store, ast.initially, current),
        goal=formula_to_bdd(store, ast.goal, current),
        seq=seq,
        name=ast.name,
    )
    dom.source = ast
    logger.info(
        "compiled %s: %d fluents, %d actions, transition relation %d nodes",
        ast.name,
        len(ast.fluents),
        len(ast.actions),
        store.node_count(trans),
    )
    return dom


class ExplicitModel:
    """Transition semantics over states packed as integers, bit k = fluent k"""

    def __init__(self, ast: DomainAst):
        self.ast = ast
        self.fluents = list(ast.fluents)
        self.positions = {f: k for k, f in enumerate(self.fluents)}
        self.legal = bitmask_predicate(ast.state_constraint, self.positions)
        self.initially = bitmask_predicate(ast.initially, self.positions)
        self.goal = bitmask_predicate(ast.goal, self.positions)
        inertial = set(ast.inertial)
        self._actions: Dict[str, tuple] = {}
        for action in ast.actions:
            entry = ast.effects_of(action)
            rules = [
                (self.positions[r.fluent], r.positive, bitmask_predicate(r.condition, self.positions))
                for r in entry.causes
            ]
            sticky = 0
            for f in inertial.difference(entry.possibly_changes):
                sticky |= 1 << self.positions[f]
            pre = bitmask_predicate(entry.precondition, self.positions)
            self._actions[action] = (pre, rules, sticky)
        self._cache: Dict[Tuple[int, str], Tuple[int, ...]] = {}

    def state_of(self, s: AbstractSet[str]) -> int:
        unknown = set(s).difference(self.positions)
        if unknown:
            raise UsageError(f"unknown fluents: {', '.join(sorted(unknown))}")
        return sum(1 << self.positions[f] for f in s)

    def names_of(self, s: int) -> FrozenSet[str]:
        return frozenset(f for k, f in enumerate(self.fluents) if s >> k & 1)

    def successors(self, s: int, action: str) -> Tuple[int, ...]:
        """Sorted successor states; empty when the action is not applicable"""
        key = (s, action)
        found = self._cache.get(key)
        if found is not None:
            return found
        try:
            pre, rules, sticky = self._actions[action]
        except KeyError:
            raise UsageError(f"unknown action '{action}'") from None
        if not self.legal(s):
            raise UsageError(f"state {sorted(self.names_of(s))} violates the ALWAYS constraints")
        if not pre(s):
            found = ()
        else:
            set_on, set_off = 0, 0
            for position, positive, condition in rules:
                if condition(s):
                    if positive:
                        set_on |= 1 << position
                    else:
                        set_off |= 1 << position
            if set_on & set_off:
                found = ()
            else:
                fixed = set_on | set_off | sticky
                base = (s & sticky & ~(set_on | set_off)) | set_on
                free = [1 << k for k in range(len(self.fluents)) if not fixed >> k & 1]
                candidates = []
                for bits in itertools.product((0, 1), repeat=len(free)):
                    t = base
                    for bit, on in zip(free, bits):
                        if on:
                            t |= bit
                    if self.legal(t):
                        candidates.append(t)
                found = tuple(sorted(candidates))
        self._cache[key] = found
        return found

    def legal_states(self) -> List[int]:
        return [s for s in range(1 << len(self.fluents)) if self.legal(s)]


def explicit_step(ast: DomainAst, s: AbstractSet[str], action: str) -> Set[FrozenSet[str]]:
    model = ExplicitModel(ast)
    return {model.names_of(t) for t in model.successors(model.state_of(s), action)}
