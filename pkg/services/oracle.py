"""Explicit-state reference search.

Breadth-first search forward from the initial belief state over explicitly
enumerated belief states. It shares nothing with the symbolic planner but the
parsed description, and is used to certify plan lengths, plans and failures
on small instances.
"""
import itertools
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

from services.compiler import ExplicitModel
from services.lang import DomainAst
from services.reports import OracleResult, Outcome
from utils.errors import OracleBoundExceeded, ResourceError, UsageError

logger = logging.getLogger(__name__)

DEFAULT_BOUND = 1 << 14
DEFAULT_MAX_FLUENTS = 16

Belief = Tuple[int, ...]


@dataclass
class PlanCheck:
    conformant: bool
    # belief states from the initial one, one per executed action
    trace: List[Set[FrozenSet[str]]]


def _model(ast: DomainAst, max_fluents: int) -> ExplicitModel:
    if len(ast.fluents) > max_fluents:
        raise ResourceError(
            f"{ast.name} has {len(ast.fluents)} fluents, explicit enumeration is limited to {max_fluents}"
        )
    return ExplicitModel(ast)


def _initial_belief(model: ExplicitModel) -> Belief:
    return tuple(s for s in model.legal_states() if model.initially(s))


def _apply(model: ExplicitModel, belief: Belief, action: str) -> Optional[Belief]:
    """Successor belief, or None when the action is inapplicable in some member"""
    found: Set[int] = set()
    for s in belief:
        successors = model.successors(s, action)
        if not successors:
            return None
        found.update(successors)
    return tuple(sorted(found))


def legal_states(ast: DomainAst, max_fluents: int = DEFAULT_MAX_FLUENTS) -> List[FrozenSet[str]]:
    model = _model(ast, max_fluents)
    return [model.names_of(s) for s in model.legal_states()]


def enumerate_automaton(
    ast: DomainAst, max_fluents: int = DEFAULT_MAX_FLUENTS
) -> Set[Tuple[FrozenSet[str], str, FrozenSet[str]]]:
    """Every transition (s, a, s') of the domain"""
    model = _model(ast, max_fluents)
    triples = set()
    for s in model.legal_states():
        source = model.names_of(s)
        for action in ast.actions:
            for t in model.successors(s, action):
                triples.add((source, action, model.names_of(t)))
    return triples


def oracle_search(
    ast: DomainAst, bound: int = DEFAULT_BOUND, max_fluents: int = DEFAULT_MAX_FLUENTS
) -> OracleResult:
    """Shortest conformant plan by forward breadth-first search over belief states

    Raises:
        OracleBoundExceeded: more than `bound` belief states would be expanded
    """
    model = _model(ast, max_fluents)
    initial = _initial_belief(model)
    if not initial:
        raise UsageError(f"{ast.name} has no initial state")

    def is_goal(belief: Belief) -> bool:
        return all(model.goal(s) for s in belief)

    if is_goal(initial):
        return OracleResult(instance=ast.name, outcome=Outcome.PLAN, length=0, plan=[], expanded=0)

    parent: Dict[Belief, Tuple[Belief, str]] = {}
    visited = {initial}
    queue = deque([initial])
    expanded = 0
    while queue:
        belief = queue.popleft()
        expanded += 1
        if expanded > bound:
            raise OracleBoundExceeded(f"explicit search of {ast.name} exceeded {bound} belief states")
        if expanded % 1000 == 0:
            logger.debug("%s: %d belief states expanded, %d queued", ast.name, expanded, len(queue))
        for action in ast.actions:
            successor = _apply(model, belief, action)
            if successor is None or successor in visited:
                continue
            visited.add(successor)
            parent[successor] = (belief, action)
            if is_goal(successor):
                plan = []
                node = successor
                while node != initial:
                    node, step = parent[node]
                    plan.append(step)
                plan.reverse()
                return OracleResult(
                    instance=ast.name,
                    outcome=Outcome.PLAN,
                    length=len(plan),
                    plan=plan,
                    expanded=expanded,
                )
            queue.append(successor)

    logger.debug("%s: belief space closed after %d expansions", ast.name, expanded)
    return OracleResult(instance=ast.name, outcome=Outcome.FAIL, expanded=expanded)


def oracle_simulate(
    ast: DomainAst, plan: Sequence[str], max_fluents: int = DEFAULT_MAX_FLUENTS
) -> PlanCheck:
    unknown = [a for a in plan if a not in ast.actions]
    if unknown:
        raise UsageError(f"unknown actions in plan: {', '.join(unknown)}")
    return _simulate(_model(ast, max_fluents), plan)


def _simulate(model: ExplicitModel, plan: Sequence[str]) -> PlanCheck:
    belief = _initial_belief(model)
    trace = [{model.names_of(s) for s in belief}]
    for action in plan:
        successor = _apply(model, belief, action)
        if successor is None:
            return PlanCheck(False, trace)
        belief = successor
        trace.append({model.names_of(s) for s in belief})
    return PlanCheck(all(model.goal(s) for s in belief), trace)


def oracle_verify(ast: DomainAst, plan: Sequence[str]) -> bool:
    return oracle_simulate(ast, plan).conformant


def shortest_plans_exhaustive(ast: DomainAst, max_len: int) -> Optional[List[str]]:
    """First conformant plan of minimal length up to max_len, trying every
    action sequence in order. Only usable on tiny domains."""
    model = _model(ast, DEFAULT_MAX_FLUENTS)
    for length in range(max_len + 1):
        for plan in itertools.product(ast.actions, repeat=length):
            if _simulate(model, plan).conformant:
                return list(plan)
    return None
