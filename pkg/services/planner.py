"""Backward breadth-first conformant planning.

Level i of the search is one boolean function over the state vector x and the
plan blocks pi[i..1]. An assignment p to the plan blocks encodes a plan of
length i (pi[i] is executed first) and the states s with relation(s, p) form
the largest belief state from which p is conformant. Level i+1 is the strong
pre-image of level i, the action variables renamed to the fresh block pi[i+1].
A plan solves the problem as soon as its belief state contains every initial
state.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Mapping, Optional, Sequence, Set, Tuple

from services.oracle import PlanCheck, oracle_simulate
from services.reports import LevelStats, Outcome, SearchReport
from services.symdomain import SymbolicDomain
from utils.bdd import FALSE, Bdd, VarId
from utils.errors import ContractError, InternalInvariantError, ResourceError, UsageError

logger = logging.getLogger(__name__)


@dataclass
class PlannerOptions:
    max_depth: int = 0  # 0 = until fixpoint
    prune: bool = True
    all_plans: int = 1


@dataclass(frozen=True)
class BsPTable:
    level: int
    relation: Bdd

    @property
    def is_empty(self) -> bool:
        return self.relation.is_false


@dataclass
class BeliefCache:
    """Canonical belief-state nodes kept at any level so far"""

    seen: Set[int] = field(default_factory=set)
    inserted: int = 0
    hits: int = 0

    def add(self, node: int):
        self.seen.add(node)
        self.inserted += 1


def expand(dom: SymbolicDomain, table: BsPTable) -> BsPTable:
    level = table.level + 1
    block = dom.new_plan_block(level)
    try:
        pairs = dom.strong_preimage_all(table.relation)
        relation = dom.store.rename(pairs, dom.vectors.alpha, block)
    except ResourceError as e:
        raise ResourceError(str(e), level=level) from e
    return BsPTable(level, relation)


def prune(dom: SymbolicDomain, table: BsPTable, cache: BeliefCache) -> BsPTable:
    """Drop every plan whose belief state was kept before.

    Walks the plan-variable part of the relation once, low branch first. The
    first edge into an unseen belief-state node keeps it; every later edge into
    a kept node is cut.
    """
    store = dom.store
    plans = store.group_range("plans")
    rebuilt: Dict[int, int] = {}

    def visit(u: int) -> int:
        var, low, high = store.succ(u)
        if var in plans:
            r = rebuilt.get(u)
            if r is None:
                r = store.find_or_add(var, visit(low), visit(high))
                rebuilt[u] = r
            return r
        if u == FALSE:
            return FALSE
        if u in cache.seen:
            cache.hits += 1
            return FALSE
        cache.add(u)
        return u

    return BsPTable(table.level, store.wrap(visit(table.relation.node)))


def extract(dom: SymbolicDomain, table: BsPTable) -> Bdd:
    """Plans of the table whose belief state contains every initial state"""
    store = dom.store
    return ~store.and_exists(dom.init, ~table.relation, dom.vectors.x)


def decode_plan(dom: SymbolicDomain, assignment: Mapping[VarId, bool], level: int) -> List[str]:
    plan = []
    for i in range(level, 0, -1):
        block = dom.vectors.plan_blocks[i - 1]
        chosen = [a for a, var in zip(dom.action_names, block) if assignment.get(var)]
        if len(chosen) != 1:
            raise InternalInvariantError(
                f"plan block {i} selects {len(chosen)} actions instead of one: {chosen}"
            )
        plan.append(chosen[0])
    return plan


def plan_variables(dom: SymbolicDomain, level: int) -> List[VarId]:
    return [var for block in dom.vectors.plan_blocks[:level] for var in block]


def count_plans(dom: SymbolicDomain, table: BsPTable) -> int:
    store = dom.store
    plans = store.exists(dom.vectors.x, table.relation)
    return store.sat_count(plans, plan_variables(dom, table.level))


def conformant_plan(dom: SymbolicDomain, opts: Optional[PlannerOptions] = None) -> SearchReport:
    return run_search(dom, opts)[0]


def run_search(
    dom: SymbolicDomain, opts: Optional[PlannerOptions] = None
) -> Tuple[SearchReport, BsPTable]:
    """The search loop. Also returns the last table built"""
    opts = opts or PlannerOptions()
    if dom.init.is_false or dom.goal.is_false:
        raise ContractError("initial and goal belief states must be nonempty")
    if not opts.prune and not opts.max_depth:
        logger.warning("pruning is off and no depth limit is set; an unsolvable problem never stops")

    store = dom.store
    start = time.perf_counter()
    table = BsPTable(0, dom.goal)
    cache = BeliefCache()
    cache.add(dom.goal.node)
    levels = [LevelStats(level=0, relation_nodes=store.node_count(dom.goal), plans_kept=1)]
    plans: List[List[str]] = []

    while True:
        solutions = extract(dom, table)
        if not solutions.is_false:
            over = plan_variables(dom, table.level)
            for sat in store.enumerate_sats(solutions, over, limit=max(1, opts.all_plans)):
                plans.append(decode_plan(dom, sat, table.level))
            outcome = Outcome.PLAN
            break
        if opts.max_depth and table.level >= opts.max_depth:
            outcome = Outcome.UNKNOWN
            break

        table = expand(dom, table)
        hits_before = cache.hits
        inserted_before = cache.inserted
        if opts.prune:
            table = prune(dom, table, cache)
        kept = count_plans(dom, table)
        levels.append(
            LevelStats(
                level=table.level,
                relation_nodes=store.node_count(table.relation),
                plans_kept=kept,
            )
        )
        logger.info(
            "level %d: relation %d nodes, %d plans, %d new belief states, %d cache hits",
            table.level,
            levels[-1].relation_nodes,
            kept,
            cache.inserted - inserted_before,
            cache.hits - hits_before,
        )
        if table.is_empty:
            outcome = Outcome.FAIL
            break

    elapsed_ms = (time.perf_counter() - start) * 1000.0
    logger.info("search for %s ended with %s at level %d", dom.name, outcome.value, table.level)
    report = SearchReport(
        instance=dom.name,
        outcome=outcome,
        plans=plans,
        level=table.level,
        bs_inserted=cache.inserted,
        bs_hits=cache.hits,
        levels=levels,
        elapsed_ms=elapsed_ms,
        store_stats=store.stats(),
    )
    return report, table


def verify_plan(dom: SymbolicDomain, plan: Sequence[str], mode: str = "symbolic") -> PlanCheck:
    """Execute plan on the initial belief state.

    Args:
        mode (str): "symbolic" runs the decision-diagram images, "explicit"
            simulates the parsed description state by state

    Returns:
        PlanCheck: conformant iff every action is applicable where it is
            executed and the final belief state lies in the goal
    """
    if mode == "explicit":
        if dom.source is None:
            raise UsageError("explicit verification needs the parsed domain description")
        return oracle_simulate(dom.source, plan)
    if mode != "symbolic":
        raise ValueError(f"unknown verification mode '{mode}'")

    for action in plan:
        dom.action_var(action)
    belief = dom.init
    trace = [dom.decode_belief(belief)]
    for action in plan:
        if not dom.is_applicable(action, belief):
            logger.debug("%s is not applicable after %d steps", action, len(trace) - 1)
            return PlanCheck(False, trace)
        belief = dom.action_image(action, belief)
        trace.append(dom.decode_belief(belief))
    return PlanCheck((belief & ~dom.goal).is_false, trace)
