"""Planning domains as boolean functions.

A domain is an automaton (S, R, I, G). States are assignments to the
current-state vector x, transitions are functions over (x, alpha, x') where
alpha holds one variable per action and exactly one of them is true in every
transition. Belief states are functions over x.
"""
import logging
from dataclasses import dataclass, field
from typing import AbstractSet, Dict, FrozenSet, Iterable, List, Sequence, Set

from utils.bdd import Bdd, NodeStore, VarId
from utils.errors import ContractError, UsageError

logger = logging.getLogger(__name__)

State = FrozenSet[str]

ORDER_GROUPS = ("actions", "plans", "states")


@dataclass
class VariableVectors:
    x: List[VarId]
    x_next: List[VarId]
    alpha: List[VarId]
    plan_blocks: List[List[VarId]] = field(default_factory=list)

    @classmethod
    def declare(
        cls, store: NodeStore, actions: Sequence[str], fluents: Sequence[str]
    ) -> "VariableVectors":
        """Declare action, then state variables: x_f directly followed by x'_f.
        Plan blocks are added later between the two groups."""
        store.order_hint(list(ORDER_GROUPS))
        alpha = [store.add_var(a, "actions") for a in actions]
        x, x_next = [], []
        for f in fluents:
            x.append(store.add_var(f, "states"))
            x_next.append(store.add_var(f"{f}'", "states"))
        return cls(x=x, x_next=x_next, alpha=alpha)


def build_seq(store: NodeStore, alpha: Sequence[VarId]) -> Bdd:
    """Exactly one of the action variables is true"""
    if not alpha:
        raise UsageError("a domain needs at least one action")
    # none_yet[k]: no variable among alpha[k:] is true
    one = store.false
    none_yet = store.true
    for var in reversed(alpha):
        v = store.mk_var(var)
        one = store.ite(v, none_yet, one)
        none_yet = ~v & none_yet
    return one


class SymbolicDomain:
    def __init__(
        self,
        store: NodeStore,
        vectors: VariableVectors,
        action_names: Sequence[str],
        fluent_names: Sequence[str],
        states: Bdd,
        trans: Bdd,
        init: Bdd,
        goal: Bdd,
        seq: Bdd,
        name: str = "",
    ):
        self.store = store
        self.vectors = vectors
        self.action_names = list(action_names)
        self.fluent_names = list(fluent_names)
        self.name = name
        # the parsed description, when the domain was compiled from one
        self.source = None
        self.states = states
        self.trans = trans
        self.seq = seq
        self.init = init & states
        self.goal = goal & states
        if self.init.is_false:
            raise ContractError("the initial belief state is empty")
        if self.goal.is_false:
            raise ContractError("the goal belief state is empty")

        self._fluent_var: Dict[str, VarId] = dict(zip(self.fluent_names, vectors.x))
        self._action_var: Dict[str, VarId] = dict(zip(self.action_names, vectors.alpha))
        self._action_relations: Dict[str, Bdd] = {}
        self._state_indices = {v.index for v in vectors.x}
        self.applicable = self.build_applicable()

    def __repr__(self) -> str:
        return (
            f"SymbolicDomain({self.name!r}, actions={len(self.action_names)}, "
            f"fluents={len(self.fluent_names)})"
        )

    # ------------------------------------------------------------------
    # states and belief states

    def encode_state(self, s: AbstractSet[str]) -> Bdd:
        unknown = set(s).difference(self._fluent_var)
        if unknown:
            raise UsageError(f"unknown fluents: {', '.join(sorted(unknown))}")
        return self.store.cube({var: name in s for name, var in self._fluent_var.items()})

    def encode_belief(self, states: Iterable[AbstractSet[str]]) -> Bdd:
        return self.store.disjoin(self.encode_state(s) for s in states)

    def decode_belief(self, f: Bdd) -> Set[State]:
        leaked = [v for v in self.store.support(f) if v.index not in self._state_indices]
        if leaked:
            names = ", ".join(str(v) for v in sorted(leaked))
            raise UsageError(f"belief state depends on non-state variables: {names}")
        return {
            frozenset(var.name for var, value in sat.items() if value)
            for sat in self.store.enumerate_sats(f & self.states, self.vectors.x)
        }

    def belief_size(self, f: Bdd) -> int:
        return self.store.sat_count(f & self.states, self.vectors.x)

    def shift_forward(self, f: Bdd) -> Bdd:
        return self.store.rename(f, self.vectors.x, self.vectors.x_next)

    def shift_backward(self, f: Bdd) -> Bdd:
        return self.store.rename(f, self.vectors.x_next, self.vectors.x)

    # ------------------------------------------------------------------
    # actions

    def action_var(self, action: str) -> VarId:
        try:
            return self._action_var[action]
        except KeyError:
            raise UsageError(f"unknown action '{action}'") from None

    def one_hot(self, action: str) -> Dict[VarId, bool]:
        chosen = self.action_var(action)
        return {var: var == chosen for var in self.vectors.alpha}

    def project(self, relation: Bdd, action: str) -> Bdd:
        """The x-part of a relation over (x, alpha) at the given action"""
        return self.store.restrict(relation, self.one_hot(action))

    def action_relation(self, action: str) -> Bdd:
        rel = self._action_relations.get(action)
        if rel is None:
            rel = self.project(self.trans, action)
            self._action_relations[action] = rel
        return rel

    def build_applicable(self) -> Bdd:
        return self.store.exists(self.vectors.x_next, self.trans)

    def is_applicable(self, action: str, belief: Bdd) -> bool:
        if belief.is_false:
            raise ContractError("applicability is undefined for the empty belief state")
        allowed = self.project(self.applicable, action)
        return (belief & self.states & ~allowed).is_false

    # ------------------------------------------------------------------
    # images

    def forward_image(self, belief: Bdd) -> Bdd:
        """States reachable from belief in one step of any action"""
        quantified = self.vectors.x + self.vectors.alpha
        return self.shift_backward(self.store.and_exists(self.trans, belief, quantified))

    def action_image(self, action: str, belief: Bdd) -> Bdd:
        rel = self.action_relation(action)
        return self.shift_backward(self.store.and_exists(rel, belief, self.vectors.x))

    def strong_preimage_all(self, target: Bdd) -> Bdd:
        """Pairs (s, a) with a applicable in s and every a-successor of s in target.

        `target` may also depend on plan variables; they are carried through."""
        shifted = self.shift_forward(target)
        escapes = self.store.and_exists(self.trans, ~shifted, self.vectors.x_next)
        return ~escapes & self.applicable

    def strong_preimage(self, action: str, target: Bdd) -> Bdd:
        return self.project(self.strong_preimage_all(target), action)

    # ------------------------------------------------------------------
    # plan variables

    def new_plan_block(self, i: int) -> List[VarId]:
        """Plan block i (1-based), allocated below every existing block"""
        blocks = self.vectors.plan_blocks
        if i <= len(blocks):
            return blocks[i - 1]
        if i != len(blocks) + 1:
            raise UsageError(f"plan block {i} requested before block {len(blocks) + 1}")
        block = [self.store.add_var(f"pi{i}:{a}", "plans") for a in self.action_names]
        blocks.append(block)
        return block
