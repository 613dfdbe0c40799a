"""Reduced ordered binary decision diagrams.

A `NodeStore` owns one shared, multi-rooted DAG. Nodes are integers: 0 is the
FALSE leaf, 1 is the TRUE leaf, every other node is a (var, low, high) triple
kept unique by the unique table. Public operations take and return `Bdd`
handles; two handles of one store are equal iff they denote the same function.

Variables are `VarId`s. Their `index` is their position in the variable order.
Indices are sparse: `order_hint` gives every variable group its own index range,
so a variable declared late in an early group (a fresh plan block) still sits
above every variable of the later groups, and no existing index ever moves.
"""
import logging
import os
import sys
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Union

from utils.errors import ResourceError, UnsupportedOperationError, UsageError

logger = logging.getLogger(__name__)

FALSE = 0
TRUE = 1
LEAF_INDEX = 1 << 62
GROUP_SPAN = 1 << 32
DEFAULT_GROUP = "default"

# operation codes, also used as computed-table key tags
AND, OR, XOR, IMPLIES, IFF, NOT, ITE = range(7)
OPERATORS = {"and": AND, "or": OR, "xor": XOR, "implies": IMPLIES, "iff": IFF}


@dataclass(frozen=True, order=True)
class VarId:
    index: int
    name: str = field(default="", compare=False)

    def __str__(self) -> str:
        return self.name or f"v{self.index}"


class Bdd:
    """Handle to a boolean function stored in a `NodeStore`"""

    __slots__ = ("store", "node")

    def __init__(self, store: "NodeStore", node: int):
        self.store = store
        self.node = node

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, Bdd) and other.store is self.store and other.node == self.node
        )

    def __hash__(self) -> int:
        return hash((id(self.store), self.node))

    def __and__(self, other: "Bdd") -> "Bdd":
        return self.store.apply("and", self, other)

    def __or__(self, other: "Bdd") -> "Bdd":
        return self.store.apply("or", self, other)

    def __xor__(self, other: "Bdd") -> "Bdd":
        return self.store.apply("xor", self, other)

    def __invert__(self) -> "Bdd":
        return self.store.not_(self)

    def implies(self, other: "Bdd") -> "Bdd":
        return self.store.apply("implies", self, other)

    def iff(self, other: "Bdd") -> "Bdd":
        return self.store.apply("iff", self, other)

    @property
    def is_false(self) -> bool:
        return self.node == FALSE

    @property
    def is_true(self) -> bool:
        return self.node == TRUE

    def __repr__(self) -> str:
        return f"Bdd(node={self.node})"


VarLike = Union[VarId, str]


class NodeStore:
    def __init__(
        self,
        unique_table_bits: Optional[int] = None,
        computed_table_bits: int = 18,
        max_nodes: int = 0,
        memo: bool = True,
    ):
        if unique_table_bits is None:
            unique_table_bits = int(os.environ.get("CMBP_UNIQUE_TABLE_BITS", "20"))
        if unique_table_bits < 1 or computed_table_bits < 1:
            raise UsageError("table sizes must be at least 2 entries")
        # node arrays; leaves sit below every variable
        self._var: List[int] = [LEAF_INDEX, LEAF_INDEX]
        self._low: List[int] = [FALSE, TRUE]
        self._high: List[int] = [FALSE, TRUE]
        self._unique: Dict[tuple, int] = {}
        self.capacity = 1 << unique_table_bits
        self.max_nodes = max_nodes

        self.memo = memo
        self._cache: List[Optional[tuple]] = [None] * (1 << computed_table_bits)
        self._cache_mask = (1 << computed_table_bits) - 1
        self.cache_hits = 0
        self.cache_misses = 0

        self.vars: Dict[int, VarId] = {}
        self._by_name: Dict[str, VarId] = {}
        self._group_base: Dict[str, int] = {}
        self._group_size: Dict[str, int] = {}

        self.false = Bdd(self, FALSE)
        self.true = Bdd(self, TRUE)

        # recursion depth is bounded by twice the number of variables
        if sys.getrecursionlimit() < 10000:
            sys.setrecursionlimit(10000)

    def __len__(self) -> int:
        return len(self._var)

    # ------------------------------------------------------------------
    # variables and ordering

    def order_hint(self, groups: Sequence[str]) -> List[str]:
        """Fix the static group order: variables of groups[k] precede those of groups[k+1]

        Raises:
            UnsupportedOperationError: when variables or nodes already exist
        """
        if self.vars or len(self._var) > 2:
            raise UnsupportedOperationError(
                "the variable order can only be set before any variable or node is created"
            )
        if len(set(groups)) != len(groups):
            raise UsageError(f"duplicate group names in {list(groups)}")
        self._group_base = {name: k * GROUP_SPAN for k, name in enumerate(groups)}
        self._group_size = {name: 0 for name in groups}
        return list(groups)

    def reorder(self) -> None:
        """Dynamic reordering hook. The order is static, so this does nothing"""
        logger.debug("reorder requested; static order kept (%d variables)", len(self.vars))

    def add_var(self, name: str, group: Optional[str] = None) -> VarId:
        if name in self._by_name:
            raise UsageError(f"variable '{name}' is already declared")
        if group is None:
            group = DEFAULT_GROUP
            if not self._group_base:
                self._group_base[DEFAULT_GROUP] = 0
                self._group_size[DEFAULT_GROUP] = 0
        if group not in self._group_base:
            raise UsageError(f"unknown variable group '{group}'")
        size = self._group_size[group]
        if size >= GROUP_SPAN:
            raise ResourceError(f"variable group '{group}' is full")
        var = VarId(self._group_base[group] + size, name)
        self._group_size[group] = size + 1
        self.vars[var.index] = var
        self._by_name[name] = var
        return var

    def var(self, v: VarLike) -> VarId:
        """Resolve a name or VarId to the registered VarId"""
        if isinstance(v, VarId):
            if self.vars.get(v.index) is None:
                raise UsageError(f"unknown variable {v}")
            return self.vars[v.index]
        try:
            return self._by_name[v]
        except KeyError:
            raise UsageError(f"unknown variable '{v}'") from None

    def ordering(self) -> List[VarId]:
        return [self.vars[i] for i in sorted(self.vars)]

    def group_of(self, v: VarLike) -> str:
        index = self.var(v).index
        for name, base in self._group_base.items():
            if base <= index < base + GROUP_SPAN:
                return name
        raise UsageError(f"variable {v} belongs to no group")

    def group_range(self, group: str) -> range:
        base = self._group_base[group]
        return range(base, base + GROUP_SPAN)

    # ------------------------------------------------------------------
    # node level API

    def _node(self, f: Bdd) -> int:
        if not isinstance(f, Bdd) or f.store is not self:
            raise UsageError("decision diagram handle belongs to a different store")
        return f.node

    def wrap(self, u: int) -> Bdd:
        return Bdd(self, u)

    def succ(self, u: int) -> tuple:
        """(var index, low, high) of node u; leaves report LEAF_INDEX"""
        return self._var[u], self._low[u], self._high[u]

    def find_or_add(self, var: int, low: int, high: int) -> int:
        """Unique-table lookup. low and high must lie below var"""
        return self._mk(var, low, high)

    def _mk(self, var: int, low: int, high: int) -> int:
        if low == high:
            return low
        key = (var, low, high)
        u = self._unique.get(key)
        if u is not None:
            return u
        u = len(self._var)
        if self.max_nodes and u >= self.max_nodes:
            logger.warning("node store exhausted at %d nodes", u)
            raise ResourceError(f"node store exhausted ({self.max_nodes} nodes)")
        self._var.append(var)
        self._low.append(low)
        self._high.append(high)
        self._unique[key] = u
        if u >= self.capacity:
            self.capacity <<= 1
            logger.debug("unique table grown to %d entries", self.capacity)
        return u

    def _cache_lookup(self, key: tuple) -> Optional[int]:
        if not self.memo:
            return None
        entry = self._cache[hash(key) & self._cache_mask]
        if entry is not None and entry[0] == key:
            self.cache_hits += 1
            return entry[1]
        self.cache_misses += 1
        return None

    def _cache_store(self, key: tuple, value: int) -> None:
        if self.memo:
            # overwrite on collision
            self._cache[hash(key) & self._cache_mask] = (key, value)

    def _cofactors(self, u: int, var: int) -> tuple:
        if self._var[u] == var:
            return self._low[u], self._high[u]
        return u, u

    # ------------------------------------------------------------------
    # boolean combination

    def mk_var(self, v: VarLike) -> Bdd:
        var = self.var(v)
        return Bdd(self, self._mk(var.index, FALSE, TRUE))

    def literal(self, v: VarLike, positive: bool = True) -> Bdd:
        var = self.var(v)
        if positive:
            return Bdd(self, self._mk(var.index, FALSE, TRUE))
        return Bdd(self, self._mk(var.index, TRUE, FALSE))

    def constant(self, value: bool) -> Bdd:
        return self.true if value else self.false

    def apply(self, op: str, f: Bdd, g: Bdd) -> Bdd:
        code = OPERATORS.get(op)
        if code is None:
            raise UsageError(f"unknown boolean operator '{op}'")
        return Bdd(self, self._apply(code, self._node(f), self._node(g)))

    def not_(self, f: Bdd) -> Bdd:
        return Bdd(self, self._not(self._node(f)))

    def ite(self, f: Bdd, g: Bdd, h: Bdd) -> Bdd:
        return Bdd(self, self._ite(self._node(f), self._node(g), self._node(h)))

    def conjoin(self, fs: Iterable[Bdd]) -> Bdd:
        u = TRUE
        for f in fs:
            u = self._apply(AND, u, self._node(f))
        return Bdd(self, u)

    def disjoin(self, fs: Iterable[Bdd]) -> Bdd:
        u = FALSE
        for f in fs:
            u = self._apply(OR, u, self._node(f))
        return Bdd(self, u)

    def _apply(self, op: int, u: int, v: int) -> int:
        if op == AND:
            if u == FALSE or v == FALSE:
                return FALSE
            if u == TRUE:
                return v
            if v == TRUE or u == v:
                return u
            if u > v:
                u, v = v, u
        elif op == OR:
            if u == TRUE or v == TRUE:
                return TRUE
            if u == FALSE:
                return v
            if v == FALSE or u == v:
                return u
            if u > v:
                u, v = v, u
        elif op == XOR:
            if u == v:
                return FALSE
            if u == FALSE:
                return v
            if v == FALSE:
                return u
            if u == TRUE:
                return self._not(v)
            if v == TRUE:
                return self._not(u)
            if u > v:
                u, v = v, u
        elif op == IMPLIES:
            if u == FALSE or v == TRUE or u == v:
                return TRUE
            if u == TRUE:
                return v
            if v == FALSE:
                return self._not(u)
        elif op == IFF:
            if u == v:
                return TRUE
            if u == TRUE:
                return v
            if v == TRUE:
                return u
            if u == FALSE:
                return self._not(v)
            if v == FALSE:
                return self._not(u)
            if u > v:
                u, v = v, u

        key = (op, u, v)
        r = self._cache_lookup(key)
        if r is not None:
            return r
        top = min(self._var[u], self._var[v])
        u0, u1 = self._cofactors(u, top)
        v0, v1 = self._cofactors(v, top)
        r = self._mk(top, self._apply(op, u0, v0), self._apply(op, u1, v1))
        self._cache_store(key, r)
        return r

    def _not(self, u: int) -> int:
        if u < 2:
            return 1 - u
        key = (NOT, u)
        r = self._cache_lookup(key)
        if r is not None:
            return r
        r = self._mk(self._var[u], self._not(self._low[u]), self._not(self._high[u]))
        self._cache_store(key, r)
        return r

    def _ite(self, f: int, g: int, h: int) -> int:
        if f == TRUE:
            return g
        if f == FALSE:
            return h
        if g == h:
            return g
        if g == TRUE and h == FALSE:
            return f
        if g == FALSE and h == TRUE:
            return self._not(f)
        key = (ITE, f, g, h)
        r = self._cache_lookup(key)
        if r is not None:
            return r
        top = min(self._var[f], self._var[g], self._var[h])
        f0, f1 = self._cofactors(f, top)
        g0, g1 = self._cofactors(g, top)
        h0, h1 = self._cofactors(h, top)
        r = self._mk(top, self._ite(f0, g0, h0), self._ite(f1, g1, h1))
        self._cache_store(key, r)
        return r

    # ------------------------------------------------------------------
    # substitution

    def restrict(self, f: Bdd, values: Mapping[VarLike, bool]) -> Bdd:
        """Cofactor of f by a partial assignment"""
        levels = {self.var(v).index: bool(b) for v, b in values.items()}
        u = self._node(f)
        if not levels:
            return f
        return Bdd(self, self._restrict(u, levels, max(levels), {}))

    def _restrict(self, u: int, values: Dict[int, bool], vmax: int, cache: dict) -> int:
        var = self._var[u]
        if var > vmax:
            return u
        r = cache.get(u)
        if r is not None:
            return r
        if var in values:
            child = self._high[u] if values[var] else self._low[u]
            r = self._restrict(child, values, vmax, cache)
        else:
            r = self._mk(
                var,
                self._restrict(self._low[u], values, vmax, cache),
                self._restrict(self._high[u], values, vmax, cache),
            )
        cache[u] = r
        return r

    def compose(self, f: Bdd, v: VarLike, g: Bdd) -> Bdd:
        """f with variable v replaced by the function g"""
        index = self.var(v).index
        u = self._node(f)
        w = self._node(g)
        high = self._restrict(u, {index: True}, index, {})
        low = self._restrict(u, {index: False}, index, {})
        return Bdd(self, self._ite(w, high, low))

    def rename(self, f: Bdd, src: Sequence[VarLike], dst: Sequence[VarLike]) -> Bdd:
        """Parallel substitution f[src/dst]

        Raises:
            UsageError: on length mismatch, repeated variables, or when a
                target variable occurs in f without being renamed itself
        """
        u = self._node(f)
        if len(src) != len(dst):
            raise UsageError(f"rename needs equal-length vectors, got {len(src)} and {len(dst)}")
        src_ids = [self.var(v).index for v in src]
        dst_ids = [self.var(v).index for v in dst]
        if len(set(src_ids)) != len(src_ids) or len(set(dst_ids)) != len(dst_ids):
            raise UsageError("rename vectors must not repeat variables")
        mapping = {a: b for a, b in zip(src_ids, dst_ids) if a != b}
        if not mapping:
            return f
        support = sorted(self._support(u))
        clash = set(mapping.values()).intersection(support).difference(mapping)
        if clash:
            names = ", ".join(str(self.vars[i]) for i in sorted(clash))
            raise UsageError(f"rename target variables already occur in the function: {names}")
        mapped = [mapping.get(i, i) for i in support]
        if all(a < b for a, b in zip(mapped, mapped[1:])):
            return Bdd(self, self._rename_monotone(u, mapping, {}))
        return Bdd(self, self._rename_general(u, mapping, {}))

    def _rename_monotone(self, u: int, mapping: Dict[int, int], cache: dict) -> int:
        if u < 2:
            return u
        r = cache.get(u)
        if r is not None:
            return r
        var = self._var[u]
        r = self._mk(
            mapping.get(var, var),
            self._rename_monotone(self._low[u], mapping, cache),
            self._rename_monotone(self._high[u], mapping, cache),
        )
        cache[u] = r
        return r

    def _rename_general(self, u: int, mapping: Dict[int, int], cache: dict) -> int:
        if u < 2:
            return u
        r = cache.get(u)
        if r is not None:
            return r
        var = self._var[u]
        low = self._rename_general(self._low[u], mapping, cache)
        high = self._rename_general(self._high[u], mapping, cache)
        r = self._ite(self._mk(mapping.get(var, var), FALSE, TRUE), high, low)
        cache[u] = r
        return r

    # ------------------------------------------------------------------
    # quantification

    def exists(self, vs: Iterable[VarLike], f: Bdd) -> Bdd:
        return self._quantify_public(vs, f, forall=False)

    def forall(self, vs: Iterable[VarLike], f: Bdd) -> Bdd:
        return self._quantify_public(vs, f, forall=True)

    def _quantify_public(self, vs: Iterable[VarLike], f: Bdd, forall: bool) -> Bdd:
        u = self._node(f)
        qset = frozenset(self.var(v).index for v in vs)
        if not qset:
            return f
        return Bdd(self, self._quantify(u, qset, max(qset), forall, {}))

    def _quantify(self, u: int, qset: frozenset, qmax: int, forall: bool, cache: dict) -> int:
        var = self._var[u]
        if var > qmax:
            return u
        r = cache.get(u)
        if r is not None:
            return r
        low = self._quantify(self._low[u], qset, qmax, forall, cache)
        if var in qset:
            if forall:
                r = FALSE if low == FALSE else self._apply(
                    AND, low, self._quantify(self._high[u], qset, qmax, forall, cache)
                )
            else:
                r = TRUE if low == TRUE else self._apply(
                    OR, low, self._quantify(self._high[u], qset, qmax, forall, cache)
                )
        else:
            r = self._mk(var, low, self._quantify(self._high[u], qset, qmax, forall, cache))
        cache[u] = r
        return r

    def and_exists(self, f: Bdd, g: Bdd, vs: Iterable[VarLike]) -> Bdd:
        """Relational product: exists(vs, f & g) without building f & g"""
        u = self._node(f)
        v = self._node(g)
        qset = frozenset(self.var(x).index for x in vs)
        if not qset:
            return Bdd(self, self._apply(AND, u, v))
        return Bdd(self, self._and_exists(u, v, qset, max(qset), {}, {}))

    def _and_exists(
        self, u: int, v: int, qset: frozenset, qmax: int, cache: dict, qcache: dict
    ) -> int:
        if u == FALSE or v == FALSE:
            return FALSE
        if u == TRUE or u == v:
            return self._quantify(v, qset, qmax, False, qcache)
        if v == TRUE:
            return self._quantify(u, qset, qmax, False, qcache)
        if u > v:
            u, v = v, u
        top = min(self._var[u], self._var[v])
        if top > qmax:
            return self._apply(AND, u, v)
        key = (u, v)
        r = cache.get(key)
        if r is not None:
            return r
        u0, u1 = self._cofactors(u, top)
        v0, v1 = self._cofactors(v, top)
        low = self._and_exists(u0, v0, qset, qmax, cache, qcache)
        if top in qset:
            if low == TRUE:
                r = TRUE
            else:
                r = self._apply(OR, low, self._and_exists(u1, v1, qset, qmax, cache, qcache))
        else:
            r = self._mk(top, low, self._and_exists(u1, v1, qset, qmax, cache, qcache))
        cache[key] = r
        return r

    # ------------------------------------------------------------------
    # inspection

    def eval(self, f: Bdd, assignment: Mapping[VarLike, bool]) -> bool:
        values = {self.var(v).index: bool(b) for v, b in assignment.items()}
        u = self._node(f)
        while u >= 2:
            var = self._var[u]
            if var not in values:
                raise UsageError(f"assignment has no value for variable {self.vars[var]}")
            u = self._high[u] if values[var] else self._low[u]
        return u == TRUE

    def support(self, f: Bdd) -> set:
        return {self.vars[i] for i in self._support(self._node(f))}

    def _support(self, u: int) -> set:
        found = set()
        seen = set()
        stack = [u]
        while stack:
            n = stack.pop()
            if n < 2 or n in seen:
                continue
            seen.add(n)
            found.add(self._var[n])
            stack.append(self._low[n])
            stack.append(self._high[n])
        return found

    def node_count(self, f: Bdd) -> int:
        """Number of distinct nodes reachable from f, leaves included"""
        seen = set()
        stack = [self._node(f)]
        while stack:
            n = stack.pop()
            if n in seen:
                continue
            seen.add(n)
            if n >= 2:
                stack.append(self._low[n])
                stack.append(self._high[n])
        return len(seen)

    def _over(self, f: Bdd, over: Sequence[VarLike]) -> List[VarId]:
        ordered = sorted({self.var(v) for v in over})
        leaked = self._support(self._node(f)).difference(v.index for v in ordered)
        if leaked:
            names = ", ".join(str(self.vars[i]) for i in sorted(leaked))
            raise UsageError(f"function depends on variables outside the enumeration set: {names}")
        return ordered

    def enumerate_sats(
        self, f: Bdd, over: Sequence[VarLike], limit: Optional[int] = None
    ) -> List[Dict[VarId, bool]]:
        """Satisfying total assignments over `over`, lexicographic in variable
        order with the low branch first. Don't-care variables are expanded."""
        ordered = self._over(f, over)
        found: List[Dict[VarId, bool]] = []
        if limit is not None and limit <= 0:
            return found
        partial: Dict[VarId, bool] = {}

        def walk(u: int, k: int) -> bool:
            if u == FALSE:
                return False
            if k == len(ordered):
                found.append(dict(partial))
                return limit is not None and len(found) >= limit
            var = ordered[k]
            if self._var[u] == var.index:
                branches = ((False, self._low[u]), (True, self._high[u]))
            else:
                branches = ((False, u), (True, u))
            for value, child in branches:
                if child == FALSE:
                    continue
                partial[var] = value
                if walk(child, k + 1):
                    return True
            partial.pop(var, None)
            return False

        walk(self._node(f), 0)
        return found

    def pick(self, f: Bdd, over: Sequence[VarLike]) -> Optional[Dict[VarId, bool]]:
        sats = self.enumerate_sats(f, over, limit=1)
        return sats[0] if sats else None

    def sat_count(self, f: Bdd, over: Sequence[VarLike]) -> int:
        ordered = self._over(f, over)
        position = {v.index: k for k, v in enumerate(ordered)}
        n = len(ordered)
        cache: Dict[int, int] = {}

        def pos(u: int) -> int:
            return n if u < 2 else position[self._var[u]]

        def count(u: int) -> int:
            if u < 2:
                return u
            r = cache.get(u)
            if r is None:
                low, high = self._low[u], self._high[u]
                p = pos(u)
                r = count(low) * 2 ** (pos(low) - p - 1) + count(high) * 2 ** (pos(high) - p - 1)
                cache[u] = r
            return r

        u = self._node(f)
        return count(u) * 2 ** pos(u)

    def cube(self, assignment: Mapping[VarLike, bool]) -> Bdd:
        literals = sorted(
            ((self.var(v).index, bool(b)) for v, b in assignment.items()), reverse=True
        )
        u = TRUE
        for var, value in literals:
            u = self._mk(var, FALSE, u) if value else self._mk(var, u, FALSE)
        return Bdd(self, u)

    def to_dot(self, f: Bdd, name: str = "bdd") -> str:
        """DOT graph of f: solid edges are high branches, dashed edges low branches"""
        root = self._node(f)
        nodes = set()
        stack = [root]
        while stack:
            n = stack.pop()
            if n in nodes:
                continue
            nodes.add(n)
            if n >= 2:
                stack.extend((self._low[n], self._high[n]))
        lines = [f"digraph {name} {{"]
        for n in sorted(nodes):
            if n < 2:
                lines.append(f'  n{n} [label="{"TRUE" if n else "FALSE"}", shape=box];')
            else:
                lines.append(f'  n{n} [label="{self.vars[self._var[n]]}"];')
        for n in sorted(nodes):
            if n >= 2:
                lines.append(f"  n{n} -> n{self._high[n]};")
                lines.append(f"  n{n} -> n{self._low[n]} [style=dashed];")
        lines.append("}")
        return "\n".join(lines) + "\n"

    def stats(self) -> Dict[str, int]:
        return {
            "nodes": len(self._var),
            "variables": len(self.vars),
            "unique_table_capacity": self.capacity,
            "computed_table_size": len(self._cache),
            "computed_table_hits": self.cache_hits,
            "computed_table_misses": self.cache_misses,
        }
