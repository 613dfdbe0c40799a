"""Ground domain descriptions for the benchmark families.

Every family is built as a `DomainAst` and printed with `format_domain`, so
equal specs always give byte-identical text.

    BT(p)          p packages, one holds the bomb; dunking the right one defuses it
    BTC(p)         dunking clogs the toilet, flushing unclogs it
    BTUC(p)        dunking may or may not clog the toilet
    BMTC(p,t)      t toilets; variants low, mid (odd toilets maybe clogged), high
    RING(r)        r rooms in a ring, lock every window starting anywhere
    URING(r)       windows open and close on their own until locked
    NDRING(r,i)    RING plus i fluents every action scrambles
    SQUARE(n)      robot on an n x n grid, position unknown; goals corner/face/center,
                   the face goal starts from anywhere on the opposite side
    CUBE(n)        the same on an n x n x n grid
    OMELETTE(i)    two bowls, eggs may be rotten; has no conformant solution
"""
import logging
import os
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

from services.lang import (
    TRUE,
    ActionEffects,
    BinOp,
    CausalRule,
    DomainAst,
    Formula,
    Not,
    Var,
    conjoin,
    disjoin,
    format_domain,
)
from utils.errors import UnknownInstanceError, UsageError

logger = logging.getLogger(__name__)

GRID_GOALS = ("corner", "face", "center")


@dataclass(frozen=True)
class FamilySpec:
    family: str
    params: Tuple[int, ...]
    variant: Optional[str] = None

    def __str__(self) -> str:
        text = f"{self.family}({','.join(str(p) for p in self.params)})"
        return f"{text}-{self.variant}" if self.variant else text

    @property
    def domain_name(self) -> str:
        parts = [self.family] + [str(p) for p in self.params]
        if self.variant:
            parts.append(self.variant)
        return "_".join(parts)


def parse_family_spec(family: str, params: str = "", variant: Optional[str] = None) -> FamilySpec:
    """FamilySpec from command-line text such as ("BMTC", "4,2", "low")"""
    name = family.upper()
    if name not in GENERATORS:
        raise UnknownInstanceError(f"unknown benchmark family '{family}'")
    try:
        values = tuple(int(p) for p in params.split(",") if p.strip())
    except ValueError:
        raise UsageError(f"parameters must be comma-separated integers, got '{params}'") from None
    return normalize(FamilySpec(name, values, variant.lower() if variant else None))


# ---------------------------------------------------------------------------
# building blocks


def v(name: str) -> Var:
    return Var(name)


def iff(left: Formula, right: Formula) -> Formula:
    return BinOp("<->", left, right)


def implies(left: Formula, right: Formula) -> Formula:
    return BinOp("->", left, right)


def exactly_one(names: Sequence[str]) -> List[Formula]:
    """ALWAYS formulas making exactly one of names true"""
    if len(names) == 1:
        return [v(names[0])]
    if len(names) == 2:
        return [iff(v(names[0]), Not(v(names[1])))]
    formulas = [disjoin(v(n) for n in names)]
    for i, a in enumerate(names):
        for b in names[i + 1 :]:
            formulas.append(Not(BinOp("&", v(a), v(b))))
    return formulas


def equals(bits: Sequence[str], value: int) -> Formula:
    """The binary number held in bits (least significant first) is value"""
    return conjoin(v(b) if value >> k & 1 else Not(v(b)) for k, b in enumerate(bits))


class DomainBuilder:
    def __init__(self, name: str):
        self.name = name
        self.actions: List[str] = []
        self.fluents: List[str] = []
        self.inertial: List[str] = []
        self.always: List[Formula] = []
        self.effects: Dict[str, ActionEffects] = {}

    def action(self, name: str) -> str:
        self.actions.append(name)
        return name

    def fluent(self, name: str, inertial: bool = True) -> str:
        self.fluents.append(name)
        if inertial:
            self.inertial.append(name)
        return name

    def constrain(self, formulas: Sequence[Formula]):
        self.always.extend(formulas)

    def _entry(self, action: str) -> ActionEffects:
        return self.effects.setdefault(action, ActionEffects())

    def precondition(self, action: str, formula: Formula):
        self._entry(action).preconditions.append(formula)

    def causes(self, action: str, fluent: str, positive: bool = True, when: Formula = TRUE):
        self._entry(action).causes.append(CausalRule(fluent, positive, when))

    def possibly_changes(self, action: str, fluent: str):
        entry = self._entry(action)
        if fluent not in entry.possibly_changes:
            entry.possibly_changes.append(fluent)

    def build(self, initially: Formula, goal: Formula) -> DomainAst:
        return DomainAst(
            name=self.name,
            actions=list(self.actions),
            fluents=list(self.fluents),
            inertial=list(self.inertial),
            always=list(self.always),
            effects={a: self.effects[a] for a in self.actions if a in self.effects},
            initially=initially,
            goal=goal,
        )


# ---------------------------------------------------------------------------
# bomb in the toilet


def _packages(d: DomainBuilder, p: int) -> List[str]:
    packages = [d.fluent(f"In_{k}") for k in range(1, p + 1)]
    d.constrain(exactly_one(packages))
    return packages


def build_bt(spec: FamilySpec) -> DomainAst:
    (p,) = spec.params
    d = DomainBuilder(spec.domain_name)
    dunks = [d.action(f"Dunk_{k}") for k in range(1, p + 1)]
    packages = _packages(d, p)
    d.fluent("Defused")
    for dunk, package in zip(dunks, packages):
        d.causes(dunk, "Defused", when=v(package))
    return d.build(Not(v("Defused")), v("Defused"))


def build_btc(spec: FamilySpec) -> DomainAst:
    (p,) = spec.params
    d = DomainBuilder(spec.domain_name)
    dunks = [d.action(f"Dunk_{k}") for k in range(1, p + 1)]
    flush = d.action("Flush")
    packages = _packages(d, p)
    d.fluent("Defused")
    d.fluent("Clogged")
    for dunk, package in zip(dunks, packages):
        d.precondition(dunk, Not(v("Clogged")))
        d.causes(dunk, "Defused", when=v(package))
        d.causes(dunk, "Clogged")
    d.causes(flush, "Clogged", positive=False)
    return d.build(conjoin([Not(v("Defused")), Not(v("Clogged"))]), v("Defused"))


def build_btuc(spec: FamilySpec) -> DomainAst:
    """Uncertain clogging. The default instance starts unclogged and only asks
    for the bomb defused; the "uncertain" variant starts with the toilet possibly
    clogged and also wants it unclogged at the end."""
    (p,) = spec.params
    d = DomainBuilder(spec.domain_name)
    dunks = [d.action(f"Dunk_{k}") for k in range(1, p + 1)]
    flush = d.action("Flush")
    packages = _packages(d, p)
    d.fluent("Defused")
    d.fluent("Clogged")
    d.causes(flush, "Clogged", positive=False)
    for dunk, package in zip(dunks, packages):
        d.precondition(dunk, Not(v("Clogged")))
        d.causes(dunk, "Defused", when=v(package))
        d.possibly_changes(dunk, "Clogged")
    if spec.variant == "uncertain":
        d.inertial = ["Clogged", "Defused"] + packages
        return d.build(Not(v("Defused")), conjoin([v("Defused"), Not(v("Clogged"))]))
    return d.build(conjoin([Not(v("Defused")), Not(v("Clogged"))]), v("Defused"))


def build_bmtc(spec: FamilySpec) -> DomainAst:
    p, t = spec.params
    d = DomainBuilder(spec.domain_name)
    dunks = {
        (k, j): d.action(f"Dunk_{k}_{j}") for k in range(1, p + 1) for j in range(1, t + 1)
    }
    flushes = [d.action(f"Flush_{j}") for j in range(1, t + 1)]
    packages = _packages(d, p)
    d.fluent("Defused")
    toilets = [d.fluent(f"Clogged_{j}") for j in range(1, t + 1)]
    for (k, j), dunk in dunks.items():
        d.precondition(dunk, Not(v(toilets[j - 1])))
        d.causes(dunk, "Defused", when=v(packages[k - 1]))
        d.causes(dunk, toilets[j - 1])
    for flush, toilet in zip(flushes, toilets):
        d.causes(flush, toilet, positive=False)

    initially = [Not(v("Defused"))]
    for j, toilet in enumerate(toilets, start=1):
        if spec.variant == "low" or (spec.variant == "mid" and j % 2 == 0):
            initially.append(Not(v(toilet)))
    return d.build(conjoin(initially), v("Defused"))


# ---------------------------------------------------------------------------
# rings of rooms


def _ring(spec: FamilySpec, uncertain_windows: bool, scrambled: int) -> DomainAst:
    r = spec.params[0]
    d = DomainBuilder(spec.domain_name)
    move_cw = d.action("Move_cw")
    move_ccw = d.action("Move_ccw")
    close = d.action("Close")
    lock = d.action("Lock")
    rooms = [d.fluent(f"Pos_{i}") for i in range(1, r + 1)]
    closed, locked = [], []
    for i in range(1, r + 1):
        closed.append(d.fluent(f"Closed_{i}"))
        locked.append(d.fluent(f"Locked_{i}"))
    # no action mentions these; being non-inertial leaves them free on every step
    noise = [d.fluent(f"Nd_{k}", inertial=False) for k in range(1, scrambled + 1)]

    d.constrain(exactly_one(rooms))
    d.constrain([implies(v(lk), v(c)) for lk, c in zip(locked, closed)])
    for i, room in enumerate(rooms):
        d.causes(move_cw, rooms[(i + 1) % r], when=v(room))
        d.causes(move_cw, room, positive=False, when=v(room))
        d.causes(move_ccw, rooms[(i - 1) % r], when=v(room))
        d.causes(move_ccw, room, positive=False, when=v(room))
        d.causes(close, closed[i], when=v(room))
        d.causes(lock, locked[i], when=conjoin([v(room), v(closed[i])]))
    if uncertain_windows:
        # locked windows stay closed through ALWAYS
        for action in (move_cw, move_ccw, close, lock):
            for window in closed:
                d.possibly_changes(action, window)
    if noise:
        logger.debug("%s scrambles %d fluents on every action", spec, len(noise))
    return d.build(TRUE, conjoin(v(lk) for lk in locked))


def build_ring(spec: FamilySpec) -> DomainAst:
    return _ring(spec, uncertain_windows=False, scrambled=0)


def build_uring(spec: FamilySpec) -> DomainAst:
    return _ring(spec, uncertain_windows=True, scrambled=0)


def build_ndring(spec: FamilySpec) -> DomainAst:
    return _ring(spec, uncertain_windows=False, scrambled=spec.params[1])


# ---------------------------------------------------------------------------
# robot navigation


def _grid(spec: FamilySpec, axes: Sequence[Tuple[str, str, str]]) -> DomainAst:
    n = spec.params[0]
    d = DomainBuilder(spec.domain_name)
    moves = [(d.action(down), d.action(up)) for _, down, up in axes]
    cells = []
    for axis, _, _ in axes:
        line = [d.fluent(f"{axis}_{k}") for k in range(1, n + 1)]
        d.constrain(exactly_one(line))
        cells.append(line)
    # moving against a wall leaves the robot where it is
    for (down, up), line in zip(moves, cells):
        for k in range(n - 1):
            d.causes(up, line[k + 1], when=v(line[k]))
            d.causes(up, line[k], positive=False, when=v(line[k]))
            d.causes(down, line[k], when=v(line[k + 1]))
            d.causes(down, line[k + 1], positive=False, when=v(line[k + 1]))

    middle = (n + 1) // 2 - 1
    initially: Formula = TRUE
    if spec.variant == "corner":
        target = [0] * len(axes)
    elif spec.variant == "face":
        # start anywhere on the far side, end at the centre of the near one
        initially = v(cells[0][n - 1])
        target = [0] + [middle] * (len(axes) - 1)
    else:
        target = [middle] * len(axes)
    return d.build(initially, conjoin(v(line[k]) for line, k in zip(cells, target)))


def build_square(spec: FamilySpec) -> DomainAst:
    return _grid(spec, [("X", "Left", "Right"), ("Y", "Down", "Up")])


def build_cube(spec: FamilySpec) -> DomainAst:
    return _grid(spec, [("X", "Left", "Right"), ("Y", "Down", "Up"), ("Z", "Back", "Forward")])


# ---------------------------------------------------------------------------
# omelette


def build_omelette(spec: FamilySpec) -> DomainAst:
    (capacity,) = spec.params
    width = capacity.bit_length()
    d = DomainBuilder(spec.domain_name)
    bowls = (1, 2)
    breaks = {b: d.action(f"Break_{b}") for b in bowls}
    pours = {(s, t): d.action(f"Pour_{s}_{t}") for s in bowls for t in bowls if s != t}
    discards = {b: d.action(f"Discard_{b}") for b in bowls}
    count: Dict[int, List[str]] = {}
    spoiled: Dict[int, str] = {}
    for b in bowls:
        count[b] = [d.fluent(f"Eggs_{b}_{k}") for k in range(width)]
        spoiled[b] = d.fluent(f"Spoiled_{b}")
        if capacity + 1 < 1 << width:
            d.constrain([disjoin(equals(count[b], c) for c in range(capacity + 1))])

    for b in bowls:
        bits = count[b]
        d.precondition(breaks[b], disjoin(equals(bits, c) for c in range(capacity)))
        for k, bit in enumerate(bits):
            on = [equals(bits, c) for c in range(capacity) if (c + 1) >> k & 1]
            off = [equals(bits, c) for c in range(capacity) if not (c + 1) >> k & 1]
            if on:
                d.causes(breaks[b], bit, when=disjoin(on))
            if off:
                d.causes(breaks[b], bit, positive=False, when=disjoin(off))
        # a rotten egg spoils the bowl; a spoiled bowl stays spoiled
        d.causes(breaks[b], spoiled[b], when=v(spoiled[b]))
        d.possibly_changes(breaks[b], spoiled[b])

        for bit in bits:
            d.causes(discards[b], bit, positive=False)
        d.causes(discards[b], spoiled[b], positive=False)

    # pouring is allowed when everything fits in the target bowl
    pairs = [(a, c) for a in range(capacity + 1) for c in range(capacity + 1 - a)]
    for (s, t), pour in pours.items():
        holds = {(a, c): conjoin([equals(count[s], a), equals(count[t], c)]) for a, c in pairs}
        d.precondition(pour, disjoin(holds.values()))
        for k, bit in enumerate(count[t]):
            on = [f for (a, c), f in holds.items() if (a + c) >> k & 1]
            off = [f for (a, c), f in holds.items() if not (a + c) >> k & 1]
            if on:
                d.causes(pour, bit, when=disjoin(on))
            if off:
                d.causes(pour, bit, positive=False, when=disjoin(off))
        for bit in count[s]:
            d.causes(pour, bit, positive=False)
        d.causes(pour, spoiled[t], when=v(spoiled[s]))
        d.causes(pour, spoiled[s], positive=False)

    initially = conjoin([Not(v(f)) for b in bowls for f in count[b] + [spoiled[b]]])
    goal = disjoin(conjoin([equals(count[b], capacity), Not(v(spoiled[b]))]) for b in bowls)
    return d.build(initially, goal)


# ---------------------------------------------------------------------------
# dispatch

# family -> (builder, parameter count, minimum values, variants, default variant)
GENERATORS: Dict[str, tuple] = {
    "BT": (build_bt, 1, (1,), (None,), None),
    "BTC": (build_btc, 1, (1,), (None,), None),
    "BTUC": (build_btuc, 1, (1,), (None, "uncertain"), None),
    "BMTC": (build_bmtc, 2, (1, 1), ("low", "mid", "high"), "low"),
    "RING": (build_ring, 1, (2,), (None,), None),
    "URING": (build_uring, 1, (2,), (None,), None),
    "NDRING": (build_ndring, 2, (2, 0), (None,), None),
    "SQUARE": (build_square, 1, (2,), GRID_GOALS, "corner"),
    "CUBE": (build_cube, 1, (2,), GRID_GOALS, "corner"),
    "OMELETTE": (build_omelette, 1, (1,), (None,), None),
}


def normalize(spec: FamilySpec) -> FamilySpec:
    """Check parameters and fill in the default variant

    Raises:
        UnknownInstanceError: unknown family
        UsageError: wrong parameter count, value or variant
    """
    entry = GENERATORS.get(spec.family.upper())
    if entry is None:
        raise UnknownInstanceError(f"unknown benchmark family '{spec.family}'")
    _, arity, minimum, variants, default = entry
    family = spec.family.upper()
    if len(spec.params) != arity:
        raise UsageError(f"{family} takes {arity} parameter(s), got {len(spec.params)}")
    for value, low in zip(spec.params, minimum):
        if value < low:
            raise UsageError(f"{family} parameters must be at least {minimum}, got {spec.params}")
    variant = spec.variant if spec.variant is not None else default
    if variant not in variants:
        allowed = ", ".join(str(x) for x in variants if x is not None) or "none"
        raise UsageError(f"{family} has no variant '{variant}' (allowed: {allowed})")
    return FamilySpec(family, tuple(spec.params), variant)


def build(spec: FamilySpec) -> DomainAst:
    spec = normalize(spec)
    return GENERATORS[spec.family][0](spec)


def generate(spec: FamilySpec) -> str:
    return format_domain(build(spec))


def emit(spec: FamilySpec, directory: str) -> str:
    """Write the generated description to directory; returns the file path"""
    spec = normalize(spec)
    os.makedirs(directory, exist_ok=True)
    path = os.path.join(directory, f"{spec.domain_name}.ar")
    with open(path, "w", encoding="utf-8") as fp:
        fp.write(generate(spec))
    logger.info("wrote %s", path)
    return path
