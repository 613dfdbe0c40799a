"""Reader and printer for domain descriptions.

A description names its actions and boolean fluents, marks some fluents
inertial, constrains legal states with ALWAYS formulas and describes each
action with preconditions, causal rules and POSSIBLY CHANGES clauses:

    DOMAIN BTUC
    ACTIONS Dunk_1, Dunk_2, Flush;
    FLUENTS In_1, In_2, Defused, Clogged : boolean;
    INERTIAL Clogged, Defused, In_1, In_2;
    ALWAYS In_1 <-> !In_2;
    Flush CAUSES !Clogged;
    Dunk_1 HAS PRECONDITIONS !Clogged;
    Dunk_1 CAUSES Defused IF In_1;
    Dunk_1 POSSIBLY CHANGES Clogged;
    ...
    INITIALLY !Defused;
    CONFORMANT Defused & !Clogged;

Formula operators by decreasing binding strength: `!`, `&`, `|`, `->` (right
associative), `<->`. `#` starts a comment that runs to the end of the line.
"""
import logging
import re
from dataclasses import dataclass, field
from typing import AbstractSet, Callable, Dict, Iterable, List, Mapping, Optional, Union

from utils.errors import ParseError

logger = logging.getLogger(__name__)

KEYWORDS = {
    "DOMAIN",
    "ACTIONS",
    "FLUENTS",
    "INERTIAL",
    "ALWAYS",
    "HAS",
    "PRECONDITIONS",
    "CAUSES",
    "IF",
    "POSSIBLY",
    "CHANGES",
    "INITIALLY",
    "CONFORMANT",
    "TRUE",
    "FALSE",
    "boolean",
}

TOKEN_RE = re.compile(
    r"(?P<space>[ \t\r]+)|(?P<newline>\n)|(?P<comment>#[^\n]*)"
    r"|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op><->|->|[;,:!&|()])"
)


@dataclass(frozen=True)
class SourceSpan:
    line: int
    column: int
    start: int
    end: int


@dataclass(frozen=True)
class Token:
    kind: str  # ident, keyword, op, eof
    text: str
    span: SourceSpan


# ---------------------------------------------------------------------------
# formulas


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Var:
    name: str
    span: Optional[SourceSpan] = field(default=None, compare=False, repr=False)


@dataclass(frozen=True)
class Not:
    arg: "Formula"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of & | -> <->
    left: "Formula"
    right: "Formula"


Formula = Union[Const, Var, Not, BinOp]

TRUE = Const(True)
FALSE = Const(False)

PRECEDENCE = {"<->": 1, "->": 2, "|": 3, "&": 4}


def conjoin(formulas: Iterable[Formula]) -> Formula:
    result: Optional[Formula] = None
    for f in formulas:
        result = f if result is None else BinOp("&", result, f)
    return TRUE if result is None else result


def disjoin(formulas: Iterable[Formula]) -> Formula:
    result: Optional[Formula] = None
    for f in formulas:
        result = f if result is None else BinOp("|", result, f)
    return FALSE if result is None else result


def fluents_of(formula: Formula) -> List[Var]:
    """Variable occurrences of a formula, left to right"""
    found: List[Var] = []
    stack = [formula]
    while stack:
        f = stack.pop()
        if isinstance(f, Var):
            found.append(f)
        elif isinstance(f, Not):
            stack.append(f.arg)
        elif isinstance(f, BinOp):
            stack.append(f.right)
            stack.append(f.left)
    return found


def evaluate(formula: Formula, state: AbstractSet[str]) -> bool:
    """Truth value of formula in the state whose true fluents are `state`"""
    if isinstance(formula, Const):
        return formula.value
    if isinstance(formula, Var):
        return formula.name in state
    if isinstance(formula, Not):
        return not evaluate(formula.arg, state)
    left = evaluate(formula.left, state)
    if formula.op == "&":
        return left and evaluate(formula.right, state)
    if formula.op == "|":
        return left or evaluate(formula.right, state)
    if formula.op == "->":
        return (not left) or evaluate(formula.right, state)
    return left == evaluate(formula.right, state)


def bitmask_predicate(formula: Formula, positions: Mapping[str, int]) -> Callable[[int], bool]:
    """Compile formula to a test over states packed as integers (bit k = fluent k)"""
    if isinstance(formula, Const):
        value = formula.value
        return lambda s: value
    if isinstance(formula, Var):
        bit = 1 << positions[formula.name]
        return lambda s: bool(s & bit)
    if isinstance(formula, Not):
        arg = bitmask_predicate(formula.arg, positions)
        return lambda s: not arg(s)
    left = bitmask_predicate(formula.left, positions)
    right = bitmask_predicate(formula.right, positions)
    if formula.op == "&":
        return lambda s: left(s) and right(s)
    if formula.op == "|":
        return lambda s: left(s) or right(s)
    if formula.op == "->":
        return lambda s: (not left(s)) or right(s)
    return lambda s: left(s) == right(s)


# ---------------------------------------------------------------------------
# domain description


@dataclass(frozen=True)
class CausalRule:
    fluent: str
    positive: bool
    condition: Formula = TRUE


@dataclass
class ActionEffects:
    preconditions: List[Formula] = field(default_factory=list)
    causes: List[CausalRule] = field(default_factory=list)
    possibly_changes: List[str] = field(default_factory=list)

    @property
    def precondition(self) -> Formula:
        return conjoin(self.preconditions)


@dataclass
class DomainAst:
    name: str
    actions: List[str]
    fluents: List[str]
    inertial: List[str]
    always: List[Formula]
    effects: Dict[str, ActionEffects]
    initially: Formula
    goal: Formula
    spans: Dict[str, SourceSpan] = field(default_factory=dict, compare=False, repr=False)

    def effects_of(self, action: str) -> ActionEffects:
        return self.effects.get(action) or ActionEffects()

    @property
    def state_constraint(self) -> Formula:
        return conjoin(self.always)


# ---------------------------------------------------------------------------
# lexer and parser


def tokenize(text: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = TOKEN_RE.match(text, pos)
        if m is None:
            span = SourceSpan(line, pos - line_start + 1, pos, pos + 1)
            raise ParseError(f"unexpected character {text[pos]!r}", span)
        kind = m.lastgroup
        span = SourceSpan(line, pos - line_start + 1, pos, m.end())
        if kind == "newline":
            line += 1
            line_start = m.end()
        elif kind == "ident":
            word = m.group()
            tokens.append(Token("keyword" if word in KEYWORDS else "ident", word, span))
        elif kind == "op":
            tokens.append(Token("op", m.group(), span))
        pos = m.end()
    tokens.append(Token("eof", "", SourceSpan(line, pos - line_start + 1, pos, pos)))
    return tokens


class Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.pos = 0
        self.spans: Dict[str, SourceSpan] = {}
        self.kinds: Dict[str, str] = {}
        self.references: List[tuple] = []  # (name, kind, span)

    # token helpers

    @property
    def current(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        token = self.tokens[self.pos]
        if token.kind != "eof":
            self.pos += 1
        return token

    def at(self, text: str) -> bool:
        return self.current.kind in ("keyword", "op") and self.current.text == text

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.current.text or "end of file"
            raise ParseError(f"expected '{text}' but found '{found}'", self.current.span)
        return self.advance()

    def expect_ident(self) -> Token:
        if self.current.kind != "ident":
            found = self.current.text or "end of file"
            raise ParseError(f"expected an identifier but found '{found}'", self.current.span)
        return self.advance()

    def ident_list(self) -> List[Token]:
        names = [self.expect_ident()]
        while self.at(","):
            self.advance()
            names.append(self.expect_ident())
        return names

    # grammar

    def parse(self) -> DomainAst:
        self.expect("DOMAIN")
        name = self.expect_ident().text
        actions: List[str] = []
        fluents: List[str] = []
        inertial: List[str] = []
        always: List[Formula] = []
        effects: Dict[str, ActionEffects] = {}
        initially: Optional[Formula] = None
        goal: Optional[Formula] = None

        while self.current.kind != "eof":
            token = self.current
            if self.at("ACTIONS"):
                self.advance()
                for t in self.ident_list():
                    self.declare(t, "action")
                    actions.append(t.text)
                self.expect(";")
            elif self.at("FLUENTS"):
                self.advance()
                declared = self.ident_list()
                self.expect(":")
                self.expect("boolean")
                self.expect(";")
                for t in declared:
                    self.declare(t, "fluent")
                    fluents.append(t.text)
            elif self.at("INERTIAL"):
                self.advance()
                for t in self.ident_list():
                    if t.text in inertial:
                        raise ParseError(f"fluent '{t.text}' is listed INERTIAL twice", t.span)
                    self.refer(t, "fluent")
                    inertial.append(t.text)
                self.expect(";")
            elif self.at("ALWAYS"):
                self.advance()
                always.append(self.formula())
                self.expect(";")
            elif self.at("INITIALLY"):
                if initially is not None:
                    raise ParseError("duplicate INITIALLY clause", token.span)
                self.advance()
                initially = self.formula()
                self.spans["INITIALLY"] = token.span
                self.expect(";")
            elif self.at("CONFORMANT"):
                if goal is not None:
                    raise ParseError("duplicate CONFORMANT clause", token.span)
                self.advance()
                goal = self.formula()
                self.spans["CONFORMANT"] = token.span
                self.expect(";")
            elif token.kind == "ident":
                self.rule(effects)
            else:
                raise ParseError(f"unexpected '{token.text}'", token.span)

        end = self.current.span
        if initially is None:
            raise ParseError("missing INITIALLY clause", end)
        if goal is None:
            raise ParseError("missing CONFORMANT clause", end)
        for ref_name, kind, span in self.references:
            if self.kinds.get(ref_name) != kind:
                raise ParseError(f"undeclared {kind} '{ref_name}'", span)
        return DomainAst(
            name=name,
            actions=actions,
            fluents=fluents,
            inertial=inertial,
            always=always,
            effects={a: effects[a] for a in actions if a in effects},
            initially=initially,
            goal=goal,
            spans=self.spans,
        )

    def declare(self, token: Token, kind: str):
        if token.text in self.kinds:
            raise ParseError(f"'{token.text}' is already declared", token.span)
        self.kinds[token.text] = kind
        self.spans[token.text] = token.span

    def refer(self, token: Token, kind: str):
        self.references.append((token.text, kind, token.span))

    def rule(self, effects: Dict[str, ActionEffects]):
        action = self.advance()
        self.refer(action, "action")
        entry = effects.setdefault(action.text, ActionEffects())
        if self.at("HAS"):
            self.advance()
            self.expect("PRECONDITIONS")
            entry.preconditions.append(self.formula())
        elif self.at("CAUSES"):
            self.advance()
            positive = True
            if self.at("!"):
                self.advance()
                positive = False
            target = self.expect_ident()
            self.refer(target, "fluent")
            condition: Formula = TRUE
            if self.at("IF"):
                self.advance()
                condition = self.formula()
            entry.causes.append(CausalRule(target.text, positive, condition))
        elif self.at("POSSIBLY"):
            self.advance()
            self.expect("CHANGES")
            for t in self.ident_list():
                self.refer(t, "fluent")
                if t.text not in entry.possibly_changes:
                    entry.possibly_changes.append(t.text)
        else:
            found = self.current.text or "end of file"
            raise ParseError(
                f"expected HAS PRECONDITIONS, CAUSES or POSSIBLY CHANGES after '{action.text}', "
                f"found '{found}'",
                self.current.span,
            )
        self.expect(";")

    def formula(self) -> Formula:
        left = self.implication()
        while self.at("<->"):
            self.advance()
            left = BinOp("<->", left, self.implication())
        return left

    def implication(self) -> Formula:
        left = self.disjunction()
        if self.at("->"):
            self.advance()
            return BinOp("->", left, self.implication())
        return left

    def disjunction(self) -> Formula:
        left = self.conjunction()
        while self.at("|"):
            self.advance()
            left = BinOp("|", left, self.conjunction())
        return left

    def conjunction(self) -> Formula:
        left = self.unary()
        while self.at("&"):
            self.advance()
            left = BinOp("&", left, self.unary())
        return left

    def unary(self) -> Formula:
        if self.at("!"):
            self.advance()
            return Not(self.unary())
        if self.at("("):
            self.advance()
            inner = self.formula()
            self.expect(")")
            return inner
        if self.at("TRUE"):
            self.advance()
            return TRUE
        if self.at("FALSE"):
            self.advance()
            return FALSE
        token = self.expect_ident()
        self.refer(token, "fluent")
        return Var(token.text, token.span)


def parse(text: str) -> DomainAst:
    ast = Parser(text).parse()
    logger.debug(
        "parsed domain %s: %d actions, %d fluents", ast.name, len(ast.actions), len(ast.fluents)
    )
    return ast


def parse_file(path: str) -> DomainAst:
    with open(path, "r", encoding="utf-8") as fp:
        return parse(fp.read())


# ---------------------------------------------------------------------------
# printing


def format_formula(formula: Formula, parent: int = 0, right_side: bool = False) -> str:
    if isinstance(formula, Const):
        return "TRUE" if formula.value else "FALSE"
    if isinstance(formula, Var):
        return formula.name
    if isinstance(formula, Not):
        return "!" + format_formula(formula.arg, 5)
    prec = PRECEDENCE[formula.op]
    # "->" groups to the right, the rest to the left
    if formula.op == "->":
        left = format_formula(formula.left, prec + 1)
        right = format_formula(formula.right, prec)
    else:
        left = format_formula(formula.left, prec)
        right = format_formula(formula.right, prec + 1)
    text = f"{left} {formula.op} {right}"
    return f"({text})" if prec < parent else text


def format_domain(ast: DomainAst) -> str:
    lines = [f"DOMAIN {ast.name}"]
    if ast.actions:
        lines.append(f"ACTIONS {', '.join(ast.actions)};")
    if ast.fluents:
        lines.append(f"FLUENTS {', '.join(ast.fluents)} : boolean;")
    if ast.inertial:
        lines.append(f"INERTIAL {', '.join(ast.inertial)};")
    for constraint in ast.always:
        lines.append(f"ALWAYS {format_formula(constraint)};")
    for action in ast.actions:
        entry = ast.effects.get(action)
        if entry is None:
            continue
        for pre in entry.preconditions:
            lines.append(f"{action} HAS PRECONDITIONS {format_formula(pre)};")
        for rule in entry.causes:
            literal = rule.fluent if rule.positive else f"!{rule.fluent}"
            if rule.condition == TRUE:
                lines.append(f"{action} CAUSES {literal};")
            else:
                lines.append(f"{action} CAUSES {literal} IF {format_formula(rule.condition)};")
        for fluent in entry.possibly_changes:
            lines.append(f"{action} POSSIBLY CHANGES {fluent};")
    lines.append(f"INITIALLY {format_formula(ast.initially)};")
    lines.append(f"CONFORMANT {format_formula(ast.goal)};")
    return "\n".join(lines) + "\n"
