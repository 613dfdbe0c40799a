import dataclasses

import pytest

from services.lang import (
    FALSE,
    TRUE,
    BinOp,
    CausalRule,
    Not,
    Var,
    evaluate,
    format_domain,
    format_formula,
    parse,
    parse_file,
    tokenize,
)
from utils.errors import DomainLanguageError, ParseError

MINIMAL = """
DOMAIN Tiny
ACTIONS Go;
FLUENTS At : boolean;
INERTIAL At;
Go CAUSES At;
INITIALLY !At;
CONFORMANT At;
"""


def formula_of(text):
    return parse(MINIMAL.replace("CONFORMANT At;", f"FLUENTS P, Q, R : boolean;\nCONFORMANT {text};")).goal


def test_parse_fixture(btuc_ast):
    ast = btuc_ast
    assert ast.name == "BTUC"
    assert ast.actions == ["Dunk_1", "Dunk_2", "Flush"]
    assert ast.fluents == ["In_1", "In_2", "Defused", "Clogged"]
    assert ast.inertial == ["Clogged", "Defused", "In_1", "In_2"]
    assert ast.always == [BinOp("<->", Var("In_1"), Not(Var("In_2")))]
    dunk = ast.effects["Dunk_1"]
    assert dunk.preconditions == [Not(Var("Clogged"))]
    assert dunk.causes == [CausalRule("Defused", True, Var("In_1"))]
    assert dunk.possibly_changes == ["Clogged"]
    assert ast.effects["Flush"].causes == [CausalRule("Clogged", False, TRUE)]
    assert ast.initially == Not(Var("Defused"))
    assert ast.goal == BinOp("&", Var("Defused"), Not(Var("Clogged")))


def test_parse_file(btuc_path, btuc_ast):
    assert parse_file(btuc_path) == btuc_ast


def test_operator_precedence():
    # ! binds tighter than &, & tighter than |, | tighter than ->, -> tighter than <->
    assert formula_of("!P & Q | R") == BinOp("|", BinOp("&", Not(Var("P")), Var("Q")), Var("R"))
    assert formula_of("P -> Q -> R") == BinOp("->", Var("P"), BinOp("->", Var("Q"), Var("R")))
    assert formula_of("P | Q <-> R") == BinOp("<->", BinOp("|", Var("P"), Var("Q")), Var("R"))
    assert formula_of("P & (Q | R)") == BinOp("&", Var("P"), BinOp("|", Var("Q"), Var("R")))
    assert formula_of("TRUE & !FALSE") == BinOp("&", TRUE, Not(FALSE))


def test_format_formula_round_trip():
    texts = ["!P & Q | R", "P -> Q -> R", "(P -> Q) -> R", "!(P & Q) <-> R", "P & (Q | !R)", "TRUE"]
    for text in texts:
        formula = formula_of(text)
        assert formula_of(format_formula(formula)) == formula
    assert format_formula(formula_of("(P -> Q) -> R")) == "(P -> Q) -> R"
    assert format_formula(formula_of("P -> (Q -> R)")) == "P -> Q -> R"


def test_format_domain_round_trip(btuc_ast):
    text = format_domain(btuc_ast)
    assert parse(text) == btuc_ast
    assert format_domain(parse(text)) == text


def test_preconditions_conjoin():
    text = MINIMAL.replace("Go CAUSES At;", "Go HAS PRECONDITIONS !At;\nGo HAS PRECONDITIONS TRUE;\nGo CAUSES At;")
    ast = parse(text)
    assert ast.effects["Go"].precondition == BinOp("&", Not(Var("At")), TRUE)


def test_possibly_changes_list():
    text = MINIMAL.replace(
        "FLUENTS At : boolean;", "FLUENTS At, Lit, Warm : boolean;"
    ).replace("Go CAUSES At;", "Go POSSIBLY CHANGES Lit, Warm;")
    assert parse(text).effects["Go"].possibly_changes == ["Lit", "Warm"]


def test_comments_and_whitespace_are_ignored():
    commented = "# heading\n" + MINIMAL.replace("Go CAUSES At;", "Go   CAUSES\tAt; # trailing")
    assert parse(commented) == parse(MINIMAL)


def test_evaluate():
    formula = formula_of("P -> Q <-> !R")
    assert evaluate(formula, {"P", "Q"}) is True
    assert evaluate(formula, {"P"}) is False
    assert evaluate(formula, {"P", "R"}) is True
    assert evaluate(TRUE, set()) is True


@pytest.mark.parametrize(
    "text, fragment, line",
    [
        (MINIMAL.replace("Go CAUSES At;", "Go CAUSES Away;"), "undeclared fluent 'Away'", 6),
        (MINIMAL.replace("Go CAUSES At;", "Stay CAUSES At;"), "undeclared action 'Stay'", 6),
        (MINIMAL.replace("INERTIAL At;", "INERTIAL At, At;"), "INERTIAL twice", 5),
        (MINIMAL.replace("ACTIONS Go;", "ACTIONS Go, Go;"), "already declared", 3),
        (MINIMAL.replace("ACTIONS Go;", "ACTIONS At;"), "already declared", 4),
        (MINIMAL + "INITIALLY At;\n", "duplicate INITIALLY", 9),
        (MINIMAL + "CONFORMANT At;\n", "duplicate CONFORMANT", 9),
        (MINIMAL.replace("INITIALLY !At;", ""), "missing INITIALLY", 9),
        (MINIMAL.replace("CONFORMANT At;", ""), "missing CONFORMANT", 9),
        (MINIMAL.replace("Go CAUSES At;", "Go CAUSES At"), "expected ';'", 7),
        (MINIMAL.replace("Go CAUSES At;", "Go MAKES At;"), "expected HAS PRECONDITIONS", 6),
        (MINIMAL.replace("INITIALLY !At;", "INITIALLY !At $;"), "unexpected character", 7),
        (MINIMAL.replace("CONFORMANT At;", "CONFORMANT (At;"), "expected ')'", 8),
    ],
)
def test_parse_errors(text, fragment, line):
    with pytest.raises(ParseError) as info:
        parse(text)
    assert fragment in str(info.value)
    assert info.value.span is not None
    assert info.value.span.line == line
    assert str(info.value).startswith(f"line {line}, column ")


def test_parse_error_is_a_domain_language_error():
    with pytest.raises(DomainLanguageError):
        parse("DOMAIN")


def test_tokenize_spans():
    tokens = tokenize("DOMAIN X\n  ACTIONS a;")
    actions = tokens[2]
    assert (actions.kind, actions.text) == ("keyword", "ACTIONS")
    assert (actions.span.line, actions.span.column) == (2, 3)
    assert tokens[-1].kind == "eof"


def test_spans_are_not_compared(btuc_text, btuc_ast):
    shifted = parse("\n\n" + btuc_text)
    assert shifted == btuc_ast
    assert shifted.spans["INITIALLY"].line == btuc_ast.spans["INITIALLY"].line + 2
    assert dataclasses.replace(shifted, name="Other") != btuc_ast
