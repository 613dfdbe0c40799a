import pytest

from utils.util import format_belief, format_elapsed, format_plan, parse_plan


@pytest.mark.parametrize(
    "elapsed_ms, text",
    [
        (12.34, "12.3 ms"),
        (1500, "1.50 seconds"),
        (61_000, "1 minute, 1.00 seconds"),
        (7_325_500, "2 hours, 2 minutes, 5.50 seconds"),
    ],
)
def test_format_elapsed(elapsed_ms, text):
    assert format_elapsed(elapsed_ms) == text


def test_format_plan():
    assert format_plan(None) == "-"
    assert format_plan([]) == "(empty plan)"
    assert format_plan(["Flush", "Dunk_1"]) == "Flush;Dunk_1"


def test_parse_plan():
    assert parse_plan(" Flush ;Dunk_1; ") == ["Flush", "Dunk_1"]
    assert parse_plan("") == []


def test_format_belief():
    belief = {frozenset({"In_2", "Clogged"}), frozenset({"In_1"})}
    assert format_belief(belief) == [["Clogged", "In_2"], ["In_1"]]
