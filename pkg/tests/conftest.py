import os
import random

import pytest

from services.compiler import compile_domain, validate
from services.lang import parse

FIXTURES = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "fixtures")

# the shortest conformant plan of the uncertain-clogging fixture
BTUC_PLAN = ["Flush", "Dunk_1", "Flush", "Dunk_2", "Flush"]


@pytest.fixture
def btuc_plan():
    return list(BTUC_PLAN)


@pytest.fixture
def btuc_path() -> str:
    return os.path.join(FIXTURES, "btuc.ar")


@pytest.fixture
def btuc_text(btuc_path) -> str:
    with open(btuc_path, "r", encoding="utf-8") as fp:
        return fp.read()


@pytest.fixture
def btuc_ast(btuc_text):
    return validate(parse(btuc_text))


@pytest.fixture
def btuc_domain(btuc_ast):
    return compile_domain(btuc_ast)


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20240601)


@pytest.fixture(autouse=True)
def no_table_override(monkeypatch):
    monkeypatch.delenv("CMBP_UNIQUE_TABLE_BITS", raising=False)
