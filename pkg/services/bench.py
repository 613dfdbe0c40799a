"""Expected results for the benchmark families and the suite runner.

The registry holds the published outcome and plan length of every benchmark
instance. Lengths of the SQUARE/CUBE face and center goals depend on which
cell is taken as the middle of an even side; those rows use the cell
ceil(n/2) and are also checked against the explicit search.
"""
import logging
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from services.compiler import compile_domain, validate
from services.generators import FamilySpec, build, normalize
from services.oracle import DEFAULT_BOUND, oracle_search
from services.planner import PlannerOptions, conformant_plan, verify_plan
from services.reports import Outcome, SuiteReport, SuiteRow
from utils.config import EngineSettings
from utils.errors import CmbpError, OracleBoundExceeded, UnknownInstanceError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExpectedRecord:
    spec: FamilySpec
    outcome: Outcome
    length: Optional[int]
    source: str


def _rows(
    family: str,
    lengths: Dict[int, Optional[int]],
    source: str,
    variant: Optional[str] = None,
    extra: Tuple[int, ...] = (),
    outcome: Outcome = Outcome.PLAN,
):
    return [
        ExpectedRecord(
            FamilySpec(family, (n,) + extra, variant),
            outcome,
            length,
            source,
        )
        for n, length in lengths.items()
    ]


def _registry() -> Dict[FamilySpec, ExpectedRecord]:
    records: List[ExpectedRecord] = []
    records += _rows(
        "BT", {2: 2, 3: 3, 4: 4, 5: 5, 6: 6, 7: 7, 8: 8, 9: 9, 10: 10}, "published BT lengths"
    )
    records += _rows(
        "BTC",
        {2: 3, 3: 5, 4: 7, 5: 9, 6: 11, 7: 13, 8: 15, 9: 17, 10: 19, 16: 31},
        "published BTC lengths",
    )
    records += _rows(
        "BTUC",
        {2: 3, 3: 5, 4: 7, 5: 9, 6: 11, 7: 13, 8: 15, 9: 17, 10: 19, 16: 31},
        "published BTUC lengths",
    )
    records.append(
        ExpectedRecord(FamilySpec("BTUC", (2,), "uncertain"), Outcome.PLAN, 5, "worked example")
    )

    # low uncertainty: toilets -> {packages: length}
    bmtc_low = {
        2: [2, 4, 6, 8, 10, 12, 14, 16, 18],
        3: [2, 3, 5, 7, 9, 11, 13, 15, 17],
        4: [2, 3, 4, 6, 8, 10, 12, 14, 16],
        5: [2, 3, 4, 5, 7, 9, 11, 13, 15],
        6: [2, 3, 4, 5, 6, 8, 10, 12, 14],
    }
    for toilets, lengths in bmtc_low.items():
        for p, length in zip(range(2, 11), lengths):
            records.append(
                ExpectedRecord(
                    FamilySpec("BMTC", (p, toilets), "low"),
                    Outcome.PLAN,
                    length,
                    "published BMTC low-uncertainty lengths",
                )
            )
    # no published length; checked by the explicit search
    for variant in ("mid", "high"):
        for p in range(2, 5):
            for toilets in (2, 3):
                records.append(
                    ExpectedRecord(
                        FamilySpec("BMTC", (p, toilets), variant),
                        Outcome.PLAN,
                        None,
                        f"BMTC {variant} uncertainty, length unpublished",
                    )
                )

    ring = {2: 5, 3: 8, 4: 11, 5: 14, 6: 17, 7: 20, 8: 23, 9: 26, 10: 29}
    records += _rows("RING", ring, "published RING lengths")
    records += _rows("URING", ring, "published URING lengths")
    for noise in range(1, 6):
        records += _rows("NDRING", ring, "published NDRING lengths", extra=(noise,))

    records += _rows(
        "SQUARE",
        {2: 2, 4: 6, 6: 10, 8: 14, 10: 18, 12: 22, 14: 26, 16: 30, 18: 34, 20: 38},
        "published SQUARE corner lengths",
        variant="corner",
    )
    records += _rows(
        "SQUARE",
        {2: 2, 4: 7, 6: 12, 8: 17, 10: 22, 12: 27, 14: 32, 16: 37, 18: 42, 20: 47},
        "SQUARE face lengths under the ceil(n/2) middle-cell convention, oracle-checked",
        variant="face",
    )
    records += _rows(
        "SQUARE",
        {2: 2, 4: 8, 6: 14, 8: 20, 10: 26, 12: 32, 14: 38, 16: 44, 18: 50, 20: 56},
        "SQUARE center lengths under the ceil(n/2) middle-cell convention, oracle-checked",
        variant="center",
    )
    records += _rows(
        "CUBE",
        {2: 3, 3: 6, 4: 9, 5: 12, 6: 15, 7: 18, 8: 21, 9: 24, 10: 27, 15: 42},
        "published CUBE corner lengths",
        variant="corner",
    )
    records += _rows(
        "CUBE",
        {2: 3, 4: 11, 6: 19, 8: 27, 10: 35},
        "CUBE face lengths under the ceil(n/2) middle-cell convention, oracle-checked",
        variant="face",
    )
    records += _rows(
        "CUBE",
        {2: 3, 4: 12, 6: 21, 8: 30, 10: 39},
        "CUBE center lengths under the ceil(n/2) middle-cell convention, oracle-checked",
        variant="center",
    )
    records += _rows(
        "OMELETTE",
        {i: None for i in (3, 4, 5, 6, 7, 8, 9, 10, 15, 20, 30)},
        "published OMELETTE results",
        outcome=Outcome.FAIL,
    )
    return {record.spec: record for record in records}


REGISTRY: Dict[FamilySpec, ExpectedRecord] = _registry()


def expected(spec: FamilySpec) -> ExpectedRecord:
    try:
        return REGISTRY[normalize(spec)]
    except KeyError:
        raise UnknownInstanceError(f"no expected result recorded for {spec}") from None


@dataclass
class SuiteFilter:
    family: Optional[str] = None
    min: Optional[int] = None
    max: Optional[int] = None
    variant: Optional[str] = None

    def matches(self, record: ExpectedRecord) -> bool:
        spec = record.spec
        if self.family is None or spec.family != self.family.upper():
            return False
        size = spec.params[0]
        if self.min is not None and size < self.min:
            return False
        if self.max is not None and size > self.max:
            return False
        return self.variant is None or spec.variant == self.variant.lower()


@dataclass
class SuiteBudget:
    max_depth: int = 0
    with_oracle: bool = False
    oracle_bound: int = DEFAULT_BOUND
    oracle_max_fluents: int = 12
    engine: EngineSettings = field(default_factory=EngineSettings)


def select(suite_filter: Optional[SuiteFilter]) -> List[ExpectedRecord]:
    if suite_filter is None or suite_filter.family is None:
        return []
    family = suite_filter.family.upper()
    if not any(spec.family == family for spec in REGISTRY):
        raise UnknownInstanceError(f"unknown benchmark family '{suite_filter.family}'")
    chosen = [r for r in REGISTRY.values() if suite_filter.matches(r)]
    return sorted(chosen, key=lambda r: (r.spec.variant or "", r.spec.params))


def run_instance(record: ExpectedRecord, budget: SuiteBudget) -> SuiteRow:
    spec = record.spec
    start = time.perf_counter()
    row = {
        "instance": str(spec),
        "family": spec.family,
        "params": spec.params,
        "variant": spec.variant,
        "expected_outcome": record.outcome,
        "expected_length": record.length,
        "source": record.source,
    }
    try:
        ast = validate(build(spec))
        dom = compile_domain(ast, settings=budget.engine)
        report = conformant_plan(dom, PlannerOptions(max_depth=budget.max_depth))
    except CmbpError as e:
        logger.warning("%s could not be planned: %s", spec, e)
        return SuiteRow(
            **row,
            outcome=Outcome.UNKNOWN,
            status="unknown",
            elapsed_ms=(time.perf_counter() - start) * 1000.0,
        )

    row.update(
        outcome=report.outcome,
        length=report.length,
        bs_inserted=report.bs_inserted,
        bs_hits=report.bs_hits,
        elapsed_ms=report.elapsed_ms,
    )
    sound = report.plan is None or verify_plan(dom, report.plan).conformant

    oracle = None
    if budget.with_oracle and len(ast.fluents) <= budget.oracle_max_fluents:
        try:
            oracle = oracle_search(ast, bound=budget.oracle_bound)
            row.update(oracle_outcome=oracle.outcome.value, oracle_length=oracle.length)
        except OracleBoundExceeded:
            row.update(oracle_outcome="INCONCLUSIVE")
    oracle_agrees = oracle is None or (
        oracle.outcome == report.outcome and oracle.length == report.length
    )

    if report.outcome == Outcome.UNKNOWN:
        status = "unknown"
    elif not sound or not oracle_agrees:
        status = "mismatch"
    elif record.outcome == Outcome.PLAN and record.length is None:
        status = "oracle-only" if oracle is not None else "unknown"
    elif report.outcome == record.outcome and report.length == record.length:
        status = "match"
    else:
        status = "mismatch"
    logger.info(
        "%s: %s length %s, expected %s %s -> %s",
        spec,
        report.outcome.value,
        report.length,
        record.outcome.value,
        record.length,
        status,
    )
    return SuiteRow(**row, status=status)


def run_suite(
    suite_filter: Optional[SuiteFilter], budget: Optional[SuiteBudget] = None
) -> SuiteReport:
    """Plan every registry instance the filter selects and compare with the
    recorded result. Failures end up in the rows, nothing is raised per instance."""
    budget = budget or SuiteBudget()
    return SuiteReport(rows=[run_instance(r, budget) for r in select(suite_filter)])
