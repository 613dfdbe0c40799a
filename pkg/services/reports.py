from enum import Enum
from typing import Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict

REPORT_VERSION = 1


class Outcome(str, Enum):
    PLAN = "PLAN"
    FAIL = "FAIL"
    UNKNOWN = "UNKNOWN"


class LevelStats(BaseModel):
    model_config = ConfigDict(frozen=True)

    level: int
    relation_nodes: int
    plans_kept: int


class SearchReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance: str
    outcome: Outcome
    plans: List[List[str]] = []
    level: int
    bs_inserted: int
    bs_hits: int
    levels: List[LevelStats]
    elapsed_ms: float
    store_stats: Dict[str, int] = {}

    @property
    def plan(self) -> Optional[List[str]]:
        return self.plans[0] if self.plans else None

    @property
    def length(self) -> Optional[int]:
        return self.level if self.outcome == Outcome.PLAN else None

    def document(self, command: str = "plan") -> "PlanDocument":
        return PlanDocument(
            command=command,
            instance=self.instance,
            outcome=self.outcome,
            plan=self.plan,
            plans=self.plans,
            length=self.length,
            levels=self.levels,
            bs_inserted=self.bs_inserted,
            bs_hits=self.bs_hits,
            elapsed_ms=self.elapsed_ms,
        )


class PlanDocument(BaseModel):
    version: int = REPORT_VERSION
    command: str = "plan"
    instance: str
    outcome: Outcome
    plan: Optional[List[str]] = None
    plans: List[List[str]] = []
    length: Optional[int] = None
    levels: List[LevelStats] = []
    bs_inserted: int = 0
    bs_hits: int = 0
    elapsed_ms: float = 0.0


class VerifyDocument(BaseModel):
    version: int = REPORT_VERSION
    command: str = "verify"
    instance: str
    conformant: bool
    plan: List[str]
    # one entry per belief state, each state the sorted list of its true fluents
    trace: List[List[List[str]]]


class OracleResult(BaseModel):
    model_config = ConfigDict(frozen=True)

    instance: str = ""
    outcome: Outcome
    length: Optional[int] = None
    plan: Optional[List[str]] = None
    expanded: int = 0


class OracleDocument(BaseModel):
    version: int = REPORT_VERSION
    command: str = "oracle"
    instance: str
    # PLAN, FAIL or INCONCLUSIVE when the expansion bound was hit
    outcome: str
    plan: Optional[List[str]] = None
    length: Optional[int] = None
    expanded: int = 0
    elapsed_ms: float = 0.0


class SuiteRow(BaseModel):
    instance: str
    family: str
    params: Tuple[int, ...]
    variant: Optional[str] = None
    expected_outcome: Optional[Outcome] = None
    expected_length: Optional[int] = None
    source: Optional[str] = None
    outcome: Outcome
    length: Optional[int] = None
    # match, mismatch, unknown or oracle-only
    status: str
    bs_inserted: int = 0
    bs_hits: int = 0
    elapsed_ms: float = 0.0
    oracle_outcome: Optional[str] = None
    oracle_length: Optional[int] = None


class SuiteReport(BaseModel):
    version: int = REPORT_VERSION
    command: str = "bench"
    rows: List[SuiteRow] = []

    @property
    def passed(self) -> bool:
        return all(row.status in ("match", "oracle-only") for row in self.rows)

    def render_table(self) -> str:
        headers = ["instance", "expected", "outcome", "length", "status", "#BS", "#BSH", "ms", "oracle"]
        body = []
        for row in self.rows:
            expected = "-"
            if row.expected_outcome is not None:
                expected = row.expected_outcome.value
                if row.expected_length is not None:
                    expected += f" {row.expected_length}"
            oracle = "-"
            if row.oracle_outcome is not None:
                oracle = row.oracle_outcome
                if row.oracle_length is not None:
                    oracle += f" {row.oracle_length}"
            body.append(
                [
                    row.instance,
                    expected,
                    row.outcome.value,
                    "-" if row.length is None else str(row.length),
                    row.status,
                    str(row.bs_inserted),
                    str(row.bs_hits),
                    f"{row.elapsed_ms:.1f}",
                    oracle,
                ]
            )
        widths = [max(len(r[k]) for r in [headers] + body) for k in range(len(headers))]
        lines = ["  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip() for r in [headers] + body]
        return "\n".join(lines) + "\n"
