from datetime import datetime
from typing import Any, Dict, List, Optional

from services.reports import SuiteReport
from utils.database import BenchHistoryDB

TIMESTAMP_FORMAT = "%Y-%m-%d %H:%M:%S"


class SuiteHistory:
    def __init__(self, db_path: str):
        self.db = BenchHistoryDB(db_path)
        self.db.setup_database()

    def record(self, report: SuiteReport, timestamp: Optional[str] = None) -> int:
        """Appends every row of a suite run

        Args:
            report (SuiteReport): The finished run
            timestamp (Optional[str], optional): Looks like "%Y-%m-%d %H:%M:%S". Defaults to now.

        Returns:
            int: Number of rows written
        """
        timestamp = timestamp or datetime.now().strftime(TIMESTAMP_FORMAT)
        for row in report.rows:
            self.db.execute_query(
                """
                INSERT INTO suite_runs (
                    timestamp, instance, family, outcome, length, status, bs_inserted, bs_hits, elapsed_ms
                ) VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)
                """,
                (
                    timestamp,
                    row.instance,
                    row.family,
                    row.outcome.value,
                    row.length,
                    row.status,
                    row.bs_inserted,
                    row.bs_hits,
                    row.elapsed_ms,
                ),
            )
        self.db.commit()
        return len(report.rows)

    def runs(self, family: Optional[str] = None, since: Optional[str] = None) -> List[Dict[str, Any]]:
        """Recorded rows, oldest first

        Args:
            family (Optional[str], optional): Only this benchmark family. Defaults to None.
            since (Optional[str], optional): Only runs at or after this timestamp. Defaults to None.
        """
        query = (
            "SELECT timestamp, instance, outcome, length, status, bs_inserted, bs_hits, elapsed_ms"
            " FROM suite_runs"
        )
        conditions = []
        params = []

        if family:
            conditions.append("family = ?")
            params.append(family.upper())

        if since:
            conditions.append("timestamp >= ?")
            params.append(since)

        if conditions:
            query += " WHERE " + " AND ".join(conditions)
        query += " ORDER BY timestamp, id"

        runs = []
        for result in self.db.fetch_all(query, tuple(params)):
            timestamp, instance, outcome, length, status, bs_inserted, bs_hits, elapsed_ms = result
            runs.append(
                {
                    "timestamp": timestamp,
                    "instance": instance,
                    "outcome": outcome,
                    "length": length,
                    "status": status,
                    "bs_inserted": bs_inserted,
                    "bs_hits": bs_hits,
                    "elapsed_ms": elapsed_ms,
                }
            )
        return runs

    def close(self):
        self.db.close()
