import logging
import sqlite3
from sqlite3 import Cursor
from typing import Any, List

logger = logging.getLogger(__name__)


class SQLiteDB:
    def __init__(self, db_name: str, *args, **kwargs):
        self.db_name = db_name
        self.conn = sqlite3.connect(db_name, *args, **kwargs)
        self.cursor = self.conn.cursor()

    def execute_query(self, query: str, params: tuple = ()) -> Cursor:
        return self.cursor.execute(query, params)

    def fetch_one(self, query: str, params: tuple = ()) -> Any:
        self.execute_query(query, params)
        return self.cursor.fetchone()

    def fetch_all(self, query: str, params: tuple = ()) -> List[Any]:
        self.execute_query(query, params)
        return self.cursor.fetchall()

    def commit(self):
        self.conn.commit()

    def close(self):
        self.conn.close()


class BenchHistoryDB(SQLiteDB):
    def __init__(self, db_name: str = "bench_history.db", *args, **kwargs):
        super().__init__(db_name, *args, **kwargs)

    def setup_database(self):
        self.execute_query(
            """
            CREATE TABLE IF NOT EXISTS suite_runs (
                id INTEGER PRIMARY KEY AUTOINCREMENT,
                timestamp DATETIME,
                instance TEXT,
                family TEXT,
                outcome TEXT,
                length INTEGER,
                status TEXT,
                bs_inserted INTEGER,
                bs_hits INTEGER,
                elapsed_ms REAL
            )
            """
        )
        self.commit()
        logger.debug("suite history database %s ready", self.db_name)
