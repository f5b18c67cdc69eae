"""SQLite run ledger with WAL mode."""

from __future__ import annotations

import json
import os
import sqlite3
from collections.abc import Generator
from contextlib import contextmanager
from pathlib import Path
from typing import Any


def default_data_dir() -> Path:
    raw = os.environ.get("FLRWB_HOME")
    return Path(raw) if raw else Path.home() / ".flrw_boltzmann"


class Database:
    """Ledger of simulation runs and audit outcomes."""

    def __init__(self, data_dir: Path | None = None) -> None:
        self.data_dir = data_dir or default_data_dir()
        self.db_path = self.data_dir / "data" / "ledger.db"

    def _ensure_dirs(self) -> None:
        self.data_dir.mkdir(parents=True, exist_ok=True)
        (self.data_dir / "data").mkdir(exist_ok=True)

    @contextmanager
    def connect(self) -> Generator[sqlite3.Connection, None, None]:
        """Open the ledger in WAL mode; commit on exit, roll back on error."""
        self._ensure_dirs()
        conn = sqlite3.connect(str(self.db_path))
        conn.execute("PRAGMA journal_mode=WAL")
        conn.execute("PRAGMA busy_timeout=5000")  # concurrent runs share one ledger
        conn.row_factory = sqlite3.Row
        try:
            yield conn
            conn.commit()
        except Exception:
            conn.rollback()
            raise
        finally:
            conn.close()

    def ensure_tables(self) -> None:
        """Create the runs and audits tables; idempotent."""
        with self.connect() as conn:
            conn.executescript(_SCHEMA)

    def execute(self, sql: str, params: tuple[Any, ...] = ()) -> list[sqlite3.Row]:
        """Run one statement and return every row."""
        with self.connect() as conn:
            cursor = conn.execute(sql, params)
            return cursor.fetchall()

    def execute_insert(self, sql: str, params: tuple[Any, ...] = ()) -> int:
        """Run one INSERT and return the new row id."""
        with self.connect() as conn:
            cursor = conn.execute(sql, params)
            return cursor.lastrowid or 0

    # ─── Runs ───────────────────────────────────────────────────────────

    def record_run_start(self, run_id: str, config: dict[str, Any], output_path: str) -> int:
        return self.execute_insert(
            "INSERT INTO runs (run_id, config_json, status, output_path) VALUES (?, ?, ?, ?)",
            (run_id, json.dumps(config, sort_keys=True), "running", output_path),
        )

    def record_run_end(
        self,
        run_id: str,
        status: str,
        t_final: float,
        R_final: float,
        steps: int,
        wall_seconds: float,
    ) -> None:
        self.execute(
            "UPDATE runs SET status = ?, t_final = ?, R_final = ?, steps = ?, wall_seconds = ? "
            "WHERE run_id = ?",
            (status, t_final, R_final, steps, wall_seconds, run_id),
        )

    def recent_runs(self, limit: int = 20) -> list[sqlite3.Row]:
        return self.execute(
            "SELECT * FROM runs ORDER BY started_at DESC, id DESC LIMIT ?", (limit,)
        )

    # ─── Audits ─────────────────────────────────────────────────────────

    def record_audit(
        self,
        which: str,
        passed: bool,
        measured: dict[str, float],
        detail: list[dict[str, float]] | None = None,
    ) -> int:
        return self.execute_insert(
            "INSERT INTO audits (which, passed, measured, detail_json) VALUES (?, ?, ?, ?)",
            (
                which,
                int(passed),
                json.dumps(measured, sort_keys=True),
                json.dumps(detail or [], sort_keys=True),
            ),
        )

    def recent_audits(self, limit: int = 20) -> list[sqlite3.Row]:
        return self.execute("SELECT * FROM audits ORDER BY run_at DESC, id DESC LIMIT ?", (limit,))


_SCHEMA = """
CREATE TABLE IF NOT EXISTS schema_version (
    version INTEGER PRIMARY KEY,
    applied_at TEXT NOT NULL DEFAULT (datetime('now'))
);

CREATE TABLE IF NOT EXISTS runs (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    run_id TEXT UNIQUE NOT NULL,
    config_json TEXT NOT NULL,
    status TEXT NOT NULL DEFAULT 'running',
    t_final REAL,
    R_final REAL,
    steps INTEGER NOT NULL DEFAULT 0,
    wall_seconds REAL,
    output_path TEXT NOT NULL,
    started_at TEXT NOT NULL DEFAULT (datetime('now'))
);

CREATE TABLE IF NOT EXISTS audits (
    id INTEGER PRIMARY KEY AUTOINCREMENT,
    which TEXT NOT NULL,
    passed INTEGER NOT NULL,
    measured TEXT NOT NULL DEFAULT '{}',
    detail_json TEXT NOT NULL DEFAULT '[]',
    run_at TEXT NOT NULL DEFAULT (datetime('now'))
);

INSERT OR IGNORE INTO schema_version (version) VALUES (1);
"""
