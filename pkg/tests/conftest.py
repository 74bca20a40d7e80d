"""Shared fixtures and helpers.

The curated fixture in data/curated.json is small enough to check by
hand; every expected value asserted against it was derived directly
from the document, not by running the code under test.
"""

from __future__ import annotations

import csv
import json
import sqlite3
from pathlib import Path

import pytest

from jitscope import store
from jitscope.export import TABLE_LAYOUT
from jitscope.ingest import ResolvedDataset, assign_phases, parse_document

DATA = Path(__file__).parent / "data"

# Columns that hold text; everything else is an integer and the empty
# string means NULL.  No nullable text columns exist in the schema.
_TEXT_COLS = {"symbol", "name", "address", "initial_opcode", "mnemonic",
              "new_opcode", "value", "action", "key"}


def resolve_bytes(data: bytes) -> ResolvedDataset:
    doc, warnings = parse_document(data)
    return assign_phases(doc, warnings)


def resolve_dict(doc: dict) -> ResolvedDataset:
    return resolve_bytes(json.dumps(doc).encode("utf-8"))


@pytest.fixture(scope="session")
def curated_bytes() -> bytes:
    return (DATA / "curated.json").read_bytes()


@pytest.fixture(scope="session")
def curated_doc(curated_bytes) -> dict:
    return json.loads(curated_bytes)


@pytest.fixture(scope="session")
def curated(curated_bytes) -> ResolvedDataset:
    return resolve_bytes(curated_bytes)


@pytest.fixture()
def curated_db(curated, tmp_path) -> sqlite3.Connection:
    conn = store.open_database(tmp_path / "curated.db")
    store.load(curated, conn, source_name="curated.json",
               content_hash="deadbeef", ingested_at="2026-01-01T00:00:00+00:00")
    yield conn
    conn.close()


def import_csv_tables(csv_dir: Path, db_path: Path) -> sqlite3.Connection:
    """Rebuild a database from exported table CSVs (test-only inverse).

    Empty cells in integer columns become NULL; text columns keep the
    empty string.  Used to close the export round trip without going
    back through a trace document.
    """
    conn = store.open_database(db_path)
    conn.execute("PRAGMA foreign_keys = OFF")
    for stmt in store._SCHEMA:
        conn.execute(stmt)
    for table, (columns, _order) in TABLE_LAYOUT.items():
        with open(csv_dir / f"{table}.csv", encoding="utf-8", newline="") as f:
            reader = csv.reader(f)
            header = next(reader)
            assert tuple(header) == columns, table
            placeholders = ", ".join("?" for _ in columns)
            rows = []
            for raw in reader:
                row = []
                for col, cell in zip(columns, raw):
                    if col in _TEXT_COLS:
                        row.append(cell)
                    else:
                        row.append(int(cell) if cell != "" else None)
                rows.append(row)
            conn.executemany(
                f'INSERT INTO "{table}" VALUES ({placeholders})', rows)
    conn.execute("PRAGMA foreign_keys = ON")
    return conn
