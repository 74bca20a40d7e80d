"""Deterministic CSV export.

Byte-for-byte reproducible: fixed column order per table, rows ordered
by primary key, LF line endings, UTF-8 without BOM, minimal quoting.
NULL serializes as the empty string and booleans as 0/1, which keeps a
re-import lossless.  Text builders are separate from file writers so
the serving layer can stream the same bytes.
"""

from __future__ import annotations

import csv
import io
import sqlite3
from pathlib import Path

from . import engine
from .errors import JitscopeError
from .ingest import ResolvedDataset

# table -> (columns in schema order, primary key to sort on)
TABLE_LAYOUT: dict[str, tuple[tuple[str, ...], str]] = {
    "functions": (("func_id", "symbol"), "func_id"),
    "phases": (("phase_id", "name", "ordinal", "func_id_start",
                "func_id_end"), "phase_id"),
    "nodes": (("node_id", "address", "initial_opcode", "mnemonic", "alive",
               "created_phase", "removed_phase"), "node_id"),
    "instructions": (("instr_id", "func_id", "phase_id"), "instr_id"),
    "node_accesses": (("access_id", "node_id", "instr_id"), "access_id"),
    "opcode_updates": (("update_id", "node_id", "new_opcode", "instr_id"),
                       "update_id"),
    "value_updates": (("update_id", "node_id", "value", "instr_id"),
                      "update_id"),
    "edge_events": (("event_id", "src_node_id", "action", "dst_node_id",
                     "old_dst_node_id", "instr_id"), "event_id"),
    "phase_summaries": (("phase_id", "name", "generated", "removed",
                         "opcode_updates", "value_updates", "edge_adds",
                         "edge_removes", "edge_replaces"), "phase_id"),
    "ingest_meta": (("key", "value"), "key"),
}

SUMMARY_COLUMNS = ("phase_id", "name", "generated", "removed",
                   "opcode_updates", "value_updates", "edge_adds",
                   "edge_removes", "edge_replaces")

SNAPSHOT_NODE_COLUMNS = ("node_id", "address", "effective_opcode",
                         "mnemonic", "current_value", "status")

SNAPSHOT_EDGE_COLUMNS = ("src_node_id", "dst_node_id", "multiplicity")


def _render(header, rows) -> str:
    buf = io.StringIO()
    out = csv.writer(buf, lineterminator="\n", quoting=csv.QUOTE_MINIMAL)
    out.writerow(header)
    out.writerows(rows)
    return buf.getvalue()


def _write(dest: Path, text: str) -> Path:
    try:
        dest.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise JitscopeError("E_IO", f"cannot write {dest}: {exc}") from exc
    return dest


def table_csv(conn: sqlite3.Connection, table: str) -> str:
    if table not in TABLE_LAYOUT:
        raise JitscopeError("E_NO_SUCH_TABLE", f"unknown table {table!r}")
    columns, order = TABLE_LAYOUT[table]
    rows = conn.execute(
        f'SELECT {", ".join(columns)} FROM "{table}" ORDER BY {order}')
    return _render(columns, ([row[c] for c in columns] for row in rows))


def snapshot_nodes_csv(snap: engine.GraphSnapshot) -> str:
    return _render(SNAPSHOT_NODE_COLUMNS,
                   ((n.node_id, n.address, n.effective_opcode, n.mnemonic,
                     n.current_value, n.status) for n in snap.nodes))


def snapshot_edges_csv(snap: engine.GraphSnapshot) -> str:
    return _render(SNAPSHOT_EDGE_COLUMNS,
                   ((src, dst, snap.edges[(src, dst)])
                    for src, dst in sorted(snap.edges)))


def summary_csv(ds: ResolvedDataset) -> str:
    return _render(SUMMARY_COLUMNS,
                   ((s.phase_id, s.name, s.generated, s.removed,
                     s.opcode_updates, s.value_updates, s.edge_adds,
                     s.edge_removes, s.edge_replaces)
                    for s in engine.summarize_all(ds)))


def export_table(conn: sqlite3.Connection, table: str, dest: Path) -> int:
    """Dump one table to `dest`; returns the data row count."""
    text = table_csv(conn, table)
    _write(dest, text)
    return text.count("\n") - 1


def export_snapshot(ds: ResolvedDataset, phase: int,
                    dest_dir: Path) -> tuple[Path, Path]:
    """Write snapshot_nodes_<p>.csv and snapshot_edges_<p>.csv."""
    snap = engine.snapshot_at(ds, phase)
    return (
        _write(dest_dir / f"snapshot_nodes_{phase}.csv",
               snapshot_nodes_csv(snap)),
        _write(dest_dir / f"snapshot_edges_{phase}.csv",
               snapshot_edges_csv(snap)))


def export_summary(ds: ResolvedDataset, dest: Path) -> Path:
    """Per-phase activity table, UNASSIGNED row first."""
    return _write(dest, summary_csv(ds))


def export_all(conn: sqlite3.Connection, ds: ResolvedDataset,
               out_dir: Path) -> dict[str, int]:
    """Every table, the summary, and snapshots for every phase.

    Returns file name -> data row count.
    """
    out_dir.mkdir(parents=True, exist_ok=True)
    written: dict[str, int] = {}
    for table in TABLE_LAYOUT:
        written[f"{table}.csv"] = export_table(conn, table,
                                               out_dir / f"{table}.csv")
    export_summary(ds, out_dir / "phase_summary.csv")
    written["phase_summary.csv"] = ds.phase_count + 1
    for phase in [-1, *range(ds.phase_count)]:
        snap = engine.snapshot_at(ds, phase)
        _write(out_dir / f"snapshot_nodes_{phase}.csv",
               snapshot_nodes_csv(snap))
        _write(out_dir / f"snapshot_edges_{phase}.csv",
               snapshot_edges_csv(snap))
        written[f"snapshot_nodes_{phase}.csv"] = len(snap.nodes)
        written[f"snapshot_edges_{phase}.csv"] = len(snap.edges)
    return written
