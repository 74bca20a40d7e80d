"""SQLite persistence for resolved datasets.

Single-file database, ten tables, loaded in one transaction so readers
never observe a half-written dataset.  Phase ids equal phase ordinals;
the UNASSIGNED pseudo phase is stored as NULL in foreign-key columns
(instructions.phase_id, nodes.created_phase, nodes.removed_phase) and
translated back to -1 at the query layer.  A dead node whose
removed_phase is NULL was removed during UNASSIGNED; an alive node
always has removed_phase NULL.

phase_summaries materializes per-phase activity for declared phases;
the UNASSIGNED row is engine-computed on demand rather than stored.
"""

from __future__ import annotations

import datetime
import sqlite3
from dataclasses import dataclass
from pathlib import Path

from . import engine
from .errors import JitscopeError
from .ingest import InstructionRow, ResolvedDataset
from .model import (
    UNASSIGNED,
    AccessRecord,
    EdgeEvent,
    IRNode,
    OpcodeUpdate,
    PhaseSpec,
    ValueUpdate,
)

SCHEMA_VERSION = 1

# Canonical table order; also the export order for --all.
TABLES = ("functions", "phases", "nodes", "instructions", "node_accesses",
          "opcode_updates", "value_updates", "edge_events", "phase_summaries",
          "ingest_meta")

_SCHEMA = [
    """CREATE TABLE functions (
        func_id INTEGER PRIMARY KEY,
        symbol  TEXT NOT NULL
    )""",
    """CREATE TABLE phases (
        phase_id      INTEGER PRIMARY KEY,
        name          TEXT NOT NULL UNIQUE,
        ordinal       INTEGER NOT NULL UNIQUE,
        func_id_start INTEGER NOT NULL,
        func_id_end   INTEGER NOT NULL
    )""",
    """CREATE TABLE nodes (
        node_id        INTEGER PRIMARY KEY,
        address        TEXT NOT NULL UNIQUE,
        initial_opcode TEXT NOT NULL,
        mnemonic       TEXT NOT NULL DEFAULT '',
        alive          INTEGER NOT NULL CHECK (alive IN (0, 1)),
        created_phase  INTEGER REFERENCES phases(phase_id),
        removed_phase  INTEGER REFERENCES phases(phase_id)
    )""",
    """CREATE TABLE instructions (
        instr_id INTEGER PRIMARY KEY,
        func_id  INTEGER NOT NULL REFERENCES functions(func_id),
        phase_id INTEGER REFERENCES phases(phase_id)
    )""",
    """CREATE TABLE node_accesses (
        access_id INTEGER PRIMARY KEY,
        node_id   INTEGER NOT NULL REFERENCES nodes(node_id),
        instr_id  INTEGER NOT NULL REFERENCES instructions(instr_id)
    )""",
    """CREATE TABLE opcode_updates (
        update_id  INTEGER PRIMARY KEY,
        node_id    INTEGER NOT NULL REFERENCES nodes(node_id),
        new_opcode TEXT NOT NULL,
        instr_id   INTEGER NOT NULL REFERENCES instructions(instr_id)
    )""",
    """CREATE TABLE value_updates (
        update_id INTEGER PRIMARY KEY,
        node_id   INTEGER NOT NULL REFERENCES nodes(node_id),
        value     TEXT NOT NULL,
        instr_id  INTEGER NOT NULL REFERENCES instructions(instr_id)
    )""",
    """CREATE TABLE edge_events (
        event_id        INTEGER PRIMARY KEY,
        src_node_id     INTEGER NOT NULL REFERENCES nodes(node_id),
        action          TEXT NOT NULL
                        CHECK (action IN ('add', 'remove', 'replace')),
        dst_node_id     INTEGER NOT NULL REFERENCES nodes(node_id),
        old_dst_node_id INTEGER REFERENCES nodes(node_id),
        instr_id        INTEGER NOT NULL REFERENCES instructions(instr_id)
    )""",
    """CREATE TABLE phase_summaries (
        phase_id       INTEGER PRIMARY KEY REFERENCES phases(phase_id),
        name           TEXT NOT NULL,
        generated      INTEGER NOT NULL,
        removed        INTEGER NOT NULL,
        opcode_updates INTEGER NOT NULL,
        value_updates  INTEGER NOT NULL,
        edge_adds      INTEGER NOT NULL,
        edge_removes   INTEGER NOT NULL,
        edge_replaces  INTEGER NOT NULL
    )""",
    """CREATE TABLE ingest_meta (
        key   TEXT PRIMARY KEY,
        value TEXT NOT NULL
    )""",
    "CREATE INDEX idx_accesses_node ON node_accesses(node_id, instr_id)",
    "CREATE INDEX idx_accesses_instr ON node_accesses(instr_id)",
    "CREATE INDEX idx_edges_src ON edge_events(src_node_id)",
    "CREATE INDEX idx_opcode_node ON opcode_updates(node_id)",
    "CREATE INDEX idx_value_node ON value_updates(node_id)",
    "CREATE INDEX idx_instr_phase ON instructions(phase_id)",
]


@dataclass(frozen=True)
class LoadReport:
    rows: dict[str, int]

    @property
    def total(self) -> int:
        return sum(self.rows.values())


@dataclass(frozen=True)
class NodeRow:
    node_id: int
    address: str
    initial_opcode: str
    mnemonic: str
    alive: bool
    created_phase: int
    removed_phase: int | None


@dataclass(frozen=True)
class NodeEvents:
    node_id: int
    accesses: tuple[tuple[int, int], ...]          # (instr_id, func_id)
    opcode_updates: tuple[tuple[int, str], ...]    # (instr_id, new_opcode)
    value_updates: tuple[tuple[int, str], ...]     # (instr_id, value)
    edge_events: tuple[tuple[int, str, int, int | None], ...]
    # edge tuples: (instr_id, action, dst_node_id, old_dst_node_id)


@dataclass(frozen=True)
class LastAccess:
    instr_id: int
    func_id: int
    symbol: str
    phase_id: int


def open_database(path: str | Path) -> sqlite3.Connection:
    try:
        conn = sqlite3.connect(str(path), isolation_level=None)
    except sqlite3.OperationalError as exc:
        raise JitscopeError("E_IO", f"cannot open database: {exc}",
                            str(path)) from exc
    conn.row_factory = sqlite3.Row
    conn.execute("PRAGMA foreign_keys = ON")
    conn.execute("PRAGMA busy_timeout = 5000")
    return conn


def user_tables(conn: sqlite3.Connection) -> list[str]:
    rows = conn.execute(
        "SELECT name FROM sqlite_master WHERE type = 'table' "
        "AND name NOT LIKE 'sqlite_%' ORDER BY name").fetchall()
    return [r["name"] for r in rows]


def _null_if_unassigned(phase: int | None) -> int | None:
    return None if phase == UNASSIGNED else phase


def load(dataset: ResolvedDataset, conn: sqlite3.Connection, *,
         source_name: str = "", content_hash: str = "",
         ingested_at: str | None = None, replace: bool = False) -> LoadReport:
    """Write the dataset in a single transaction.

    Refuses a non-empty database unless `replace`, which drops every
    user table first.  `ingested_at` defaults to the current UTC time;
    pass it explicitly to preserve provenance on re-import.
    """
    existing = user_tables(conn)
    if existing and not replace:
        raise JitscopeError("E_DB_NOT_EMPTY",
                            "database already contains tables; "
                            "use replace to overwrite")
    if ingested_at is None:
        ingested_at = datetime.datetime.now(datetime.timezone.utc) \
            .isoformat(timespec="seconds")

    # The pragma is a no-op inside a transaction, so toggle it outside.
    conn.execute("PRAGMA foreign_keys = OFF")
    try:
        conn.execute("BEGIN IMMEDIATE")
        try:
            for name in existing:
                conn.execute(f'DROP TABLE "{name}"')
            for stmt in _SCHEMA:
                conn.execute(stmt)
            rows = _insert_all(dataset, conn, source_name, content_hash,
                               ingested_at)
            conn.execute("COMMIT")
        except BaseException:
            conn.execute("ROLLBACK")
            raise
    finally:
        conn.execute("PRAGMA foreign_keys = ON")
    return LoadReport(rows=rows)


def _insert_all(ds: ResolvedDataset, conn: sqlite3.Connection,
                source_name: str, content_hash: str,
                ingested_at: str) -> dict[str, int]:
    conn.executemany(
        "INSERT INTO functions VALUES (?, ?)",
        sorted(ds.functions.items()))
    conn.executemany(
        "INSERT INTO phases VALUES (?, ?, ?, ?, ?)",
        [(i, p.name, i, p.func_id_start, p.func_id_end)
         for i, p in enumerate(ds.phases)])
    conn.executemany(
        "INSERT INTO nodes VALUES (?, ?, ?, ?, ?, ?, ?)",
        [(i, n.address, n.opcode, n.mnemonic, int(n.alive),
          _null_if_unassigned(ds.created_phase[i]),
          _null_if_unassigned(ds.removed_phase[i]))
         for i, n in enumerate(ds.nodes)])
    conn.executemany(
        "INSERT INTO instructions VALUES (?, ?, ?)",
        [(r.instr_id, r.func_id, _null_if_unassigned(r.phase_id))
         for r in ds.instructions])

    accesses = []
    opcodes = []
    values = []
    edges = []
    for i, node in enumerate(ds.nodes):
        accesses.extend((i, a.instr_id) for a in node.accesses)
        opcodes.extend((i, u.new_opcode, u.instr_id)
                       for u in node.opcode_updates)
        values.extend((i, u.value, u.instr_id) for u in node.value_updates)
        edges.extend(
            (i, ev.action, ds.address_index[ev.dst_address],
             None if ev.old_dst_address is None
             else ds.address_index[ev.old_dst_address],
             ev.instr_id)
            for ev in node.edge_events)
    conn.executemany(
        "INSERT INTO node_accesses (node_id, instr_id) VALUES (?, ?)",
        accesses)
    conn.executemany(
        "INSERT INTO opcode_updates (node_id, new_opcode, instr_id) "
        "VALUES (?, ?, ?)", opcodes)
    conn.executemany(
        "INSERT INTO value_updates (node_id, value, instr_id) "
        "VALUES (?, ?, ?)", values)
    conn.executemany(
        "INSERT INTO edge_events (src_node_id, action, dst_node_id, "
        "old_dst_node_id, instr_id) VALUES (?, ?, ?, ?, ?)", edges)

    summaries = [engine.summarize_phase(ds, p) for p in range(ds.phase_count)]
    conn.executemany(
        "INSERT INTO phase_summaries VALUES (?, ?, ?, ?, ?, ?, ?, ?, ?)",
        [(s.phase_id, s.name, s.generated, s.removed, s.opcode_updates,
          s.value_updates, s.edge_adds, s.edge_removes, s.edge_replaces)
         for s in summaries])

    meta = [("schema_version", str(SCHEMA_VERSION)),
            ("format_version", "1"),
            ("source_name", source_name),
            ("content_hash", content_hash),
            ("ingested_at", ingested_at)]
    conn.executemany("INSERT INTO ingest_meta VALUES (?, ?)", meta)

    return {"functions": len(ds.functions), "phases": len(ds.phases),
            "nodes": len(ds.nodes), "instructions": len(ds.instructions),
            "node_accesses": len(accesses), "opcode_updates": len(opcodes),
            "value_updates": len(values), "edge_events": len(edges),
            "phase_summaries": len(summaries), "ingest_meta": len(meta)}


def is_loaded(conn: sqlite3.Connection) -> bool:
    return "ingest_meta" in user_tables(conn)


def read_meta(conn: sqlite3.Connection) -> dict[str, str]:
    return {r["key"]: r["value"]
            for r in conn.execute("SELECT key, value FROM ingest_meta")}


def dataset_status(conn: sqlite3.Connection) -> dict:
    """Status summary for the serving layer; loaded:false when empty."""
    if not is_loaded(conn):
        return {"loaded": False}
    meta = read_meta(conn)
    counts = {t: conn.execute(f'SELECT COUNT(*) AS n FROM "{t}"')
              .fetchone()["n"] for t in ("nodes", "phases", "instructions")}
    return {
        "loaded": True,
        "source_name": meta.get("source_name", ""),
        "content_hash": meta.get("content_hash", ""),
        "ingested_at": meta.get("ingested_at", ""),
        "node_count": counts["nodes"],
        "phase_count": counts["phases"],
        "instruction_count": counts["instructions"],
    }


def table_counts(conn: sqlite3.Connection) -> dict[str, int]:
    return {t: conn.execute(f'SELECT COUNT(*) AS n FROM "{t}"')
            .fetchone()["n"] for t in TABLES}


def read_dataset(conn: sqlite3.Connection) -> ResolvedDataset:
    """Rebuild the in-memory dataset; inverse of `load` up to warnings."""
    if not is_loaded(conn):
        raise JitscopeError("E_DB_NOT_EMPTY",
                            "database holds no dataset")
    node_rows = conn.execute(
        "SELECT * FROM nodes ORDER BY node_id").fetchall()
    addr_of = {r["node_id"]: r["address"] for r in node_rows}

    by_node: dict[int, dict[str, list]] = {
        r["node_id"]: {"acc": [], "op": [], "val": [], "edge": []}
        for r in node_rows}
    for r in conn.execute(
            "SELECT na.node_id, na.instr_id, i.func_id FROM node_accesses na "
            "JOIN instructions i ON i.instr_id = na.instr_id "
            "ORDER BY na.node_id, na.access_id"):
        by_node[r["node_id"]]["acc"].append(
            AccessRecord(r["instr_id"], r["func_id"]))
    for r in conn.execute("SELECT * FROM opcode_updates "
                          "ORDER BY node_id, update_id"):
        by_node[r["node_id"]]["op"].append(
            OpcodeUpdate(r["new_opcode"], r["instr_id"]))
    for r in conn.execute("SELECT * FROM value_updates "
                          "ORDER BY node_id, update_id"):
        by_node[r["node_id"]]["val"].append(
            ValueUpdate(r["value"], r["instr_id"]))
    for r in conn.execute("SELECT * FROM edge_events "
                          "ORDER BY src_node_id, event_id"):
        by_node[r["src_node_id"]]["edge"].append(EdgeEvent(
            action=r["action"], dst_address=addr_of[r["dst_node_id"]],
            instr_id=r["instr_id"],
            old_dst_address=None if r["old_dst_node_id"] is None
            else addr_of[r["old_dst_node_id"]]))

    nodes = []
    created = []
    removed: list[int | None] = []
    for r in node_rows:
        parts = by_node[r["node_id"]]
        nodes.append(IRNode(
            address=r["address"], opcode=r["initial_opcode"],
            mnemonic=r["mnemonic"], alive=bool(r["alive"]),
            accesses=tuple(parts["acc"]),
            opcode_updates=tuple(parts["op"]),
            value_updates=tuple(parts["val"]),
            edge_events=tuple(parts["edge"])))
        created.append(UNASSIGNED if r["created_phase"] is None
                       else r["created_phase"])
        if r["alive"]:
            removed.append(None)
        else:
            removed.append(UNASSIGNED if r["removed_phase"] is None
                           else r["removed_phase"])

    phases = tuple(PhaseSpec(r["name"], r["func_id_start"], r["func_id_end"])
                   for r in conn.execute("SELECT * FROM phases "
                                         "ORDER BY ordinal"))
    functions = {r["func_id"]: r["symbol"]
                 for r in conn.execute("SELECT * FROM functions "
                                       "ORDER BY func_id")}
    instructions = tuple(
        InstructionRow(r["instr_id"], r["func_id"],
                       UNASSIGNED if r["phase_id"] is None else r["phase_id"])
        for r in conn.execute("SELECT * FROM instructions ORDER BY instr_id"))

    return ResolvedDataset(
        nodes=tuple(nodes),
        address_index={n.address: i for i, n in enumerate(nodes)},
        instructions=instructions, phases=phases, functions=functions,
        created_phase=tuple(created), removed_phase=tuple(removed),
        warnings=())


def query_nodes(conn: sqlite3.Connection, *, phase: int | None = None,
                opcode: str | None = None,
                alive_at_phase: bool | None = None) -> list[NodeRow]:
    """Filterable node listing.

    `phase` keeps nodes present at that phase (including ones removed
    during it); `alive_at_phase` further splits those into survivors
    (True) and removed-this-phase ghosts (False).  Without `phase`,
    `alive_at_phase` falls back to the final alive flag.  `opcode`
    matches the initial opcode exactly.
    """
    where = []
    args: list = []
    if phase is not None:
        where.append("COALESCE(created_phase, -1) <= ? AND "
                     "(alive = 1 OR COALESCE(removed_phase, -1) >= ?)")
        args += [phase, phase]
        if alive_at_phase is True:
            where.append("(alive = 1 OR COALESCE(removed_phase, -1) > ?)")
            args.append(phase)
        elif alive_at_phase is False:
            where.append("alive = 0 AND COALESCE(removed_phase, -1) = ?")
            args.append(phase)
    elif alive_at_phase is not None:
        where.append("alive = ?")
        args.append(int(alive_at_phase))
    if opcode is not None:
        where.append("initial_opcode = ?")
        args.append(opcode)
    sql = "SELECT * FROM nodes"
    if where:
        sql += " WHERE " + " AND ".join(where)
    sql += " ORDER BY node_id"
    out = []
    for r in conn.execute(sql, args):
        if r["alive"]:
            rem = None
        else:
            rem = UNASSIGNED if r["removed_phase"] is None \
                else r["removed_phase"]
        out.append(NodeRow(
            node_id=r["node_id"], address=r["address"],
            initial_opcode=r["initial_opcode"], mnemonic=r["mnemonic"],
            alive=bool(r["alive"]),
            created_phase=UNASSIGNED if r["created_phase"] is None
            else r["created_phase"],
            removed_phase=rem))
    return out


def _require_node(conn: sqlite3.Connection, node_id: int) -> None:
    row = conn.execute("SELECT 1 FROM nodes WHERE node_id = ?",
                       (node_id,)).fetchone()
    if row is None:
        raise JitscopeError("E_NO_SUCH_NODE", f"no node with id {node_id}")


def query_node_events(conn: sqlite3.Connection, node_id: int) -> NodeEvents:
    """Full event history for one node, instr_id order within each kind."""
    _require_node(conn, node_id)
    accesses = tuple(
        (r["instr_id"], r["func_id"]) for r in conn.execute(
            "SELECT na.instr_id, i.func_id FROM node_accesses na "
            "JOIN instructions i ON i.instr_id = na.instr_id "
            "WHERE na.node_id = ? ORDER BY na.instr_id, na.access_id",
            (node_id,)))
    opcode_updates = tuple(
        (r["instr_id"], r["new_opcode"]) for r in conn.execute(
            "SELECT instr_id, new_opcode FROM opcode_updates "
            "WHERE node_id = ? ORDER BY instr_id, update_id", (node_id,)))
    value_updates = tuple(
        (r["instr_id"], r["value"]) for r in conn.execute(
            "SELECT instr_id, value FROM value_updates "
            "WHERE node_id = ? ORDER BY instr_id, update_id", (node_id,)))
    edge_events = tuple(
        (r["instr_id"], r["action"], r["dst_node_id"], r["old_dst_node_id"])
        for r in conn.execute(
            "SELECT instr_id, action, dst_node_id, old_dst_node_id "
            "FROM edge_events WHERE src_node_id = ? "
            "ORDER BY instr_id, event_id", (node_id,)))
    return NodeEvents(node_id=node_id, accesses=accesses,
                      opcode_updates=opcode_updates,
                      value_updates=value_updates, edge_events=edge_events)


def query_last_access(conn: sqlite3.Connection, node_id: int) -> LastAccess:
    """Who touched the node last: one ORDER BY DESC join, no replay."""
    _require_node(conn, node_id)
    row = conn.execute(
        "SELECT na.instr_id, i.func_id, f.symbol, i.phase_id "
        "FROM node_accesses na "
        "JOIN instructions i ON i.instr_id = na.instr_id "
        "JOIN functions f ON f.func_id = i.func_id "
        "WHERE na.node_id = ? ORDER BY na.instr_id DESC LIMIT 1",
        (node_id,)).fetchone()
    if row is None:
        raise JitscopeError("E_NO_SUCH_NODE",
                            f"node {node_id} has no access records")
    return LastAccess(
        instr_id=row["instr_id"], func_id=row["func_id"],
        symbol=row["symbol"],
        phase_id=UNASSIGNED if row["phase_id"] is None else row["phase_id"])
