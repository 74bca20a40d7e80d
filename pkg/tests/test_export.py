"""CSV export: layout, determinism, and losslessness.

Expected rows are transcriptions of the hand analysis in
test_engine.py; byte-level checks pin the format (LF, no BOM, minimal
quoting) rather than just the parsed content.
"""

from __future__ import annotations

import csv
import io

import pytest

from conftest import import_csv_tables, resolve_dict
from jitscope import engine, export, store
from jitscope.errors import JitscopeError

EXPECTED_FILES = {
    "functions.csv": 8,
    "phases.csv": 3,
    "nodes.csv": 12,
    "instructions.csv": 37,
    "node_accesses.csv": 37,
    "opcode_updates.csv": 2,
    "value_updates.csv": 5,
    "edge_events.csv": 12,
    "phase_summaries.csv": 3,
    "ingest_meta.csv": 5,
    "phase_summary.csv": 4,
    "snapshot_nodes_-1.csv": 3,
    "snapshot_edges_-1.csv": 0,
    "snapshot_nodes_0.csv": 7,
    "snapshot_edges_0.csv": 5,
    "snapshot_nodes_1.csv": 10,
    "snapshot_edges_1.csv": 6,
    "snapshot_nodes_2.csv": 10,
    "snapshot_edges_2.csv": 5,
}


@pytest.fixture()
def exported(curated, curated_db, tmp_path):
    out = tmp_path / "csv"
    written = export.export_all(curated_db, curated, out)
    return out, written


def test_export_all_inventory(exported):
    out, written = exported
    assert written == EXPECTED_FILES
    assert {p.name for p in out.iterdir()} == set(EXPECTED_FILES)


def test_headers_match_layout(exported):
    out, _ = exported
    for table, (columns, _order) in export.TABLE_LAYOUT.items():
        first = (out / f"{table}.csv").read_text().splitlines()[0]
        assert first == ",".join(columns)
    assert (out / "phase_summary.csv").read_text().splitlines()[0] \
        == ",".join(export.SUMMARY_COLUMNS)
    assert (out / "snapshot_nodes_0.csv").read_text().splitlines()[0] \
        == ",".join(export.SNAPSHOT_NODE_COLUMNS)
    assert (out / "snapshot_edges_0.csv").read_text().splitlines()[0] \
        == ",".join(export.SNAPSHOT_EDGE_COLUMNS)


def test_byte_determinism(curated, curated_db, tmp_path):
    a = tmp_path / "a"
    b = tmp_path / "b"
    export.export_all(curated_db, curated, a)
    export.export_all(curated_db, curated, b)
    for name in EXPECTED_FILES:
        assert (a / name).read_bytes() == (b / name).read_bytes()


def test_lf_only_no_bom(exported):
    out, _ = exported
    for name in EXPECTED_FILES:
        data = (out / name).read_bytes()
        assert b"\r" not in data
        assert not data.startswith(b"\xef\xbb\xbf")
        assert data.endswith(b"\n")


def test_null_and_bool_encoding(exported):
    out, _ = exported
    lines = (out / "nodes.csv").read_text().splitlines()
    assert lines[1] == "0,0x1000,Start,start,1,,"
    assert lines[6] == "5,0x1140,Int64Mul,mul,0,0,2"
    assert lines[9] == "8,0x1200,StoreField,,0,1,1"
    lines = (out / "instructions.csv").read_text().splitlines()
    assert lines[1] == "1,90,"
    assert lines[4] == "100,10,0"


def test_symbols_stay_unquoted(exported):
    out, _ = exported
    lines = (out / "functions.csv").read_text().splitlines()
    assert lines[1] == "10,jit::inlining::Run"


def test_summary_rows(exported):
    out, _ = exported
    lines = (out / "phase_summary.csv").read_text().splitlines()
    assert lines[1] == "-1,(unassigned),3,0,0,0,0,0,0"
    assert lines[2] == "0,Inlining,4,1,0,0,6,0,0"
    assert lines[3] == "1,ConstantFolding,4,1,1,3,1,1,1"
    assert lines[4] == "2,DeadCodeElimination,1,2,1,2,1,2,0"


def test_snapshot_rows(exported):
    out, _ = exported
    lines = (out / "snapshot_nodes_1.csv").read_text().splitlines()
    by_id = {line.split(",", 1)[0]: line for line in lines[1:]}
    assert by_id["2"] == "2,0x1080,Word64Add,add,42,alive"
    assert by_id["4"] \
        == "4,0x1100,NumberConstant,constant,3.14,alive_and_generated_this_phase"
    assert by_id["8"] == "8,0x1200,StoreField,,,generated_this_phase"
    lines = (out / "snapshot_edges_1.csv").read_text().splitlines()
    assert lines[1:] == ["2,0,1", "2,1,1", "3,4,1", "5,2,1", "7,5,1", "9,0,2"]


def test_export_table_row_count(curated_db, tmp_path):
    n = export.export_table(curated_db, "nodes", tmp_path / "nodes.csv")
    assert n == 12


def test_unknown_table(curated_db, tmp_path):
    with pytest.raises(JitscopeError) as info:
        export.export_table(curated_db, "bogus", tmp_path / "x.csv")
    assert info.value.code == "E_NO_SUCH_TABLE"


def test_quoting_round_trips_awkward_values(tmp_path):
    tricky = 'he said "1,2"\nthen left'
    ds = resolve_dict({
        "format_version": 1,
        "functions": {"10": "f"},
        "phases": [{"name": "Only", "funcIdStart": 10, "funcIdEnd": 19}],
        "nodes": [{"address": "0xf0", "opcode": "Str", "alive": True,
                   "opcodeUpdates": [],
                   "values": [{"value": tricky, "instrId": 11}],
                   "edges": [],
                   "accesses": [{"instrId": 10, "funcId": 10},
                                {"instrId": 11, "funcId": 10}]}],
    })
    conn = store.open_database(tmp_path / "t.db")
    store.load(ds, conn)
    text = export.table_csv(conn, "value_updates")
    conn.close()
    rows = list(csv.reader(io.StringIO(text)))
    assert rows[0] == list(export.TABLE_LAYOUT["value_updates"][0])
    assert rows[1][2] == tricky


def test_csv_round_trip_rebuilds_dataset(curated, exported, tmp_path):
    out, _ = exported
    conn = import_csv_tables(out, tmp_path / "rebuilt.db")
    rebuilt = store.read_dataset(conn)
    conn.close()
    assert rebuilt == curated


def test_snapshot_csv_matches_engine(curated, exported):
    out, _ = exported
    snap = engine.snapshot_at(curated, 2)
    assert (out / "snapshot_nodes_2.csv").read_text() \
        == export.snapshot_nodes_csv(snap)
    assert (out / "snapshot_edges_2.csv").read_text() \
        == export.snapshot_edges_csv(snap)
