"""Command line front end.

Exit codes: 0 success, 1 the document failed validation (or the
database refused the operation), 2 usage error, 3 I/O failure.
The database path can come from --db or the JITSCOPE_DB variable.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import engine, export, fixtures, server, store
from .errors import JitscopeError
from .ingest import ResolvedDataset, assign_phases, parse_document
from .model import SEV_ERROR, ValidationIssue, validate_document

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_USAGE = 2
EXIT_IO = 3

_EXIT_OF_CODE = {"E_IO": EXIT_IO, "E_DB_NOT_EMPTY": EXIT_IO,
                 "E_BAD_ARGS": EXIT_USAGE}


def _issue_line(issue: ValidationIssue) -> str:
    return f"{issue.severity.upper()} {issue.code} {issue.locator}: " \
           f"{issue.message}"


def _read_bytes(path: str) -> bytes:
    try:
        return Path(path).read_bytes()
    except OSError as exc:
        raise JitscopeError("E_IO", f"cannot read {path}: {exc}") from exc


def _parse_and_validate(data: bytes) -> tuple:
    """Returns (doc, issues); parse failures become a single-issue list."""
    try:
        doc, warnings = parse_document(data)
    except JitscopeError as exc:
        if exc.code == "E_IO":
            raise
        issue = ValidationIssue(SEV_ERROR, exc.code, exc.path or "/",
                                exc.message)
        return None, [issue]
    return doc, warnings + validate_document(doc)


def _resolve(data: bytes, label: str) -> ResolvedDataset:
    """Parse, validate, and assign; issues go to stderr on failure."""
    doc, issues = _parse_and_validate(data)
    errors = [i for i in issues if i.severity == SEV_ERROR]
    if errors:
        for issue in issues:
            print(_issue_line(issue), file=sys.stderr)
        raise JitscopeError("E_VALIDATION",
                            f"{label} failed validation with "
                            f"{len(errors)} error(s)")
    warnings = [i for i in issues if i.severity != SEV_ERROR]
    return assign_phases(doc, warnings)


def _db_path(args) -> str:
    path = args.db or os.environ.get("JITSCOPE_DB")
    if not path:
        raise JitscopeError("E_BAD_ARGS",
                            "no database given: pass --db or set JITSCOPE_DB")
    return path


def cmd_validate(args) -> int:
    _, issues = _parse_and_validate(_read_bytes(args.input))
    ok = not any(i.severity == SEV_ERROR for i in issues)
    if args.format == "json":
        print(json.dumps({"ok": ok, "issues": [asdict(i) for i in issues]},
                         indent=2, sort_keys=True))
    else:
        for issue in issues:
            print(_issue_line(issue))
        errors = sum(1 for i in issues if i.severity == SEV_ERROR)
        print(f"{args.input}: {errors} error(s), "
              f"{len(issues) - errors} warning(s)")
    return EXIT_OK if ok else EXIT_INVALID


def cmd_ingest(args) -> int:
    data = _read_bytes(args.input)
    ds = _resolve(data, args.input)
    for issue in ds.warnings:
        print(_issue_line(issue), file=sys.stderr)
    conn = store.open_database(_db_path(args))
    try:
        report = store.load(
            ds, conn,
            source_name=args.name or Path(args.input).name,
            content_hash=hashlib.sha256(data).hexdigest(),
            replace=args.replace)
    finally:
        conn.close()
    print(f"loaded {args.input} into {_db_path(args)}")
    for table in store.TABLES:
        print(f"  {table:<16} {report.rows[table]:>8}")
    print(f"  {'total':<16} {report.total:>8}")
    return EXIT_OK


def _read_db_dataset(args) -> ResolvedDataset:
    conn = store.open_database(_db_path(args))
    try:
        return store.read_dataset(conn)
    finally:
        conn.close()


def cmd_export(args) -> int:
    if not (args.all or args.table or args.snapshot or args.summary):
        raise JitscopeError("E_BAD_ARGS",
                            "nothing to export: pass --all, --table, "
                            "--snapshot, or --summary")
    db = _db_path(args)
    out_dir = Path(args.out)
    conn = store.open_database(db)
    try:
        ds = store.read_dataset(conn)
        out_dir.mkdir(parents=True, exist_ok=True)
        if args.all:
            written = export.export_all(conn, ds, out_dir)
        else:
            written = {}
            for table in args.table:
                dest = out_dir / f"{table}.csv"
                written[dest.name] = export.export_table(conn, table, dest)
            for phase in args.snapshot:
                nodes_path, edges_path = export.export_snapshot(
                    ds, phase, out_dir)
                snap = engine.snapshot_at(ds, phase)
                written[nodes_path.name] = len(snap.nodes)
                written[edges_path.name] = len(snap.edges)
            if args.summary:
                export.export_summary(ds, out_dir / "phase_summary.csv")
                written["phase_summary.csv"] = ds.phase_count + 1
    finally:
        conn.close()
    for name in written:
        print(f"wrote {out_dir / name} ({written[name]} rows)")
    return EXIT_OK


def cmd_summary(args) -> int:
    ds = _read_db_dataset(args)
    rows = engine.summarize_all(ds)
    if args.format == "json":
        print(json.dumps({"phases": [asdict(s) for s in rows]},
                         indent=2, sort_keys=True))
        return EXIT_OK
    name_w = max([len(s.name) for s in rows] + [5])
    header = (f"{'phase':>5}  {'name':<{name_w}}  {'gen':>6} {'rem':>6} "
              f"{'opc':>6} {'val':>6} {'e+':>6} {'e-':>6} {'e~':>6}")
    print(header)
    for s in rows:
        print(f"{s.phase_id:>5}  {s.name:<{name_w}}  {s.generated:>6} "
              f"{s.removed:>6} {s.opcode_updates:>6} {s.value_updates:>6} "
              f"{s.edge_adds:>6} {s.edge_removes:>6} {s.edge_replaces:>6}")
    return EXIT_OK


def cmd_serve(args) -> int:
    db = _db_path(args)
    ui_dir = args.ui_dir
    if ui_dir is None and Path("frontend/dist/index.html").is_file():
        ui_dir = "frontend/dist"
    print(f"serving {db} on http://{args.host}:{args.port}", file=sys.stderr)
    server.serve(args.host, args.port, db, ui_dir=ui_dir,
                 max_upload_bytes=args.max_upload_bytes)
    return EXIT_OK


def cmd_gen_fixture(args) -> int:
    params = fixtures.FixtureParams(
        nodes=args.nodes, phases=args.phases,
        events_per_node=args.events_per_node, seed=args.seed)
    try:
        doc_path, truth_path = fixtures.write_fixture(params,
                                                      Path(args.output))
    except OSError as exc:
        raise JitscopeError("E_IO", f"cannot write fixture: {exc}") from exc
    print(f"wrote {doc_path}")
    print(f"wrote {truth_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jitscope",
        description="Inspect JIT compiler IR traces phase by phase.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a trace document")
    p.add_argument("input", help="trace JSON file")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ingest", help="load a trace into a database")
    p.add_argument("input", help="trace JSON file")
    p.add_argument("--db", help="database path (default: $JITSCOPE_DB)")
    p.add_argument("--name", help="source name recorded in ingest_meta")
    p.add_argument("--replace", action="store_true",
                   help="overwrite an existing dataset")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("export", help="write CSV files from a database")
    p.add_argument("--db", help="database path (default: $JITSCOPE_DB)")
    p.add_argument("--out", default=".", help="output directory")
    p.add_argument("--table", action="append", default=[],
                   metavar="NAME", help="export one table (repeatable)")
    p.add_argument("--snapshot", action="append", default=[], type=int,
                   metavar="PHASE",
                   help="export a phase snapshot (repeatable)")
    p.add_argument("--summary", action="store_true",
                   help="export the per-phase summary")
    p.add_argument("--all", action="store_true",
                   help="export every table, summary, and all snapshots")
    p.set_defaults(func=cmd_export)

    p = sub.add_parser("summary", help="print per-phase activity")
    p.add_argument("--db", help="database path (default: $JITSCOPE_DB)")
    p.add_argument("--format", choices=("text", "json"), default="text")
    p.set_defaults(func=cmd_summary)

    p = sub.add_parser("serve", help="serve the HTTP API")
    p.add_argument("--db", help="database path (default: $JITSCOPE_DB)")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=server.DEFAULT_PORT)
    p.add_argument("--max-upload-bytes", type=int,
                   default=server.DEFAULT_MAX_UPLOAD)
    p.add_argument("--ui-dir",
                   help="static UI bundle (default: frontend/dist if built)")
    p.set_defaults(func=cmd_serve)

    p = sub.add_parser("gen-fixture", help="generate a synthetic trace")
    p.add_argument("--nodes", type=int, default=60)
    p.add_argument("--phases", type=int, default=4)
    p.add_argument("--events-per-node", type=int, default=6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", required=True, help="output JSON path")
    p.set_defaults(func=cmd_gen_fixture)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except JitscopeError as exc:
        print(f"jitscope: {exc}", file=sys.stderr)
        return _EXIT_OF_CODE.get(exc.code, EXIT_INVALID)
    except KeyboardInterrupt:
        return 130


def entrypoint() -> None:
    sys.exit(main())
