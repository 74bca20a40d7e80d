"""HTTP facade over a loaded dataset.

Stdlib threading server, JSON in and out.  Reads are served from an
immutable in-memory dataset; an upload builds the replacement dataset
off to the side, persists it, then swaps one attribute, so concurrent
readers always see a complete dataset.  Uploads are single-flight: a
second concurrent upload gets 409 E_BUSY rather than queueing.

Payload builders are plain module functions so tests can compare an
HTTP response against the same serialization computed directly.
"""

from __future__ import annotations

import datetime
import hashlib
import json
import mimetypes
import re
import threading
from dataclasses import dataclass
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer
from pathlib import Path
from urllib.parse import parse_qs, unquote, urlparse

from . import engine, export, store
from .errors import JitscopeError
from .ingest import ResolvedDataset, assign_phases, parse_document
from .model import (
    SEV_ERROR,
    UNASSIGNED,
    UNASSIGNED_NAME,
    ValidationIssue,
    validate_document,
)

DEFAULT_PORT = 8080
DEFAULT_MAX_UPLOAD = 64 * 1024 * 1024

_STATUS_OF = {
    "E_BAD_ARGS": 400, "E_BAD_RANGE": 400,
    "E_NO_SUCH_PHASE": 404, "E_NO_SUCH_NODE": 404, "E_NO_SUCH_TABLE": 404,
    "E_NOT_FOUND": 404,
    "E_NO_DATASET": 409, "E_BUSY": 409,
    "E_TOO_LARGE": 413,
    "E_MALFORMED_JSON": 422, "E_MISSING_FIELD": 422,
    "E_UNSUPPORTED_VERSION": 422, "E_VALIDATION": 422,
    "E_CONFLICTING_FUNC_ID": 422,
}

_SNAPSHOT_RE = re.compile(r"^/api/snapshot/(-?\d+)$")
_DIFF_RE = re.compile(r"^/api/diff/(-?\d+)/(-?\d+)$")
_NODE_RE = re.compile(r"^/api/nodes/(\d+)$")
_EXPORT_RE = re.compile(r"^/api/export/([A-Za-z0-9_.-]+)\.csv$")
_SNAPSHOT_CSV_RE = re.compile(r"^snapshot_(nodes|edges)_(-?\d+)$")


@dataclass(frozen=True)
class AppState:
    dataset: ResolvedDataset | None
    status: dict


def issue_dict(issue: ValidationIssue) -> dict:
    return {"severity": issue.severity, "code": issue.code,
            "locator": issue.locator, "message": issue.message}


def phases_payload(ds: ResolvedDataset) -> list[dict]:
    entries = [{"phase_id": UNASSIGNED, "name": UNASSIGNED_NAME,
                "ordinal": UNASSIGNED, "func_id_start": None,
                "func_id_end": None}]
    for i, p in enumerate(ds.phases):
        entries.append({"phase_id": i, "name": p.name, "ordinal": i,
                        "func_id_start": p.func_id_start,
                        "func_id_end": p.func_id_end})
    return entries


def snapshot_payload(snap: engine.GraphSnapshot) -> dict:
    return {
        "phase": snap.phase,
        "nodes": [{"node_id": n.node_id, "address": n.address,
                   "effective_opcode": n.effective_opcode,
                   "mnemonic": n.mnemonic, "current_value": n.current_value,
                   "status": n.status} for n in snap.nodes],
        "edges": [{"src": src, "dst": dst,
                   "multiplicity": snap.edges[(src, dst)]}
                  for src, dst in sorted(snap.edges)],
        "anomalies": [{"instr_id": a.instr_id, "src": a.src, "dst": a.dst}
                      for a in snap.anomalies],
    }


def diff_payload(d: engine.PhaseDiff) -> dict:
    return {
        "from_phase": d.from_phase,
        "to_phase": d.to_phase,
        "nodes_added": sorted(d.nodes_added),
        "nodes_removed": sorted(d.nodes_removed),
        "opcode_changed": [{"node_id": i, "old": old, "new": new}
                           for i, old, new in sorted(d.opcode_changed)],
        "edges_added": [{"src": src, "dst": dst,
                         "multiplicity": d.edges_added[(src, dst)]}
                        for src, dst in sorted(d.edges_added)],
        "edges_removed": [{"src": src, "dst": dst,
                           "multiplicity": d.edges_removed[(src, dst)]}
                          for src, dst in sorted(d.edges_removed)],
        "values_appended": [{"node_id": i, "value": v}
                            for i, v in d.values_appended],
    }


def summary_payload(ds: ResolvedDataset) -> dict:
    return {"phases": [
        {"phase_id": s.phase_id, "name": s.name, "generated": s.generated,
         "removed": s.removed, "opcode_updates": s.opcode_updates,
         "value_updates": s.value_updates, "edge_adds": s.edge_adds,
         "edge_removes": s.edge_removes, "edge_replaces": s.edge_replaces}
        for s in engine.summarize_all(ds)]}


def node_payload(ds: ResolvedDataset, node_id: int, phase: int) -> dict:
    """Detail plus the node's activity within exactly `phase`."""
    if not 0 <= node_id < ds.node_count:
        raise JitscopeError("E_NO_SUCH_NODE", f"no node with id {node_id}")
    snap = engine.snapshot_at(ds, phase)
    node = ds.nodes[node_id]
    snap_node = next((n for n in snap.nodes if n.node_id == node_id), None)
    phase_of = ds.phase_of_instr()

    instr, func, acc_phase = engine.last_access(ds, node_id)
    out = {
        "node_id": node_id,
        "address": node.address,
        "initial_opcode": node.opcode,
        "mnemonic": node.mnemonic,
        "alive": node.alive,
        "phase": phase,
        "present": snap_node is not None,
        "effective_opcode": snap_node.effective_opcode if snap_node else None,
        "current_value": snap_node.current_value if snap_node else None,
        "status": snap_node.status if snap_node else None,
        "created_phase": ds.created_phase[node_id],
        "removed_phase": ds.removed_phase[node_id],
        "value_changes": [
            {"instr_id": u.instr_id, "value": u.value}
            for u in node.value_updates if phase_of[u.instr_id] == phase],
        "edge_changes": [
            {"instr_id": ev.instr_id, "action": ev.action,
             "dst": ds.address_index[ev.dst_address],
             "old_dst": None if ev.old_dst_address is None
             else ds.address_index[ev.old_dst_address]}
            for ev in node.edge_events if phase_of[ev.instr_id] == phase],
        "last_access": {
            "instr_id": instr, "func_id": func,
            "symbol": ds.functions[func], "phase_id": acc_phase,
            "phase_name": engine.phase_name(ds, acc_phase)},
    }
    return out


def _utc_now() -> str:
    return datetime.datetime.now(datetime.timezone.utc) \
        .isoformat(timespec="seconds")


def _initial_state(db_path: str) -> AppState:
    if db_path and Path(db_path).exists():
        conn = store.open_database(db_path)
        try:
            if store.is_loaded(conn):
                return AppState(dataset=store.read_dataset(conn),
                                status=store.dataset_status(conn))
        finally:
            conn.close()
    return AppState(dataset=None, status={"loaded": False})


class JitscopeServer(ThreadingHTTPServer):
    daemon_threads = True

    def __init__(self, address: tuple[str, int], db_path: str,
                 ui_dir: str | None = None,
                 max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
                 verbose: bool = False):
        super().__init__(address, _Handler)
        self.db_path = db_path
        self.ui_dir = Path(ui_dir).resolve() if ui_dir else None
        self.max_upload_bytes = max_upload_bytes
        self.verbose = verbose
        self.upload_lock = threading.Lock()
        self.state = _initial_state(db_path)


class _Handler(BaseHTTPRequestHandler):
    protocol_version = "HTTP/1.1"
    server: JitscopeServer

    def log_message(self, format, *args):
        if self.server.verbose:
            super().log_message(format, *args)

    # ------------------------------------------------------------------
    # plumbing

    def _send(self, code: int, body: bytes, content_type: str) -> None:
        self.send_response(code)
        self.send_header("Content-Type", content_type)
        self.send_header("Content-Length", str(len(body)))
        self.end_headers()
        self.wfile.write(body)

    def _json(self, code: int, obj) -> None:
        body = json.dumps(obj, sort_keys=True,
                          separators=(",", ":")).encode("utf-8")
        self._send(code, body, "application/json; charset=utf-8")

    def _error(self, code: str, message: str, http: int | None = None,
               extra: dict | None = None) -> None:
        obj = {"error": {"code": code, "message": message}}
        if extra:
            obj.update(extra)
        self._json(http or _STATUS_OF.get(code, 500), obj)

    def _dataset(self) -> ResolvedDataset:
        ds = self.server.state.dataset
        if ds is None:
            raise JitscopeError("E_NO_DATASET", "no dataset loaded")
        return ds

    def _phase_arg(self, query: dict, ds: ResolvedDataset) -> int:
        if "phase" in query:
            try:
                return int(query["phase"][0])
            except ValueError:
                raise JitscopeError("E_BAD_ARGS",
                                    "phase must be an integer") from None
        return ds.phase_count - 1 if ds.phase_count else UNASSIGNED

    # ------------------------------------------------------------------
    # routing

    def do_GET(self):
        try:
            self._get()
        except JitscopeError as exc:
            self._error(exc.code, exc.message)
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as exc:  # pragma: no cover - defensive
            self._error("E_INTERNAL", repr(exc), http=500)

    def do_POST(self):
        try:
            if urlparse(self.path).path == "/api/upload":
                self._upload()
            else:
                self._error("E_NOT_FOUND", f"no such endpoint: {self.path}")
        except JitscopeError as exc:
            self._error(exc.code, exc.message)
        except (BrokenPipeError, ConnectionResetError):
            pass
        except Exception as exc:  # pragma: no cover - defensive
            self._error("E_INTERNAL", repr(exc), http=500)

    def _get(self):
        url = urlparse(self.path)
        path = url.path
        query = parse_qs(url.query)

        if path == "/api/status":
            return self._json(200, self.server.state.status)
        if path == "/api/phases":
            return self._json(200, phases_payload(self._dataset()))
        if path == "/api/summary":
            return self._json(200, summary_payload(self._dataset()))
        m = _SNAPSHOT_RE.match(path)
        if m:
            ds = self._dataset()
            snap = engine.snapshot_at(ds, int(m.group(1)))
            return self._json(200, snapshot_payload(snap))
        m = _DIFF_RE.match(path)
        if m:
            ds = self._dataset()
            d = engine.diff(ds, int(m.group(1)), int(m.group(2)))
            return self._json(200, diff_payload(d))
        m = _NODE_RE.match(path)
        if m:
            ds = self._dataset()
            phase = self._phase_arg(query, ds)
            return self._json(200, node_payload(ds, int(m.group(1)), phase))
        if path == "/api/search":
            ds = self._dataset()
            if "q" not in query:
                raise JitscopeError("E_BAD_ARGS", "missing query parameter q")
            phase = self._phase_arg(query, ds)
            return self._json(200, engine.search(ds, query["q"][0], phase))
        m = _EXPORT_RE.match(path)
        if m:
            return self._export_csv(m.group(1))
        if path.startswith("/api/"):
            return self._error("E_NOT_FOUND", f"no such endpoint: {path}")
        return self._static(path)

    # ------------------------------------------------------------------
    # endpoints

    def _export_csv(self, name: str) -> None:
        ds = self._dataset()
        m = _SNAPSHOT_CSV_RE.match(name)
        if m:
            snap = engine.snapshot_at(ds, int(m.group(2)))
            text = export.snapshot_nodes_csv(snap) if m.group(1) == "nodes" \
                else export.snapshot_edges_csv(snap)
        elif name == "phase_summary":
            text = export.summary_csv(ds)
        elif name in export.TABLE_LAYOUT:
            conn = store.open_database(self.server.db_path)
            try:
                text = export.table_csv(conn, name)
            finally:
                conn.close()
        else:
            raise JitscopeError("E_NO_SUCH_TABLE",
                                f"no exportable object named {name!r}")
        self._send(200, text.encode("utf-8"), "text/csv; charset=utf-8")

    def _upload(self) -> None:
        srv = self.server
        if not srv.upload_lock.acquire(blocking=False):
            return self._error("E_BUSY", "another upload is in progress")
        try:
            length = self.headers.get("Content-Length")
            if length is None or not length.isdigit():
                return self._error("E_BAD_ARGS",
                                   "Content-Length header required")
            size = int(length)
            if size > srv.max_upload_bytes:
                return self._error(
                    "E_TOO_LARGE",
                    f"body of {size} bytes exceeds limit of "
                    f"{srv.max_upload_bytes}")
            body = self.rfile.read(size)

            query = parse_qs(urlparse(self.path).query)
            source_name = query.get("name", ["upload.json"])[0]

            try:
                doc, warnings = parse_document(body)
            except JitscopeError as exc:
                return self._error(exc.code, exc.message, extra={
                    "issues": [issue_dict(ValidationIssue(
                        SEV_ERROR, exc.code, exc.path or "/",
                        exc.message))]})
            issues = validate_document(doc)
            if any(i.severity == SEV_ERROR for i in issues):
                return self._error(
                    "E_VALIDATION", "document failed validation",
                    extra={"issues": [issue_dict(i) for i in issues]})
            warnings += [i for i in issues if i.severity != SEV_ERROR]
            ds = assign_phases(doc, warnings)

            ingested_at = _utc_now()
            content_hash = hashlib.sha256(body).hexdigest()
            conn = store.open_database(srv.db_path)
            try:
                store.load(ds, conn, source_name=source_name,
                           content_hash=content_hash,
                           ingested_at=ingested_at, replace=True)
            finally:
                conn.close()

            status = {
                "loaded": True, "source_name": source_name,
                "content_hash": content_hash, "ingested_at": ingested_at,
                "node_count": ds.node_count,
                "phase_count": ds.phase_count,
                "instruction_count": len(ds.instructions),
            }
            srv.state = AppState(dataset=ds, status=status)
            response = dict(status)
            response["warnings"] = [issue_dict(w) for w in ds.warnings]
            self._json(200, response)
        finally:
            srv.upload_lock.release()

    def _static(self, path: str) -> None:
        root = self.server.ui_dir
        if root is None:
            return self._error("E_NOT_FOUND", "no UI bundle configured")
        rel = unquote(path).lstrip("/") or "index.html"
        full = (root / rel).resolve()
        if full != root and root not in full.parents:
            return self._error("E_NOT_FOUND", "path outside UI directory")
        if full.is_dir():
            full = full / "index.html"
        if not full.is_file():
            return self._error("E_NOT_FOUND", f"no such file: {rel}")
        ctype = mimetypes.guess_type(str(full))[0] or "application/octet-stream"
        self._send(200, full.read_bytes(), ctype)


def serve(host: str, port: int, db_path: str, ui_dir: str | None = None,
          max_upload_bytes: int = DEFAULT_MAX_UPLOAD,
          verbose: bool = True) -> None:
    """Blocking entry point used by the command line."""
    server = JitscopeServer((host, port), db_path, ui_dir=ui_dir,
                            max_upload_bytes=max_upload_bytes,
                            verbose=verbose)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()
