"""Parse trace documents and resolve phase assignment.

`parse_document` turns raw JSON bytes into an `IRDocument`, collecting
non-fatal oddities (unknown fields, unsorted event lists) as warnings.
Structural problems raise `JitscopeError` with a stable code; nothing
is ever silently dropped or reordered without a warning.

`assign_phases` derives everything downstream stages need: dense node
ids (document order), the instruction table with per-instruction phase
ids, and per-node creation/removal phases attributed from the access
log.  Phase ids equal the declared phase's ordinal; UNASSIGNED (-1)
covers instructions whose function lies outside every declared range.
"""

from __future__ import annotations

import bisect
import json
from dataclasses import dataclass

from .errors import JitscopeError
from .model import (
    EDGE_ACTIONS,
    EDGE_REPLACE,
    SEV_WARNING,
    SUPPORTED_VERSIONS,
    UNASSIGNED,
    AccessRecord,
    EdgeEvent,
    IRDocument,
    IRNode,
    OpcodeUpdate,
    PhaseSpec,
    ValidationIssue,
    ValueUpdate,
    canonical_address,
)

_NODE_KEYS = {"address", "opcode", "mnemonic", "alive", "opcodeUpdates",
              "values", "edges", "accesses"}
_PHASE_KEYS = {"name", "funcIdStart", "funcIdEnd"}
_TOP_KEYS = {"format_version", "functions", "phases", "nodes"}


def _fail(code: str, message: str, path: str) -> JitscopeError:
    return JitscopeError(code, message, path)


def _need(obj: dict, key: str, kind: type, path: str, kind_name: str):
    if key not in obj:
        raise _fail("E_MISSING_FIELD", f"missing required field ({kind_name})",
                    f"{path}/{key}")
    val = obj[key]
    # bool is an int subclass; keep the two apart.
    if not isinstance(val, kind) or (kind is int and isinstance(val, bool)):
        raise _fail("E_MISSING_FIELD",
                    f"expected {kind_name}, got {type(val).__name__}",
                    f"{path}/{key}")
    return val


def _warn_unknown(warnings: list[ValidationIssue], obj: dict,
                  known: set[str], path: str) -> None:
    for key in obj:
        if key not in known:
            warnings.append(ValidationIssue(
                SEV_WARNING, "W_UNKNOWN_FIELD", f"{path}/{key}",
                "unknown field ignored"))


def _sorted_events(warnings: list[ValidationIssue], items: list, label: str,
                   address: str) -> list:
    ids = [it.instr_id for it in items]
    if any(b < a for a, b in zip(ids, ids[1:])):
        warnings.append(ValidationIssue(
            SEV_WARNING, "W_UNSORTED_EVENTS", f"node {address}",
            f"{label} re-sorted into instr_id order"))
        return sorted(items, key=lambda it: it.instr_id)
    return items


def parse_document(data: bytes | str) -> tuple[IRDocument, list[ValidationIssue]]:
    """Decode one trace document; returns the document plus warnings."""
    try:
        raw = json.loads(data)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise _fail("E_MALFORMED_JSON", str(exc), "/") from exc
    if not isinstance(raw, dict):
        raise _fail("E_MALFORMED_JSON", "top-level value is not an object", "/")

    warnings: list[ValidationIssue] = []
    _warn_unknown(warnings, raw, _TOP_KEYS, "")

    version = _need(raw, "format_version", int, "", "integer")
    if version not in SUPPORTED_VERSIONS:
        raise _fail("E_UNSUPPORTED_VERSION",
                    f"format version {version} is not supported",
                    "/format_version")

    functions: dict[int, str] = {}
    for key, symbol in _need(raw, "functions", dict, "", "object").items():
        if not key.isdigit():
            raise _fail("E_MISSING_FIELD",
                        "function key is not a decimal integer",
                        f"/functions/{key}")
        if not isinstance(symbol, str):
            raise _fail("E_MISSING_FIELD",
                        f"expected string, got {type(symbol).__name__}",
                        f"/functions/{key}")
        functions[int(key)] = symbol

    phases = []
    for i, entry in enumerate(_need(raw, "phases", list, "", "array")):
        path = f"/phases/{i}"
        if not isinstance(entry, dict):
            raise _fail("E_MISSING_FIELD", "expected object", path)
        _warn_unknown(warnings, entry, _PHASE_KEYS, path)
        phases.append(PhaseSpec(
            name=_need(entry, "name", str, path, "string"),
            func_id_start=_need(entry, "funcIdStart", int, path, "integer"),
            func_id_end=_need(entry, "funcIdEnd", int, path, "integer")))

    nodes = []
    for i, entry in enumerate(_need(raw, "nodes", list, "", "array")):
        path = f"/nodes/{i}"
        if not isinstance(entry, dict):
            raise _fail("E_MISSING_FIELD", "expected object", path)
        _warn_unknown(warnings, entry, _NODE_KEYS, path)
        address = canonical_address(_need(entry, "address", str, path, "string"))

        accesses = []
        for j, acc in enumerate(_need(entry, "accesses", list, path, "array")):
            apath = f"{path}/accesses/{j}"
            if not isinstance(acc, dict):
                raise _fail("E_MISSING_FIELD", "expected object", apath)
            _warn_unknown(warnings, acc, {"instrId", "funcId"}, apath)
            accesses.append(AccessRecord(
                instr_id=_need(acc, "instrId", int, apath, "integer"),
                func_id=_need(acc, "funcId", int, apath, "integer")))

        opcode_updates = []
        for j, upd in enumerate(_need(entry, "opcodeUpdates", list, path,
                                      "array")):
            upath = f"{path}/opcodeUpdates/{j}"
            if not isinstance(upd, dict):
                raise _fail("E_MISSING_FIELD", "expected object", upath)
            _warn_unknown(warnings, upd, {"opcode", "instrId"}, upath)
            opcode_updates.append(OpcodeUpdate(
                new_opcode=_need(upd, "opcode", str, upath, "string"),
                instr_id=_need(upd, "instrId", int, upath, "integer")))

        value_updates = []
        for j, upd in enumerate(_need(entry, "values", list, path, "array")):
            vpath = f"{path}/values/{j}"
            if not isinstance(upd, dict):
                raise _fail("E_MISSING_FIELD", "expected object", vpath)
            _warn_unknown(warnings, upd, {"value", "instrId"}, vpath)
            value_updates.append(ValueUpdate(
                value=_need(upd, "value", str, vpath, "string"),
                instr_id=_need(upd, "instrId", int, vpath, "integer")))

        edge_events = []
        for j, ev in enumerate(_need(entry, "edges", list, path, "array")):
            epath = f"{path}/edges/{j}"
            if not isinstance(ev, dict):
                raise _fail("E_MISSING_FIELD", "expected object", epath)
            action = _need(ev, "action", str, epath, "string")
            if action not in EDGE_ACTIONS:
                raise _fail("E_MISSING_FIELD",
                            f"action must be one of {'/'.join(EDGE_ACTIONS)}",
                            f"{epath}/action")
            known = {"action", "to", "instrId"}
            old_to = None
            if action == EDGE_REPLACE:
                known.add("oldTo")
                old_to = canonical_address(
                    _need(ev, "oldTo", str, epath, "string"))
            _warn_unknown(warnings, ev, known, epath)
            edge_events.append(EdgeEvent(
                action=action,
                dst_address=canonical_address(
                    _need(ev, "to", str, epath, "string")),
                instr_id=_need(ev, "instrId", int, epath, "integer"),
                old_dst_address=old_to))

        mnemonic = entry.get("mnemonic", "")
        if not isinstance(mnemonic, str):
            raise _fail("E_MISSING_FIELD",
                        f"expected string, got {type(mnemonic).__name__}",
                        f"{path}/mnemonic")

        nodes.append(IRNode(
            address=address,
            opcode=_need(entry, "opcode", str, path, "string"),
            mnemonic=mnemonic,
            alive=_need(entry, "alive", bool, path, "boolean"),
            accesses=tuple(_sorted_events(warnings, accesses, "accesses",
                                          address)),
            opcode_updates=tuple(_sorted_events(warnings, opcode_updates,
                                                "opcodeUpdates", address)),
            value_updates=tuple(_sorted_events(warnings, value_updates,
                                               "values", address)),
            edge_events=tuple(_sorted_events(warnings, edge_events, "edges",
                                             address))))

    doc = IRDocument(format_version=version, functions=functions,
                     phases=tuple(phases), nodes=tuple(nodes))
    return doc, warnings


@dataclass(frozen=True)
class InstructionRow:
    instr_id: int
    func_id: int
    phase_id: int  # UNASSIGNED (-1) when outside every declared range


@dataclass(frozen=True)
class ResolvedDataset:
    """Phase-resolved view of a document; node ids are dense and equal
    the node's position in document order."""

    nodes: tuple[IRNode, ...]
    address_index: dict[str, int]
    instructions: tuple[InstructionRow, ...]
    phases: tuple[PhaseSpec, ...]
    functions: dict[int, str]
    created_phase: tuple[int, ...]
    removed_phase: tuple[int | None, ...]  # None while the node is alive
    warnings: tuple[ValidationIssue, ...]

    @property
    def node_count(self) -> int:
        return len(self.nodes)

    @property
    def phase_count(self) -> int:
        return len(self.phases)

    def phase_of_instr(self) -> dict[int, int]:
        return {row.instr_id: row.phase_id for row in self.instructions}


def _phase_lookup(phases: tuple[PhaseSpec, ...]):
    ordered = sorted(range(len(phases)), key=lambda i: phases[i].func_id_start)
    starts = [phases[i].func_id_start for i in ordered]

    def lookup(func_id: int) -> int:
        pos = bisect.bisect_right(starts, func_id) - 1
        if pos >= 0:
            idx = ordered[pos]
            if func_id <= phases[idx].func_id_end:
                return idx
        return UNASSIGNED

    return lookup


def assign_phases(doc: IRDocument,
                  warnings: list[ValidationIssue] | None = None
                  ) -> ResolvedDataset:
    """Resolve node ids, the instruction table, and phase attribution.

    `warnings` (typically the parse warnings) is extended with
    W_PHASE_ORDER when declared phases are not temporally coherent.
    Conflicting instr->func mappings raise E_CONFLICTING_FUNC_ID; any
    document that validates without errors cannot trip that.
    """
    carried = list(warnings) if warnings is not None else []
    lookup = _phase_lookup(doc.phases)

    instr_func: dict[int, int] = {}
    for node in doc.nodes:
        for acc in node.accesses:
            prior = instr_func.get(acc.instr_id)
            if prior is None:
                instr_func[acc.instr_id] = acc.func_id
            elif prior != acc.func_id:
                raise JitscopeError(
                    "E_CONFLICTING_FUNC_ID",
                    f"instr {acc.instr_id} maps to both function {prior} "
                    f"and {acc.func_id}")

    instructions = tuple(
        InstructionRow(instr_id=i, func_id=f, phase_id=lookup(f))
        for i, f in sorted(instr_func.items()))

    # Temporal coherence: within each declared phase, the earliest
    # instruction should not precede an earlier phase's earliest.
    first_instr: dict[int, int] = {}
    for row in instructions:
        if row.phase_id != UNASSIGNED and row.phase_id not in first_instr:
            first_instr[row.phase_id] = row.instr_id
    prev = None
    for pid in sorted(first_instr):
        if prev is not None and first_instr[pid] < prev:
            carried.append(ValidationIssue(
                SEV_WARNING, "W_PHASE_ORDER", f"phase {doc.phases[pid].name}",
                "phase contains instructions earlier than a preceding phase"))
        prev = max(prev, first_instr[pid]) if prev is not None \
            else first_instr[pid]

    phase_of = {row.instr_id: row.phase_id for row in instructions}
    created = []
    removed: list[int | None] = []
    for node in doc.nodes:
        ids = [acc.instr_id for acc in node.accesses]
        created.append(phase_of[min(ids)] if ids else UNASSIGNED)
        if node.alive or not ids:
            removed.append(None)
        else:
            removed.append(phase_of[max(ids)])

    return ResolvedDataset(
        nodes=doc.nodes,
        address_index={n.address: i for i, n in enumerate(doc.nodes)},
        instructions=instructions,
        phases=doc.phases,
        functions=dict(doc.functions),
        created_phase=tuple(created),
        removed_phase=tuple(removed),
        warnings=tuple(carried))
