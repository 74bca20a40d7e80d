"""Domain model for JIT compiler IR traces.

A trace document describes graph nodes recorded across an optimization
run: every node carries its event history (opcode rewrites, value
annotations, edge changes) plus the access log tying each event to an
instrumentation counter and the function that touched the node.  Phases
are declared as inclusive function-id ranges; instructions whose
function falls outside every range belong to the UNASSIGNED pseudo
phase, which sorts before phase 0.

All types here are immutable after construction and safe to share
across threads.  `validate_document` is a pure function from a document
to a list of issues; it never mutates and never raises.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

# Pseudo phase for instructions outside every declared function range.
UNASSIGNED = -1
UNASSIGNED_NAME = "(unassigned)"

SUPPORTED_VERSIONS = (1,)

EDGE_ADD = "add"
EDGE_REMOVE = "remove"
EDGE_REPLACE = "replace"
EDGE_ACTIONS = (EDGE_ADD, EDGE_REMOVE, EDGE_REPLACE)

SEV_ERROR = "error"
SEV_WARNING = "warning"

_HEX_ADDRESS = re.compile(r"0[xX][0-9a-fA-F]+")


def canonical_address(text: str) -> str:
    """Lowercase hex-looking addresses; leave anything else opaque."""
    if _HEX_ADDRESS.fullmatch(text):
        return "0x" + text[2:].lower()
    return text


@dataclass(frozen=True)
class AccessRecord:
    instr_id: int
    func_id: int


@dataclass(frozen=True)
class OpcodeUpdate:
    new_opcode: str
    instr_id: int


@dataclass(frozen=True)
class ValueUpdate:
    value: str
    instr_id: int


@dataclass(frozen=True)
class EdgeEvent:
    action: str
    dst_address: str
    instr_id: int
    # Only replace events carry the edge's previous target.
    old_dst_address: str | None = None


@dataclass(frozen=True)
class PhaseSpec:
    name: str
    func_id_start: int
    func_id_end: int


@dataclass(frozen=True)
class IRNode:
    address: str
    opcode: str
    mnemonic: str
    alive: bool
    accesses: tuple[AccessRecord, ...]
    opcode_updates: tuple[OpcodeUpdate, ...] = ()
    value_updates: tuple[ValueUpdate, ...] = ()
    edge_events: tuple[EdgeEvent, ...] = ()


@dataclass(frozen=True)
class IRDocument:
    format_version: int
    functions: dict[int, str]
    phases: tuple[PhaseSpec, ...]
    nodes: tuple[IRNode, ...]


@dataclass(frozen=True)
class ValidationIssue:
    severity: str
    code: str
    locator: str
    message: str


def _check_sorted(issues: list[ValidationIssue], node: IRNode, label: str,
                  instr_ids: list[int]) -> None:
    if any(b < a for a, b in zip(instr_ids, instr_ids[1:])):
        issues.append(ValidationIssue(
            SEV_ERROR, "E_UNSORTED_EVENTS", f"node {node.address}",
            f"{label} instr_ids are not non-decreasing"))


def validate_document(doc: IRDocument) -> list[ValidationIssue]:
    """Check cross-cutting invariants; order of issues is deterministic.

    Errors mean downstream stages may not run; warnings are advisory.
    A document with zero errors is guaranteed to survive phase
    assignment and loading.
    """
    issues: list[ValidationIssue] = []

    if doc.format_version not in SUPPORTED_VERSIONS:
        issues.append(ValidationIssue(
            SEV_ERROR, "E_UNSUPPORTED_VERSION", "/format_version",
            f"unsupported format version {doc.format_version!r}"))

    # Phase declarations: well-formed ranges, unique names, no overlap.
    seen_names: dict[str, int] = {}
    for i, phase in enumerate(doc.phases):
        loc = f"phase {phase.name}"
        if phase.func_id_start < 0 or phase.func_id_end < phase.func_id_start:
            issues.append(ValidationIssue(
                SEV_ERROR, "E_PHASE_RANGE", loc,
                f"bad function-id range [{phase.func_id_start}, "
                f"{phase.func_id_end}]"))
        if phase.name in seen_names:
            issues.append(ValidationIssue(
                SEV_ERROR, "E_DUPLICATE_PHASE_NAME", loc,
                f"phase name also used at index {seen_names[phase.name]}"))
        else:
            seen_names[phase.name] = i
    for i, a in enumerate(doc.phases):
        for b in doc.phases[i + 1:]:
            if a.func_id_start <= b.func_id_end and b.func_id_start <= a.func_id_end:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_PHASE_OVERLAP", f"phase {a.name}",
                    f"function-id range overlaps phase {b.name}"))

    # Address uniqueness.
    seen_addr: set[str] = set()
    for node in doc.nodes:
        if node.address in seen_addr:
            issues.append(ValidationIssue(
                SEV_ERROR, "E_DUPLICATE_ADDRESS", f"node {node.address}",
                "address appears more than once"))
        seen_addr.add(node.address)

    # instr_id -> func_id must be consistent across the whole document.
    instr_func: dict[int, tuple[int, str]] = {}
    conflicted: set[int] = set()

    for node in doc.nodes:
        loc = f"node {node.address}"

        if not node.accesses:
            issues.append(ValidationIssue(
                SEV_ERROR, "E_NO_ACCESSES", loc,
                "node has no access records"))
        if not node.opcode:
            issues.append(ValidationIssue(
                SEV_ERROR, "E_EMPTY_OPCODE", loc, "initial opcode is empty"))

        _check_sorted(issues, node, "accesses",
                      [a.instr_id for a in node.accesses])
        _check_sorted(issues, node, "opcodeUpdates",
                      [u.instr_id for u in node.opcode_updates])
        _check_sorted(issues, node, "values",
                      [u.instr_id for u in node.value_updates])
        _check_sorted(issues, node, "edges",
                      [e.instr_id for e in node.edge_events])

        access_ids = set()
        for acc in node.accesses:
            if acc.instr_id < 0 or acc.func_id < 0:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_NEGATIVE_ID", loc,
                    f"access ({acc.instr_id}, {acc.func_id}) has a negative id"))
            access_ids.add(acc.instr_id)
            if acc.func_id not in doc.functions:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_UNKNOWN_FUNC_ID", loc,
                    f"access at instr {acc.instr_id} names unknown function "
                    f"{acc.func_id}"))
            if acc.instr_id in conflicted:
                continue
            prior = instr_func.get(acc.instr_id)
            if prior is None:
                instr_func[acc.instr_id] = (acc.func_id, node.address)
            elif prior[0] != acc.func_id:
                conflicted.add(acc.instr_id)
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_CONFLICTING_FUNC_ID", loc,
                    f"instr {acc.instr_id} maps to function {acc.func_id} "
                    f"here but {prior[0]} at node {prior[1]}"))

        for upd in node.opcode_updates:
            if not upd.new_opcode:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_EMPTY_OPCODE", loc,
                    f"opcode update at instr {upd.instr_id} is empty"))
            if upd.instr_id not in access_ids:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_UPDATE_WITHOUT_ACCESS", loc,
                    f"opcode update at instr {upd.instr_id} has no matching "
                    "access record"))
        for upd in node.value_updates:
            if upd.instr_id not in access_ids:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_UPDATE_WITHOUT_ACCESS", loc,
                    f"value update at instr {upd.instr_id} has no matching "
                    "access record"))

        for ev in node.edge_events:
            if ev.dst_address not in seen_addr:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_UNKNOWN_EDGE_TARGET", loc,
                    f"edge {ev.action} at instr {ev.instr_id} targets unknown "
                    f"address {ev.dst_address}"))
            if ev.action == EDGE_REPLACE:
                if ev.old_dst_address is not None \
                        and ev.old_dst_address not in seen_addr:
                    issues.append(ValidationIssue(
                        SEV_ERROR, "E_UNKNOWN_EDGE_TARGET", loc,
                        f"edge replace at instr {ev.instr_id} names unknown "
                        f"old target {ev.old_dst_address}"))
                if ev.old_dst_address == ev.dst_address:
                    issues.append(ValidationIssue(
                        SEV_ERROR, "E_REPLACE_SAME_TARGET", loc,
                        f"edge replace at instr {ev.instr_id} replaces "
                        f"{ev.dst_address} with itself"))
            if ev.instr_id not in access_ids:
                issues.append(ValidationIssue(
                    SEV_ERROR, "E_UPDATE_WITHOUT_ACCESS", loc,
                    f"edge {ev.action} at instr {ev.instr_id} has no matching "
                    "access record"))

    # Removing an edge that is not present is tolerated (the snapshot
    # engine records it as an anomaly) but worth surfacing up front.
    addr_ok = {n.address for n in doc.nodes}
    for node in doc.nodes:
        held: dict[str, int] = {}
        for ev in node.edge_events:
            if ev.dst_address not in addr_ok:
                continue
            if ev.action == EDGE_ADD:
                held[ev.dst_address] = held.get(ev.dst_address, 0) + 1
            elif ev.action == EDGE_REMOVE:
                if held.get(ev.dst_address, 0) > 0:
                    held[ev.dst_address] -= 1
                else:
                    issues.append(ValidationIssue(
                        SEV_WARNING, "A_REMOVE_MISSING_EDGE",
                        f"node {node.address}",
                        f"remove at instr {ev.instr_id} targets absent edge "
                        f"to {ev.dst_address}"))
            elif ev.action == EDGE_REPLACE:
                old = ev.old_dst_address
                if old is not None and old in addr_ok:
                    if held.get(old, 0) > 0:
                        held[old] -= 1
                    else:
                        issues.append(ValidationIssue(
                            SEV_WARNING, "A_REMOVE_MISSING_EDGE",
                            f"node {node.address}",
                            f"replace at instr {ev.instr_id} targets absent "
                            f"edge to {old}"))
                held[ev.dst_address] = held.get(ev.dst_address, 0) + 1
    return issues
