"""Phase-indexed queries over a resolved dataset.

Everything here is derived by replaying event histories against the
phase timeline: end-of-phase snapshots, per-phase activity summaries,
pairwise diffs, and the small lookups the evaluation tooling needs
(value-change phases, last access, text search).  All functions are
pure; snapshots of the same dataset and phase are always identical.

Replay rule: an event belongs to phase p when its instruction's phase
ordinal is <= p, with UNASSIGNED (-1) ordered before phase 0.  Within a
node, events apply in ascending instr_id order, ties in list order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import JitscopeError
from .ingest import ResolvedDataset
from .model import (
    EDGE_ADD,
    EDGE_REMOVE,
    EDGE_REPLACE,
    UNASSIGNED,
    UNASSIGNED_NAME,
)

STATUS_ALIVE = "alive"
STATUS_REMOVED = "removed_this_phase"
STATUS_GENERATED = "alive_and_generated_this_phase"
STATUS_EPHEMERAL = "generated_this_phase"


@dataclass(frozen=True)
class SnapshotNode:
    node_id: int
    address: str
    effective_opcode: str
    mnemonic: str
    current_value: str | None
    status: str


@dataclass(frozen=True)
class EdgeAnomaly:
    """A remove (or replace) that targeted an edge not currently held."""
    instr_id: int
    src: int
    dst: int


@dataclass(frozen=True)
class GraphSnapshot:
    phase: int
    nodes: tuple[SnapshotNode, ...]
    edges: dict[tuple[int, int], int]
    anomalies: tuple[EdgeAnomaly, ...]


@dataclass(frozen=True)
class PhaseSummary:
    phase_id: int
    name: str
    generated: int
    removed: int
    opcode_updates: int
    value_updates: int
    edge_adds: int
    edge_removes: int
    edge_replaces: int


@dataclass(frozen=True)
class PhaseDiff:
    from_phase: int
    to_phase: int
    nodes_added: frozenset[int]
    nodes_removed: frozenset[int]
    opcode_changed: frozenset[tuple[int, str, str]]
    edges_added: dict[tuple[int, int], int]
    edges_removed: dict[tuple[int, int], int]
    values_appended: tuple[tuple[int, str], ...]


def _check_phase(ds: ResolvedDataset, phase: int) -> None:
    if phase != UNASSIGNED and not 0 <= phase < ds.phase_count:
        raise JitscopeError("E_NO_SUCH_PHASE",
                            f"phase {phase} is out of range")


def phase_name(ds: ResolvedDataset, phase: int) -> str:
    return UNASSIGNED_NAME if phase == UNASSIGNED else ds.phases[phase].name


def snapshot_at(ds: ResolvedDataset, phase: int) -> GraphSnapshot:
    """Graph state at the end of `phase`.

    A node is present when it was created by then and either is still
    alive or is removed in this exact phase (removed nodes stay visible
    through their removal phase).  Edge histories of every node created
    by `phase` replay in full, then the multiset is filtered to pairs
    whose endpoints are both present.
    """
    _check_phase(ds, phase)
    phase_of = ds.phase_of_instr()

    def in_scope(i: int) -> bool:
        return ds.created_phase[i] <= phase

    def present(i: int) -> bool:
        r = ds.removed_phase[i]
        return in_scope(i) and (r is None or r >= phase)

    edges: dict[tuple[int, int], int] = {}
    anomalies: list[EdgeAnomaly] = []
    for src, node in enumerate(ds.nodes):
        if not in_scope(src):
            continue
        for ev in node.edge_events:
            if phase_of[ev.instr_id] > phase:
                continue
            dst = ds.address_index[ev.dst_address]
            if ev.action == EDGE_ADD:
                edges[(src, dst)] = edges.get((src, dst), 0) + 1
                continue
            old = dst if ev.action == EDGE_REMOVE \
                else ds.address_index[ev.old_dst_address]
            if edges.get((src, old), 0) > 0:
                edges[(src, old)] -= 1
                if edges[(src, old)] == 0:
                    del edges[(src, old)]
            else:
                anomalies.append(EdgeAnomaly(ev.instr_id, src, old))
            if ev.action == EDGE_REPLACE:
                edges[(src, dst)] = edges.get((src, dst), 0) + 1

    visible = [i for i in range(ds.node_count) if present(i)]
    vis_set = set(visible)
    edges = {k: v for k, v in edges.items()
             if k[0] in vis_set and k[1] in vis_set}

    nodes = []
    for i in visible:
        node = ds.nodes[i]
        opcode = node.opcode
        for upd in node.opcode_updates:
            if phase_of[upd.instr_id] <= phase:
                opcode = upd.new_opcode
        value = None
        for upd in node.value_updates:
            if phase_of[upd.instr_id] <= phase:
                value = upd.value
        born = ds.created_phase[i] == phase
        dying = ds.removed_phase[i] == phase
        if born and dying:
            status = STATUS_EPHEMERAL
        elif born:
            status = STATUS_GENERATED
        elif dying:
            status = STATUS_REMOVED
        else:
            status = STATUS_ALIVE
        nodes.append(SnapshotNode(
            node_id=i, address=node.address, effective_opcode=opcode,
            mnemonic=node.mnemonic, current_value=value, status=status))

    anomalies.sort(key=lambda a: (a.instr_id, a.src, a.dst))
    return GraphSnapshot(phase=phase, nodes=tuple(nodes), edges=edges,
                         anomalies=tuple(anomalies))


def summarize_phase(ds: ResolvedDataset, phase: int) -> PhaseSummary:
    """Activity counts attributed to exactly `phase`."""
    _check_phase(ds, phase)
    phase_of = ds.phase_of_instr()
    generated = sum(1 for p in ds.created_phase if p == phase)
    removed = sum(1 for p in ds.removed_phase if p == phase)
    opcode_updates = value_updates = 0
    adds = removes = replaces = 0
    for node in ds.nodes:
        opcode_updates += sum(1 for u in node.opcode_updates
                              if phase_of[u.instr_id] == phase)
        value_updates += sum(1 for u in node.value_updates
                             if phase_of[u.instr_id] == phase)
        for ev in node.edge_events:
            if phase_of[ev.instr_id] != phase:
                continue
            if ev.action == EDGE_ADD:
                adds += 1
            elif ev.action == EDGE_REMOVE:
                removes += 1
            else:
                replaces += 1
    return PhaseSummary(
        phase_id=phase, name=phase_name(ds, phase), generated=generated,
        removed=removed, opcode_updates=opcode_updates,
        value_updates=value_updates, edge_adds=adds, edge_removes=removes,
        edge_replaces=replaces)


def summarize_all(ds: ResolvedDataset) -> list[PhaseSummary]:
    """Summaries for UNASSIGNED followed by every declared phase."""
    return [summarize_phase(ds, p)
            for p in [UNASSIGNED, *range(ds.phase_count)]]


def _edge_multiset_diff(before: dict[tuple[int, int], int],
                        after: dict[tuple[int, int], int]
                        ) -> tuple[dict, dict]:
    added: dict[tuple[int, int], int] = {}
    removed: dict[tuple[int, int], int] = {}
    for key in set(before) | set(after):
        delta = after.get(key, 0) - before.get(key, 0)
        if delta > 0:
            added[key] = delta
        elif delta < 0:
            removed[key] = -delta
    return added, removed


def diff(ds: ResolvedDataset, from_phase: int, to_phase: int) -> PhaseDiff:
    """What changed over the half-open phase interval (from, to].

    Node membership uses creation/removal attribution directly, so a
    node created and removed strictly inside the interval shows up in
    both added and removed.  Edge changes are the multiset difference
    of the two endpoint snapshots.
    """
    _check_phase(ds, from_phase)
    _check_phase(ds, to_phase)
    if from_phase > to_phase:
        raise JitscopeError(
            "E_BAD_RANGE",
            f"from_phase {from_phase} is after to_phase {to_phase}")

    def inside(p: int | None) -> bool:
        return p is not None and from_phase < p <= to_phase

    nodes_added = frozenset(
        i for i in range(ds.node_count) if inside(ds.created_phase[i]))
    nodes_removed = frozenset(
        i for i in range(ds.node_count) if inside(ds.removed_phase[i]))

    before = snapshot_at(ds, from_phase)
    after = snapshot_at(ds, to_phase)
    edges_added, edges_removed = _edge_multiset_diff(before.edges, after.edges)

    ops_before = {n.node_id: n.effective_opcode for n in before.nodes}
    ops_after = {n.node_id: n.effective_opcode for n in after.nodes}
    opcode_changed = frozenset(
        (i, ops_before[i], ops_after[i])
        for i in ops_before.keys() & ops_after.keys()
        if ops_before[i] != ops_after[i])

    phase_of = ds.phase_of_instr()
    appended = []
    for i, node in enumerate(ds.nodes):
        for upd in node.value_updates:
            if inside(phase_of[upd.instr_id]):
                appended.append((upd.instr_id, i, upd.value))
    appended.sort()
    return PhaseDiff(
        from_phase=from_phase, to_phase=to_phase, nodes_added=nodes_added,
        nodes_removed=nodes_removed, opcode_changed=opcode_changed,
        edges_added=edges_added, edges_removed=edges_removed,
        values_appended=tuple((i, v) for _, i, v in appended))


def compose_diffs(first: PhaseDiff, second: PhaseDiff) -> PhaseDiff:
    """Combine adjacent diffs; (a, b] composed with (b, c] equals (a, c]."""
    if first.to_phase != second.from_phase:
        raise JitscopeError(
            "E_BAD_RANGE",
            f"cannot compose ({first.from_phase}, {first.to_phase}] with "
            f"({second.from_phase}, {second.to_phase}]")

    net: dict[tuple[int, int], int] = {}
    for d in (first, second):
        for key, n in d.edges_added.items():
            net[key] = net.get(key, 0) + n
        for key, n in d.edges_removed.items():
            net[key] = net.get(key, 0) - n
    edges_added = {k: v for k, v in net.items() if v > 0}
    edges_removed = {k: -v for k, v in net.items() if v < 0}

    chained = {i: (old, new) for i, old, new in first.opcode_changed}
    for i, old, new in second.opcode_changed:
        if i in chained:
            chained[i] = (chained[i][0], new)
        else:
            chained[i] = (old, new)
    opcode_changed = frozenset(
        (i, old, new) for i, (old, new) in chained.items() if old != new)

    return PhaseDiff(
        from_phase=first.from_phase, to_phase=second.to_phase,
        nodes_added=first.nodes_added | second.nodes_added,
        nodes_removed=first.nodes_removed | second.nodes_removed,
        opcode_changed=opcode_changed,
        edges_added=edges_added, edges_removed=edges_removed,
        values_appended=first.values_appended + second.values_appended)


def value_change_phases(ds: ResolvedDataset, node_id: int
                        ) -> list[tuple[int, str]]:
    """(phase, value) per recorded value update, in phase then event order."""
    if not 0 <= node_id < ds.node_count:
        raise JitscopeError("E_NO_SUCH_NODE", f"no node with id {node_id}")
    phase_of = ds.phase_of_instr()
    updates = ds.nodes[node_id].value_updates
    keyed = sorted(
        (phase_of[upd.instr_id], upd.instr_id, seq, upd.value)
        for seq, upd in enumerate(updates))
    return [(p, v) for p, _i, _s, v in keyed]


def last_access(ds: ResolvedDataset, node_id: int) -> tuple[int, int, int]:
    """(instr_id, func_id, phase) of the node's latest recorded access."""
    if not 0 <= node_id < ds.node_count:
        raise JitscopeError("E_NO_SUCH_NODE", f"no node with id {node_id}")
    acc = max(ds.nodes[node_id].accesses, key=lambda a: a.instr_id)
    phase_of = ds.phase_of_instr()
    return acc.instr_id, acc.func_id, phase_of[acc.instr_id]


def search(ds: ResolvedDataset, query: str, phase: int) -> list[int]:
    """Nodes present at `phase` matching by substring.

    Case-insensitive over address, effective opcode at the phase, and
    mnemonic; a fully numeric query also matches the exact node id.
    Results are node-id ordered.
    """
    _check_phase(ds, phase)
    snap = snapshot_at(ds, phase)
    needle = query.lower()
    as_id = int(query) if query.isdigit() else None
    hits = []
    for n in snap.nodes:
        if n.node_id == as_id \
                or needle in n.address.lower() \
                or needle in n.effective_opcode.lower() \
                or (n.mnemonic and needle in n.mnemonic.lower()):
            hits.append(n.node_id)
    return hits
