"""Seeded fixture generator with by-construction ground truth.

Produces trace documents that mimic a real optimization run: a prelude
of graph-construction activity attributed to no phase, then each
declared phase in temporal order.  The generator tracks per-phase
counts as it emits events and writes them to a sidecar truth file, so
expected values never come from re-deriving anything the analysis code
also derives.

Structural guarantees (tests rely on these):
  - validates with zero errors and parses with zero warnings;
  - instr_ids strictly increase in emission order, phases are
    temporally coherent;
  - every edge added within a phase connects nodes that survive that
    phase, and no pair is both added and removed within one phase, so
    per-phase add/remove/replace counts match snapshot diffs exactly;
  - a dying node's incident edges are all removed in its death phase
    before its final access.
"""

from __future__ import annotations

import json
import random
import re
from dataclasses import dataclass
from pathlib import Path

from .model import UNASSIGNED, UNASSIGNED_NAME

_PHASE_POOL = [
    "Inlining", "CanonicalizePre", "TypedLowering", "LoopPeeling",
    "ConstantFolding", "GlobalValueNumbering", "LoadElimination",
    "EscapeAnalysis", "DeadCodeElimination", "ControlFlowSimplify",
    "SelectLowering", "FrameSpecialize",
]

_OPCODE_POOL = [
    "Start", "End", "Merge", "Loop", "Phi", "Parameter", "NumberConstant",
    "HeapConstant", "Int64Add", "Int64Sub", "Int64Mul", "Word64And",
    "Word64Shl", "Float64Add", "Call", "TailCall", "Return", "Branch",
    "TypeGuard", "CheckBounds", "LoadField", "StoreField", "LoadElement",
    "Allocate", "StringLength",
]

_VERB_POOL = ["Run", "Reduce", "VisitNode", "LowerNode", "Fold", "Eliminate",
              "Hoist", "Peel", "Simplify", "MarkLive", "Sweep", "Propagate"]

_PRELUDE_SYMBOLS = ["jit::graph::BuildGraph", "jit::graph::DecorateNodes",
                    "jit::verify::VerifyGraph"]

_BASE_ADDRESS = 0x55D1C2A00000


@dataclass(frozen=True)
class FixtureParams:
    nodes: int = 60
    phases: int = 4
    events_per_node: int = 6
    seed: int = 0


def _snake(name: str) -> str:
    return re.sub(r"(?<!^)(?=[A-Z])", "_", name).lower()


def _mnemonic_for(opcode: str) -> str:
    parts = re.findall(r"[A-Z][a-z0-9]*", opcode)
    return parts[-1].lower() if parts else opcode.lower()


class _EdgeBook:
    """Live edge instances with per-endpoint indexes."""

    def __init__(self):
        self._next = 0
        self.data: dict[int, tuple[int, int, int]] = {}  # iid -> (src, dst, slot)
        self.by_src: dict[int, set[int]] = {}
        self.by_dst: dict[int, set[int]] = {}

    def add(self, src: int, dst: int, slot: int) -> int:
        iid = self._next
        self._next += 1
        self.data[iid] = (src, dst, slot)
        self.by_src.setdefault(src, set()).add(iid)
        self.by_dst.setdefault(dst, set()).add(iid)
        return iid

    def remove(self, iid: int) -> tuple[int, int, int]:
        src, dst, slot = self.data.pop(iid)
        self.by_src[src].discard(iid)
        self.by_dst[dst].discard(iid)
        return src, dst, slot


class _Generator:
    def __init__(self, params: FixtureParams):
        self.p = params
        self.rng = random.Random(params.seed)
        self.instr = -1

    def _next_instr(self) -> int:
        self.instr += self.rng.randint(1, 3)
        return self.instr

    def _plan_phases(self):
        count = self.p.phases
        pool = list(_PHASE_POOL)
        while len(pool) < count:
            pool.append(f"ExtraPass{len(pool)}")
        picked = sorted(self.rng.sample(range(len(pool)), count))
        self.phase_names = [pool[i] for i in picked]

        self.ranges = []
        cursor = 10
        for _ in range(count):
            start = cursor + self.rng.randint(0, 2)
            end = start + self.rng.randint(1, 4)
            self.ranges.append((start, end))
            cursor = end + 1

        top = self.ranges[-1][1] if self.ranges else 90
        self.prelude_funcs = [top + 10 + i
                              for i in range(len(_PRELUDE_SYMBOLS))]

        self.functions: dict[int, str] = {}
        for name, (start, end) in zip(self.phase_names, self.ranges):
            slug = _snake(name)
            for k, fid in enumerate(range(start, end + 1)):
                verb = _VERB_POOL[k % len(_VERB_POOL)]
                self.functions[fid] = f"jit::{slug}::{verb}"
        for fid, symbol in zip(self.prelude_funcs, _PRELUDE_SYMBOLS):
            self.functions[fid] = symbol

        self.slot_funcs = {UNASSIGNED: self.prelude_funcs}
        for s, (start, end) in enumerate(self.ranges):
            self.slot_funcs[s] = list(range(start, end + 1))
        self.slots = [UNASSIGNED, *range(count)]

    def _plan_nodes(self):
        n = self.p.nodes
        dead_count = round(n * (0.10 + self.rng.random() * 0.10))
        dead = set(self.rng.sample(range(n), dead_count)) if dead_count else set()
        last = self.p.phases - 1

        self.alive = [i not in dead for i in range(n)]
        self.birth = []
        self.death: list[int | None] = []
        for i in range(n):
            if self.p.phases == 0 or self.rng.random() < 0.15:
                b = UNASSIGNED
            else:
                b = self.rng.randrange(self.p.phases)
            self.birth.append(b)
            if self.alive[i]:
                self.death.append(None)
            elif self.rng.random() < 0.15:
                self.death.append(b)
            else:
                self.death.append(
                    self.rng.choice([s for s in self.slots if s >= b]))

        # Eligible edge targets per slot: already created and surviving
        # past the slot (ghost targets would force same-phase churn).
        self.targets = {}
        for s in self.slots:
            self.targets[s] = [
                i for i in range(n)
                if self.birth[i] <= s
                and (self.death[i] is None or self.death[i] > s)]

        mean_extra = max(self.p.events_per_node - 1, 0)
        q = mean_extra / (mean_extra + 1)
        cap = 4 * max(self.p.events_per_node, 1)
        self.plan: list[dict[int, list[str]]] = []
        for i in range(n):
            hi = self.death[i] if self.death[i] is not None else last
            span = [s for s in self.slots if self.birth[i] <= s <= hi] \
                or [self.birth[i]]
            weights = [2.0 if s == self.birth[i] else 1.0 for s in span]
            per_slot: dict[int, list[str]] = {}
            extra = 0
            while extra < cap and self.rng.random() < q:
                extra += 1
            for _ in range(extra):
                slot = self.rng.choices(span, weights)[0]
                r = self.rng.random()
                if r < 0.10:
                    kind = "opcode"
                elif r < 0.28:
                    kind = "value"
                elif r < 0.50:
                    kind = "edge"
                else:
                    kind = "access"
                per_slot.setdefault(slot, []).append(kind)
            self.plan.append(per_slot)

    def _touch(self, node: int, slot: int) -> int:
        instr = self._next_instr()
        func = self.rng.choice(self.slot_funcs[slot])
        self.accs[node].append({"instrId": instr, "funcId": func})
        return instr

    def _make_value(self) -> str:
        r = self.rng.random()
        if r < 0.40:
            return str(self.rng.randint(-2**31, 2**31 - 1))
        if r < 0.70:
            return hex(self.rng.getrandbits(32))
        if r < 0.85:
            return self.rng.choice(["#true", "#false", "#undefined", "#null"])
        a = self.rng.randint(-1000, 1000)
        return f"Range({a}, {a + self.rng.randint(0, 4096)})"

    def _survives(self, node: int, slot: int) -> bool:
        return self.death[node] is None or self.death[node] > slot

    def _pick_add_target(self, src: int, slot: int) -> int | None:
        pool = self.targets[slot]
        if not pool:
            return None
        for _ in range(4):
            t = self.rng.choice(pool)
            if (src, t) not in self.removed_pairs:
                return t
        return None

    def _emit_add(self, src: int, slot: int) -> bool:
        if not self._survives(src, slot):
            return False
        t = self._pick_add_target(src, slot)
        if t is None:
            return False
        instr = self._touch(src, slot)
        self.edges[src].append(
            {"action": "add", "to": self.addr[t], "instrId": instr})
        self.book.add(src, t, slot)
        self.added_pairs.add((src, t))
        self.counts[slot]["edge_adds"] += 1
        return True

    def _removable(self, src: int, slot: int) -> list[int]:
        out = []
        for iid in sorted(self.book.by_src.get(src, ())):
            _, dst, added = self.book.data[iid]
            if added < slot and (src, dst) not in self.added_pairs:
                out.append(iid)
        return out

    def _emit_remove(self, src: int, slot: int) -> bool:
        options = self._removable(src, slot)
        if not options:
            return False
        iid = self.rng.choice(options)
        _, dst, _ = self.book.remove(iid)
        instr = self._touch(src, slot)
        self.edges[src].append(
            {"action": "remove", "to": self.addr[dst], "instrId": instr})
        self.removed_pairs.add((src, dst))
        self.counts[slot]["edge_removes"] += 1
        return True

    def _emit_replace(self, src: int, slot: int) -> bool:
        if not self._survives(src, slot):
            return False
        options = self._removable(src, slot)
        if not options:
            return False
        iid = self.rng.choice(options)
        old_dst = self.book.data[iid][1]
        new_dst = None
        pool = self.targets[slot]
        for _ in range(6):
            t = self.rng.choice(pool)
            if t != old_dst and (src, t) not in self.removed_pairs:
                new_dst = t
                break
        if new_dst is None:
            return False
        self.book.remove(iid)
        instr = self._touch(src, slot)
        self.edges[src].append(
            {"action": "replace", "to": self.addr[new_dst],
             "oldTo": self.addr[old_dst], "instrId": instr})
        self.book.add(src, new_dst, slot)
        self.removed_pairs.add((src, old_dst))
        self.added_pairs.add((src, new_dst))
        self.counts[slot]["edge_replaces"] += 1
        return True

    def _emit_middle(self, node: int, kind: str, slot: int) -> None:
        if kind == "opcode":
            pool = [op for op in _OPCODE_POOL if op != self.current_op[node]]
            op = self.rng.choice(pool)
            instr = self._touch(node, slot)
            self.ops[node].append({"opcode": op, "instrId": instr})
            self.current_op[node] = op
            self.counts[slot]["opcode_updates"] += 1
            return
        if kind == "value":
            instr = self._touch(node, slot)
            self.vals[node].append(
                {"value": self._make_value(), "instrId": instr})
            self.counts[slot]["value_updates"] += 1
            return
        if kind == "edge":
            u = self.rng.random()
            if u < 0.70:
                done = self._emit_add(node, slot)
            elif u < 0.85:
                done = self._emit_remove(node, slot) \
                    or self._emit_add(node, slot)
            else:
                done = self._emit_replace(node, slot) \
                    or self._emit_add(node, slot)
            if done:
                return
        self._touch(node, slot)

    def _cleanup_deaths(self, slot: int) -> None:
        dying = [i for i in range(self.p.nodes) if self.death[i] == slot]
        for d in dying:
            for iid in sorted(self.book.by_src.get(d, set())):
                _, dst, _ = self.book.remove(iid)
                instr = self._touch(d, slot)
                self.edges[d].append(
                    {"action": "remove", "to": self.addr[dst],
                     "instrId": instr})
                self.counts[slot]["edge_removes"] += 1
            for iid in sorted(self.book.by_dst.get(d, set())):
                src, _, _ = self.book.remove(iid)
                instr = self._touch(src, slot)
                self.edges[src].append(
                    {"action": "remove", "to": self.addr[d],
                     "instrId": instr})
                self.counts[slot]["edge_removes"] += 1
        for d in dying:
            self._touch(d, slot)
            self.counts[slot]["removed"] += 1

    def generate(self) -> tuple[dict, dict]:
        self._plan_phases()
        self._plan_nodes()
        n = self.p.nodes

        self.addr = [hex(_BASE_ADDRESS + 0x30 * i) for i in range(n)]
        self.initial_op = [self.rng.choice(_OPCODE_POOL) for _ in range(n)]
        self.current_op = list(self.initial_op)
        self.mnemonic = [
            _mnemonic_for(self.initial_op[i])
            if self.rng.random() < 0.8 else "" for i in range(n)]

        self.accs: list[list[dict]] = [[] for _ in range(n)]
        self.ops: list[list[dict]] = [[] for _ in range(n)]
        self.vals: list[list[dict]] = [[] for _ in range(n)]
        self.edges: list[list[dict]] = [[] for _ in range(n)]
        self.book = _EdgeBook()
        self.counts = {
            s: {"generated": 0, "removed": 0, "opcode_updates": 0,
                "value_updates": 0, "edge_adds": 0, "edge_removes": 0,
                "edge_replaces": 0}
            for s in self.slots}

        for slot in self.slots:
            self.added_pairs: set[tuple[int, int]] = set()
            self.removed_pairs: set[tuple[int, int]] = set()
            for i in range(n):
                if self.birth[i] == slot:
                    self._touch(i, slot)
                    self.counts[slot]["generated"] += 1
            middles = [(i, kind)
                       for i in range(n)
                       for kind in self.plan[i].get(slot, ())]
            self.rng.shuffle(middles)
            for node, kind in middles:
                self._emit_middle(node, kind, slot)
            self._cleanup_deaths(slot)

        nodes_json = []
        for i in range(n):
            entry: dict = {"address": self.addr[i],
                           "opcode": self.initial_op[i]}
            if self.mnemonic[i]:
                entry["mnemonic"] = self.mnemonic[i]
            entry["alive"] = self.alive[i]
            entry["opcodeUpdates"] = self.ops[i]
            entry["values"] = self.vals[i]
            entry["edges"] = self.edges[i]
            entry["accesses"] = self.accs[i]
            nodes_json.append(entry)

        doc = {
            "format_version": 1,
            "functions": {str(fid): sym
                          for fid, sym in sorted(self.functions.items())},
            "phases": [
                {"name": name, "funcIdStart": start, "funcIdEnd": end}
                for name, (start, end) in zip(self.phase_names, self.ranges)],
            "nodes": nodes_json,
        }

        rows = []
        for s in self.slots:
            name = UNASSIGNED_NAME if s == UNASSIGNED else self.phase_names[s]
            rows.append({"phase_id": s, "name": name, **self.counts[s]})
        truth = {
            "phases": rows,
            "node_count": n,
            "instruction_count": sum(len(a) for a in self.accs),
        }
        return doc, truth


def generate_fixture(params: FixtureParams) -> tuple[dict, dict]:
    """One (document, truth) pair; identical params give identical output."""
    return _Generator(params).generate()


def write_fixture(params: FixtureParams, out_path: Path) -> tuple[Path, Path]:
    """Write the document to `out_path` and truth to `<out_path>.truth.json`."""
    doc, truth = generate_fixture(params)
    truth_path = out_path.with_name(out_path.name + ".truth.json")
    out_path.write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    truth_path.write_text(json.dumps(truth, indent=2, sort_keys=True) + "\n",
                          encoding="utf-8")
    return out_path, truth_path
