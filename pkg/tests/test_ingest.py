"""Parsing and phase assignment.

Expected values for the curated fixture were derived by hand from
tests/data/curated.json: instruction blocks 1..9 belong to no phase
(functions 90/91), 100..199 to Inlining via functions 10/11, 200..299
to ConstantFolding via 20/21, and 300..399 to DeadCodeElimination via
30/31.
"""

from __future__ import annotations

import json

import pytest

from conftest import resolve_dict
from jitscope.errors import JitscopeError
from jitscope.ingest import assign_phases, parse_document
from jitscope.model import UNASSIGNED


def minimal(**overrides):
    doc = {"format_version": 1, "functions": {}, "phases": [], "nodes": []}
    doc.update(overrides)
    return doc


def parse(doc_dict):
    return parse_document(json.dumps(doc_dict).encode("utf-8"))


def one_node(**overrides):
    node = {"address": "0xa0", "opcode": "Phi", "alive": True,
            "opcodeUpdates": [], "values": [], "edges": [],
            "accesses": [{"instrId": 4, "funcId": 7}]}
    node.update(overrides)
    return minimal(functions={"7": "jit::graph::Build"}, nodes=[node])


def err_code(doc_dict) -> str:
    with pytest.raises(JitscopeError) as info:
        parse(doc_dict)
    return info.value.code


def test_minimal_document():
    doc, warnings = parse(minimal())
    assert doc.format_version == 1
    assert doc.functions == {}
    assert doc.phases == ()
    assert doc.nodes == ()
    assert warnings == []


def test_full_node_round_trip():
    doc, warnings = parse(one_node(
        mnemonic="phi",
        opcodeUpdates=[{"opcode": "Merge", "instrId": 9}],
        values=[{"value": "7", "instrId": 9}],
        edges=[{"action": "add", "to": "0xa0", "instrId": 9}],
        accesses=[{"instrId": 4, "funcId": 7}, {"instrId": 9, "funcId": 7}]))
    node = doc.nodes[0]
    assert warnings == []
    assert node.mnemonic == "phi"
    assert node.opcode_updates[0].new_opcode == "Merge"
    assert node.value_updates[0].value == "7"
    assert node.edge_events[0].action == "add"
    assert node.edge_events[0].old_dst_address is None
    assert [a.instr_id for a in node.accesses] == [4, 9]


def test_mnemonic_defaults_to_empty():
    doc, _ = parse(one_node())
    assert doc.nodes[0].mnemonic == ""


def test_malformed_json():
    with pytest.raises(JitscopeError) as info:
        parse_document(b"{not json")
    assert info.value.code == "E_MALFORMED_JSON"


def test_top_level_must_be_object():
    with pytest.raises(JitscopeError) as info:
        parse_document(b"[1, 2]")
    assert info.value.code == "E_MALFORMED_JSON"


def test_missing_required_fields():
    assert err_code({"functions": {}, "phases": [],
                     "nodes": []}) == "E_MISSING_FIELD"
    assert err_code(minimal(nodes=[{"opcode": "Phi"}])) == "E_MISSING_FIELD"


def test_wrong_typed_fields_report_their_path():
    with pytest.raises(JitscopeError) as info:
        parse(minimal(format_version="1"))
    assert info.value.code == "E_MISSING_FIELD"
    assert info.value.path == "/format_version"


def test_bool_is_not_an_integer():
    assert err_code(minimal(format_version=True)) == "E_MISSING_FIELD"


def test_unsupported_version_rejected_at_parse():
    assert err_code(minimal(format_version=3)) == "E_UNSUPPORTED_VERSION"


def test_function_keys_must_be_decimal():
    assert err_code(minimal(functions={"0x7": "f"})) == "E_MISSING_FIELD"


def test_edge_action_must_be_known():
    doc = one_node(edges=[{"action": "attach", "to": "0xa0", "instrId": 4}])
    assert err_code(doc) == "E_MISSING_FIELD"


def test_replace_requires_old_target():
    doc = one_node(edges=[{"action": "replace", "to": "0xa0", "instrId": 4}])
    assert err_code(doc) == "E_MISSING_FIELD"


def test_unknown_fields_warn_and_are_ignored():
    doc_dict = minimal(vendor={"tool": "x"})
    doc_dict["nodes"] = [{"address": "0xa0", "opcode": "Phi", "alive": True,
                          "color": "red", "opcodeUpdates": [], "values": [],
                          "edges": [],
                          "accesses": [{"instrId": 4, "funcId": 7}]}]
    doc_dict["functions"] = {"7": "f"}
    doc, warnings = parse(doc_dict)
    assert sorted(w.locator for w in warnings
                  if w.code == "W_UNKNOWN_FIELD") == ["/nodes/0/color",
                                                      "/vendor"]
    assert doc.nodes[0].address == "0xa0"


def test_old_target_on_non_replace_warns():
    doc_dict = one_node(
        edges=[{"action": "add", "to": "0xa0", "oldTo": "0xa0",
                "instrId": 4}])
    doc, warnings = parse(doc_dict)
    assert any(w.code == "W_UNKNOWN_FIELD" and w.locator.endswith("oldTo")
               for w in warnings)
    assert doc.nodes[0].edge_events[0].old_dst_address is None


def test_unsorted_events_are_sorted_with_warning():
    doc_dict = one_node(
        accesses=[{"instrId": 9, "funcId": 7}, {"instrId": 4, "funcId": 7}])
    doc, warnings = parse(doc_dict)
    assert [w.code for w in warnings] == ["W_UNSORTED_EVENTS"]
    assert [a.instr_id for a in doc.nodes[0].accesses] == [4, 9]


def test_addresses_are_canonicalized_consistently():
    doc_dict = minimal(
        functions={"7": "f"},
        nodes=[
            {"address": "0XAB12", "opcode": "Phi", "alive": True,
             "opcodeUpdates": [], "values": [], "edges": [],
             "accesses": [{"instrId": 4, "funcId": 7}]},
            {"address": "0xCD34", "opcode": "Merge", "alive": True,
             "opcodeUpdates": [], "values": [],
             "edges": [{"action": "add", "to": "0XaB12", "instrId": 6}],
             "accesses": [{"instrId": 6, "funcId": 7}]},
        ])
    doc, _ = parse(doc_dict)
    assert doc.nodes[0].address == "0xab12"
    assert doc.nodes[1].address == "0xcd34"
    assert doc.nodes[1].edge_events[0].dst_address == "0xab12"


# ----------------------------------------------------------------------
# phase assignment


def test_curated_phase_attribution(curated):
    assert curated.node_count == 12
    assert curated.phase_count == 3
    assert curated.created_phase == (-1, -1, 0, 0, 1, 0, 0, 1, 1, -1, 1, 2)
    assert curated.removed_phase == (None, None, None, None, None, 2, 0,
                                     None, 1, None, 2, None)
    assert len(curated.instructions) == 37


def test_curated_instruction_phases(curated):
    phase_of = curated.phase_of_instr()
    assert phase_of[1] == UNASSIGNED
    assert phase_of[3] == UNASSIGNED
    assert phase_of[100] == 0
    assert phase_of[162] == 0
    assert phase_of[205] == 1
    assert phase_of[252] == 1
    assert phase_of[310] == 2
    assert phase_of[390] == 2


def test_curated_address_index(curated):
    assert curated.address_index["0x1000"] == 0
    assert curated.address_index["0x12c0"] == 11


def test_conflicting_func_id_raises():
    doc_dict = minimal(
        functions={"7": "f", "8": "g"},
        nodes=[
            {"address": "0xa0", "opcode": "Phi", "alive": True,
             "opcodeUpdates": [], "values": [], "edges": [],
             "accesses": [{"instrId": 4, "funcId": 7}]},
            {"address": "0xb0", "opcode": "Merge", "alive": True,
             "opcodeUpdates": [], "values": [], "edges": [],
             "accesses": [{"instrId": 4, "funcId": 8}]},
        ])
    doc, _ = parse(doc_dict)
    with pytest.raises(JitscopeError) as info:
        assign_phases(doc)
    assert info.value.code == "E_CONFLICTING_FUNC_ID"


def test_phase_order_warning_for_incoherent_timeline():
    ds = resolve_dict({
        "format_version": 1,
        "functions": {"10": "a", "20": "b"},
        "phases": [{"name": "First", "funcIdStart": 10, "funcIdEnd": 19},
                   {"name": "Second", "funcIdStart": 20, "funcIdEnd": 29}],
        "nodes": [{"address": "0xa0", "opcode": "Phi", "alive": True,
                   "opcodeUpdates": [], "values": [], "edges": [],
                   "accesses": [{"instrId": 5, "funcId": 20},
                                {"instrId": 10, "funcId": 10}]}],
    })
    assert [w.code for w in ds.warnings] == ["W_PHASE_ORDER"]


def test_verbatim_attribution_for_incoherent_timeline():
    # Removal can be attributed before creation when the timeline is
    # incoherent; the attribution stays verbatim rather than clamped.
    ds = resolve_dict({
        "format_version": 1,
        "functions": {"10": "a", "20": "b"},
        "phases": [{"name": "First", "funcIdStart": 10, "funcIdEnd": 19},
                   {"name": "Second", "funcIdStart": 20, "funcIdEnd": 29}],
        "nodes": [{"address": "0xa0", "opcode": "Phi", "alive": False,
                   "opcodeUpdates": [], "values": [], "edges": [],
                   "accesses": [{"instrId": 5, "funcId": 20},
                                {"instrId": 10, "funcId": 10}]}],
    })
    assert ds.created_phase == (1,)
    assert ds.removed_phase == (0,)


def test_unassigned_interleaving_is_not_flagged():
    # Verifier-style sweeps between phases legitimately interleave
    # unassigned instructions with declared phases.
    ds = resolve_dict({
        "format_version": 1,
        "functions": {"10": "a", "20": "b", "90": "v"},
        "phases": [{"name": "First", "funcIdStart": 10, "funcIdEnd": 19},
                   {"name": "Second", "funcIdStart": 20, "funcIdEnd": 29}],
        "nodes": [{"address": "0xa0", "opcode": "Phi", "alive": True,
                   "opcodeUpdates": [], "values": [], "edges": [],
                   "accesses": [{"instrId": 5, "funcId": 10},
                                {"instrId": 8, "funcId": 90},
                                {"instrId": 12, "funcId": 20},
                                {"instrId": 15, "funcId": 90}]}],
    })
    assert ds.warnings == ()
    phase_of = ds.phase_of_instr()
    assert phase_of[8] == UNASSIGNED
    assert phase_of[15] == UNASSIGNED
