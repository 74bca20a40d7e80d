"""Validation rules, one scenario per issue code."""

from __future__ import annotations

import string

from hypothesis import given
from hypothesis import strategies as st

from jitscope.model import (
    AccessRecord,
    EdgeEvent,
    IRDocument,
    IRNode,
    OpcodeUpdate,
    PhaseSpec,
    ValueUpdate,
    canonical_address,
    validate_document,
)

FUNCS = {10: "jit::inlining::Run", 20: "jit::fold::Run"}
PHASES = (PhaseSpec("Inlining", 10, 19), PhaseSpec("Fold", 20, 29))


def node(address="0x10", opcode="Phi", accesses=((5, 10),), alive=True,
         opcode_updates=(), value_updates=(), edge_events=(), mnemonic=""):
    return IRNode(
        address=address, opcode=opcode, mnemonic=mnemonic, alive=alive,
        accesses=tuple(AccessRecord(i, f) for i, f in accesses),
        opcode_updates=tuple(opcode_updates),
        value_updates=tuple(value_updates),
        edge_events=tuple(edge_events))


def doc(nodes, phases=PHASES, functions=FUNCS, version=1):
    return IRDocument(format_version=version, functions=dict(functions),
                      phases=tuple(phases), nodes=tuple(nodes))


def codes(document):
    return [i.code for i in validate_document(document)]


def errors(document):
    return [i.code for i in validate_document(document)
            if i.severity == "error"]


def test_valid_document_has_no_issues():
    d = doc([node(), node(address="0x20", accesses=((7, 20),))])
    assert validate_document(d) == []


def test_unsupported_version():
    assert "E_UNSUPPORTED_VERSION" in codes(doc([node()], version=2))


def test_phase_range_inverted():
    bad = (PhaseSpec("Inlining", 19, 10),)
    assert "E_PHASE_RANGE" in codes(doc([], phases=bad))


def test_phase_range_negative_start():
    bad = (PhaseSpec("Inlining", -1, 5),)
    assert "E_PHASE_RANGE" in codes(doc([], phases=bad))


def test_phase_overlap():
    bad = (PhaseSpec("A", 10, 19), PhaseSpec("B", 15, 25))
    assert "E_PHASE_OVERLAP" in codes(doc([], phases=bad))


def test_adjacent_phases_do_not_overlap():
    ok = (PhaseSpec("A", 10, 19), PhaseSpec("B", 20, 20))
    assert "E_PHASE_OVERLAP" not in codes(doc([], phases=ok))


def test_duplicate_phase_name():
    bad = (PhaseSpec("A", 10, 19), PhaseSpec("A", 20, 29))
    assert "E_DUPLICATE_PHASE_NAME" in codes(doc([], phases=bad))


def test_duplicate_address():
    d = doc([node(), node(accesses=((6, 10),))])
    assert "E_DUPLICATE_ADDRESS" in codes(d)


def test_node_without_accesses():
    assert "E_NO_ACCESSES" in codes(doc([node(accesses=())]))


def test_empty_initial_opcode():
    assert "E_EMPTY_OPCODE" in codes(doc([node(opcode="")]))


def test_empty_update_opcode():
    d = doc([node(accesses=((5, 10), (6, 10)),
                  opcode_updates=(OpcodeUpdate("", 6),))])
    assert "E_EMPTY_OPCODE" in codes(d)


def test_unsorted_accesses():
    d = doc([node(accesses=((8, 10), (5, 10)))])
    assert "E_UNSORTED_EVENTS" in codes(d)


def test_negative_ids():
    assert "E_NEGATIVE_ID" in codes(doc([node(accesses=((-1, 10),))]))


def test_unknown_func_id():
    assert "E_UNKNOWN_FUNC_ID" in codes(doc([node(accesses=((5, 99),))]))


def test_conflicting_func_id_across_nodes():
    d = doc([node(), node(address="0x20", accesses=((5, 20),))])
    assert "E_CONFLICTING_FUNC_ID" in codes(d)


def test_update_without_matching_access():
    d = doc([node(value_updates=(ValueUpdate("7", 99),))])
    assert "E_UPDATE_WITHOUT_ACCESS" in codes(d)


def test_edge_event_without_matching_access():
    d = doc([node(edge_events=(EdgeEvent("add", "0x10", 99),))])
    assert "E_UPDATE_WITHOUT_ACCESS" in codes(d)


def test_unknown_edge_target():
    d = doc([node(accesses=((5, 10), (6, 10)),
                  edge_events=(EdgeEvent("add", "0xdead", 6),))])
    assert "E_UNKNOWN_EDGE_TARGET" in codes(d)


def test_unknown_replace_old_target():
    d = doc([node(accesses=((5, 10), (6, 10)),
                  edge_events=(EdgeEvent("replace", "0x10", 6,
                                         old_dst_address="0xdead"),))])
    assert "E_UNKNOWN_EDGE_TARGET" in codes(d)


def test_replace_with_same_target():
    d = doc([node(accesses=((5, 10), (6, 10)),
                  edge_events=(EdgeEvent("replace", "0x10", 6,
                                         old_dst_address="0x10"),))])
    assert "E_REPLACE_SAME_TARGET" in codes(d)


def test_remove_of_absent_edge_is_a_warning():
    d = doc([node(accesses=((5, 10), (6, 10)),
                  edge_events=(EdgeEvent("remove", "0x10", 6),))])
    issues = validate_document(d)
    assert [i.code for i in issues] == ["A_REMOVE_MISSING_EDGE"]
    assert issues[0].severity == "warning"
    assert errors(d) == []


def test_replace_of_absent_edge_is_a_warning():
    d = doc([node(address="0x10"),
             node(address="0x20", accesses=((6, 10), (7, 10)),
                  edge_events=(EdgeEvent("replace", "0x10", 7,
                                         old_dst_address="0x20"),))])
    assert "A_REMOVE_MISSING_EDGE" in codes(d)


def test_remove_after_add_is_clean():
    d = doc([node(accesses=((5, 10), (6, 10), (7, 10)),
                  edge_events=(EdgeEvent("add", "0x10", 6),
                               EdgeEvent("remove", "0x10", 7)))])
    assert codes(d) == []


def test_validation_is_deterministic():
    d = doc([node(opcode="", accesses=((8, 10), (5, 99)))])
    assert validate_document(d) == validate_document(d)


def test_canonical_address_lowercases_hex():
    assert canonical_address("0X1AB") == "0x1ab"
    assert canonical_address("0xDEADbeef") == "0xdeadbeef"
    assert canonical_address("0x10") == "0x10"


def test_canonical_address_leaves_opaque_ids_alone():
    for opaque in ("heap#3", "n42", "0x", "0xzz", "12ab", ""):
        assert canonical_address(opaque) == opaque


@given(st.text(alphabet=string.hexdigits, min_size=1, max_size=12),
       st.sampled_from(["0x", "0X"]))
def test_canonical_address_idempotent_on_hex(digits, prefix):
    once = canonical_address(prefix + digits)
    assert once == canonical_address(once)
    assert once == "0x" + digits.lower()
