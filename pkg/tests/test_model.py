"""Model core: CRUD validation, cascades, layer algebra, integrity."""

from __future__ import annotations

import random

import pytest

from modelsync.errors import (
    BoundsOutsideBoard,
    BoundsTooSmall,
    InvalidCardinality,
    InvalidChange,
    UnknownBoard,
    UnknownElement,
)
from modelsync.model import (
    LayerSet,
    ModelDocument,
    Rect,
    layer_add,
    layer_subtract,
)


def make_doc():
    doc = ModelDocument("d1")
    return doc, next(iter(doc.whiteboards))


def test_create_class_contract():
    doc, board = make_doc()
    cid = doc.create_class(board, Rect(100, 100, 160, 120), "a1", 5)
    element = doc.elements[cid]
    assert element.bounds.to_list() == [100, 100, 160, 120]
    assert element.name == ""
    assert element.attributes == [] and element.methods == []
    assert doc.history[-1].element_id == cid
    assert doc.version == 0  # versioning happens in the sync engine


def test_create_class_rejects_small_bounds():
    doc, board = make_doc()
    with pytest.raises(BoundsTooSmall):
        doc.create_class(board, Rect(0, 0, 10, 10), "a1", 5)


def test_create_class_rejects_unknown_board_and_outside_bounds():
    doc, board = make_doc()
    with pytest.raises(UnknownBoard):
        doc.create_class("nope", Rect(0, 0, 40, 40), "a1", 5)
    with pytest.raises(BoundsOutsideBoard):
        doc.create_class(board, Rect(950, 0, 100, 40), "a1", 5)


def test_ids_unique_across_document():
    doc, board = make_doc()
    ids = {doc.create_class(board, Rect(10 * i, 10, 30, 30), "a1", i) for i in range(20)}
    assert len(ids) == 20
    assert doc.check_integrity() == []


def test_edit_class_set_name_and_members():
    doc, board = make_doc()
    cid = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    doc.edit_class(cid, {"kind": "set_name", "name": "Movie"}, "a2", 2)
    element = doc.elements[cid]
    assert element.name == "Movie"
    assert element.last_editor == "a2"
    assert element.last_edit_time == 2

    doc.edit_class(
        cid, {"kind": "add_attribute", "visibility": "+", "name": "title", "type_text": "String"}, "a2", 3
    )
    doc.edit_class(
        cid,
        {"kind": "update_attribute", "index": 0, "visibility": "-", "type_text": "Text"},
        "a2",
        4,
    )
    assert len(element.attributes) == 1
    assert element.attributes[0].visibility == "-"
    assert element.attributes[0].type_text == "Text"


def test_edit_class_rejects_bad_changes():
    doc, board = make_doc()
    cid = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    with pytest.raises(UnknownElement):
        doc.edit_class("ghost", {"kind": "set_name", "name": "X"}, "a1", 2)
    with pytest.raises(InvalidChange):
        doc.edit_class(cid, {"kind": "set_name", "name": ""}, "a1", 2)
    with pytest.raises(InvalidChange):
        doc.edit_class(cid, {"kind": "explode"}, "a1", 2)
    with pytest.raises(InvalidChange):
        doc.edit_class(cid, {"kind": "update_attribute", "index": 3, "name": "x"}, "a1", 2)
    with pytest.raises(InvalidChange):
        doc.edit_class(
            cid, {"kind": "add_attribute", "visibility": "!", "name": "x", "type_text": ""}, "a1", 2
        )


def test_methods_add_update_remove():
    doc, board = make_doc()
    cid = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    doc.edit_class(
        cid,
        {
            "kind": "add_method",
            "visibility": "+",
            "name": "play",
            "params": [["track", "int"]],
            "return_text": "void",
        },
        "a1",
        2,
    )
    doc.edit_class(cid, {"kind": "update_method", "index": 0, "return_text": "bool"}, "a1", 3)
    method = doc.elements[cid].methods[0]
    assert method.return_text == "bool"
    assert method.params == [["track", "int"]]
    doc.edit_class(cid, {"kind": "remove_method", "index": 0}, "a1", 4)
    assert doc.elements[cid].methods == []


def test_relationship_creation_and_validation():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    b = doc.create_class(board, Rect(100, 0, 40, 40), "a1", 2)

    inh = doc.create_relationship("inheritance", a, b, actor="a1", now=3)
    assert doc.relationships[inh].source_card == "" and doc.relationships[inh].target_card == ""

    assoc = doc.create_relationship("association", a, b, "1", "0..*", actor="a1", now=4)
    assert doc.relationships[assoc].source_card == "1"
    assert doc.relationships[assoc].target_card == "0..*"

    with pytest.raises(UnknownElement):
        doc.create_relationship("association", a, "deleted", actor="a1", now=5)
    with pytest.raises(InvalidCardinality):
        doc.create_relationship("association", a, b, "2", "", actor="a1", now=5)
    with pytest.raises(InvalidCardinality):
        doc.create_relationship("inheritance", a, b, "1", "", actor="a1", now=5)


def test_relationship_updates_endpoint_history():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    b = doc.create_class(board, Rect(100, 0, 40, 40), "a1", 2)
    doc.create_relationship("association", a, b, actor="a9", now=7)
    assert doc.elements[a].last_editor == "a9"
    assert doc.elements[b].last_editor == "a9"
    assert doc.elements[b].last_edit_time == 7


def test_delete_cascades_relationships():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    b = doc.create_class(board, Rect(100, 0, 40, 40), "a1", 2)
    c = doc.create_class(board, Rect(200, 0, 40, 40), "a1", 3)
    r1 = doc.create_relationship("association", a, b, actor="a1", now=4)
    r2 = doc.create_relationship("dependency", c, a, actor="a1", now=5)
    removed = doc.delete_element(a, "a1", 6)
    assert removed == {a, r1, r2}
    assert not any(r.source == a or r.target == a for r in doc.relationships.values())
    assert doc.check_integrity() == []


def test_delete_is_idempotent():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    assert doc.delete_element(a, "a1", 2) == {a}
    assert doc.delete_element(a, "a1", 3) == frozenset()


def test_delete_removes_package_membership():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    b = doc.create_class(board, Rect(100, 0, 40, 40), "a1", 2)
    pid = doc.create_package("core", [a, b], "a1", 3)
    doc.delete_element(a, "a1", 4)
    assert doc.packages[pid].member_ids == {b}


def test_package_exclusivity():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    doc.create_package("p1", [a], "a1", 2)
    with pytest.raises(InvalidChange):
        doc.create_package("p2", [a], "a1", 3)


def test_whiteboard_links_never_contain_self():
    doc, board = make_doc()
    other = doc.create_whiteboard("Board 2")
    doc.update_whiteboard(board, links={board, other.id})
    assert doc.whiteboards[board].links == {other.id}
    with pytest.raises(UnknownBoard):
        doc.update_whiteboard(board, links={"ghost"})


# -- layer algebra -------------------------------------------------------------


def test_layer_algebra_examples():
    a = LayerSet("a", frozenset({"x", "y"}))
    b = LayerSet("b", frozenset({"y", "z"}))
    assert layer_add(a, b).members == {"x", "y", "z"}
    assert layer_subtract(a, b).members == {"x"}
    empty = LayerSet("e", frozenset())
    assert layer_subtract(a, a).members == frozenset()
    assert layer_add(a, empty).members == a.members


def _oracle_union(a, b, universe):
    return {e for e in universe if e in a or e in b}


def _oracle_difference(a, b, universe):
    return {e for e in universe if e in a and e not in b}


def test_layer_algebra_against_brute_force_oracle():
    rng = random.Random(42)
    universe = [f"e{i}" for i in range(12)]
    for _ in range(1000):
        a = frozenset(e for e in universe if rng.random() < 0.4)
        b = frozenset(e for e in universe if rng.random() < 0.4)
        la, lb = LayerSet("a", a), LayerSet("b", b)
        assert layer_add(la, lb).members == _oracle_union(a, b, universe)
        assert layer_subtract(la, lb).members == _oracle_difference(a, b, universe)
        # derived identities
        assert layer_add(la, lb).members == layer_add(lb, la).members
        complement = {e for e in universe if e not in b}
        assert layer_subtract(la, lb).members == {e for e in universe if e in a and e in complement}
        assert layer_subtract(layer_add(la, lb), lb).members <= a


def test_document_layer_validates_ids():
    doc, board = make_doc()
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    layer = doc.layer("mine", [a])
    assert layer.members == {a}
    with pytest.raises(UnknownElement):
        doc.layer("bad", ["ghost"])


def test_board_layer_collects_board_contents():
    doc, board = make_doc()
    b2 = doc.create_whiteboard("Board 2").id
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    b = doc.create_class(board, Rect(100, 0, 40, 40), "a1", 2)
    c = doc.create_class(b2, Rect(0, 0, 40, 40), "a1", 3)
    r_in = doc.create_relationship("association", a, b, actor="a1", now=4)
    doc.create_relationship("association", a, c, actor="a1", now=5)  # crosses boards
    layer = doc.board_layer(board)
    assert layer.members == {a, b, r_in}


# -- integrity under random operation sequences --------------------------------


def _random_ops_session(seed: int, steps: int) -> ModelDocument:
    rng = random.Random(seed)
    doc = ModelDocument(f"fuzz{seed}")
    board = next(iter(doc.whiteboards))
    now = 0
    for _ in range(steps):
        now += rng.randint(1, 50)
        classes = list(doc.elements)
        roll = rng.random()
        try:
            if roll < 0.30 or not classes:
                doc.create_class(
                    board,
                    Rect(rng.uniform(0, 800), rng.uniform(0, 550), rng.uniform(20, 150), rng.uniform(20, 150)),
                    "a1",
                    now,
                )
            elif roll < 0.50:
                doc.edit_class(
                    rng.choice(classes), {"kind": "set_name", "name": f"C{rng.randint(0, 99)}"}, "a1", now
                )
            elif roll < 0.65 and len(classes) >= 2:
                doc.create_relationship(
                    "association", rng.choice(classes), rng.choice(classes), actor="a1", now=now
                )
            elif roll < 0.75:
                doc.delete_element(rng.choice(classes), "a1", now)
            elif roll < 0.85 and classes:
                cluster = rng.sample(classes, k=min(len(classes), rng.randint(1, 3)))
                if rng.random() < 0.5:
                    doc.deep_copy(cluster, board, (5, 5), "a1", now)
                else:
                    doc.shallow_copy(cluster, board, (5, 5), "a1", now)
            elif classes:
                doc.record_edit(rng.choice(classes), "a1", now)
        except (BoundsTooSmall, BoundsOutsideBoard, UnknownElement):
            pass
    return doc


@pytest.mark.parametrize("seed", [1, 7, 99])
def test_referential_integrity_after_random_sequences(seed):
    doc = _random_ops_session(seed, 300)
    assert doc.check_integrity() == []


def test_cascade_completeness_full_scan():
    doc = _random_ops_session(5, 200)
    victims = [eid for eid in list(doc.elements)[:10]]
    for victim in victims:
        doc.delete_element(victim, "a1", 10_000)
        mentions = [
            r.id for r in doc.relationships.values() if r.source == victim or r.target == victim
        ]
        assert mentions == []
    assert doc.check_integrity() == []
