"""PlantUML export mapping."""

from __future__ import annotations

from modelsync.model import ModelDocument, Rect
from modelsync.plantuml import to_plantuml


def build_pair():
    doc = ModelDocument("d1")
    board = next(iter(doc.whiteboards))
    a = doc.create_class(board, Rect(0, 0, 40, 40), "a1", 1)
    b = doc.create_class(board, Rect(100, 0, 40, 40), "a1", 2)
    doc.edit_class(a, {"kind": "set_name", "name": "Child"}, "a1", 3)
    doc.edit_class(b, {"kind": "set_name", "name": "Parent"}, "a1", 4)
    return doc, a, b


def test_inheritance_renders_extension_arrow():
    doc, a, b = build_pair()
    doc.create_relationship("inheritance", a, b, actor="a1", now=5)
    text = to_plantuml(doc)
    assert text.count("<|--") == 1
    assert f"{b} <|-- {a}" in text
    assert text.startswith("@startuml")
    assert text.rstrip().endswith("@enduml")


def test_association_with_cardinalities_and_label():
    doc, a, b = build_pair()
    doc.create_relationship("association", a, b, "1", "0..*", "owns", actor="a1", now=5)
    text = to_plantuml(doc)
    assert f'{a} "1" -- "0..*" {b} : owns' in text


def test_members_and_stereotype_render():
    doc, a, b = build_pair()
    doc.edit_class(a, {"kind": "set_stereotype", "stereotype": "entity"}, "a1", 5)
    doc.edit_class(
        a, {"kind": "add_attribute", "visibility": "-", "name": "title", "type_text": "String"}, "a1", 6
    )
    doc.edit_class(
        a,
        {"kind": "add_method", "visibility": "+", "name": "play", "params": [["n", "int"]], "return_text": "void"},
        "a1",
        7,
    )
    text = to_plantuml(doc)
    assert "<<entity>>" in text
    assert "-title: String" in text
    assert "+play(n: int): void" in text


def test_packages_group_members():
    doc, a, b = build_pair()
    doc.create_package("core", [a], "a1", 5)
    text = to_plantuml(doc)
    assert 'package "core" {' in text
    # the packaged class appears once, inside the package block
    assert text.count('class "Child"') == 1


def test_aggregation_composition_dependency_markers():
    doc, a, b = build_pair()
    doc.create_relationship("aggregation", a, b, actor="a1", now=5)
    doc.create_relationship("composition", a, b, actor="a1", now=6)
    doc.create_relationship("dependency", a, b, actor="a1", now=7)
    text = to_plantuml(doc)
    assert f"{b} o-- {a}" in text
    assert f"{b} *-- {a}" in text
    assert f"{a} ..> {b}" in text
