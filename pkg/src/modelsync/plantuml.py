"""PlantUML export so models are human-checkable without the UI."""

from __future__ import annotations

from .model import ClassElement, MemberField, MemberMethod, ModelDocument

# Marker sits at the target end of the edge (parent / whole / dependee).
_EDGE = {
    "inheritance": "<|--",
    "aggregation": "o--",
    "composition": "*--",
}


def _member_line(member: MemberField | MemberMethod) -> str:
    if isinstance(member, MemberMethod):
        params = ", ".join(f"{n}: {t}" if t else n for n, t in member.params)
        suffix = f": {member.return_text}" if member.return_text else ""
        return f"  {member.visibility}{member.name}({params}){suffix}"
    suffix = f": {member.type_text}" if member.type_text else ""
    return f"  {member.visibility}{member.name}{suffix}"


def _class_block(element: ClassElement) -> list[str]:
    display = element.name or element.id
    stereotype = f" <<{element.stereotype}>>" if element.stereotype else ""
    lines = [f'class "{display}" as {element.id}{stereotype} {{']
    lines.extend(_member_line(a) for a in element.attributes)
    lines.extend(_member_line(m) for m in element.methods)
    lines.append("}")
    return lines


def to_plantuml(doc: ModelDocument) -> str:
    lines = ["@startuml"]
    packaged: set[str] = set()
    for package in doc.packages.values():
        lines.append(f'package "{package.name or package.id}" {{')
        for member in sorted(package.member_ids):
            element = doc.elements.get(member)
            if element is not None:
                lines.extend("  " + line for line in _class_block(element))
                packaged.add(member)
        lines.append("}")
    for element in doc.elements.values():
        if element.id not in packaged:
            lines.extend(_class_block(element))
    for rel in doc.relationships.values():
        label = f" : {rel.label}" if rel.label else ""
        if rel.kind == "dependency":
            lines.append(f"{rel.source} ..> {rel.target}{label}")
            continue
        if rel.kind == "association":
            src_card = f'"{rel.source_card}" ' if rel.source_card else ""
            tgt_card = f'"{rel.target_card}" ' if rel.target_card else ""
            lines.append(f"{rel.source} {src_card}-- {tgt_card}{rel.target}{label}")
        else:
            edge = _EDGE[rel.kind]
            tgt_card = f' "{rel.target_card}"' if rel.target_card else ""
            src_card = f'"{rel.source_card}" ' if rel.source_card else ""
            lines.append(f"{rel.target}{tgt_card} {edge} {src_card}{rel.source}{label}")
    lines.append("@enduml")
    return "\n".join(lines) + "\n"
