"""In-memory UML class model with whiteboard layers.

A :class:`ModelDocument` is one replica's materialized state. All mutation
goes through the methods below, which validate, keep referential integrity
(cascade deletes, clone mirroring) and append history entries. Mutations are
deterministic: element ids come from a per-document counter, so replicas that
apply the same operations in the same order produce identical documents.
"""

from __future__ import annotations

import copy as _copy
import re
from dataclasses import dataclass, field

from .errors import (
    BoundsOutsideBoard,
    BoundsTooSmall,
    InvalidCardinality,
    InvalidChange,
    InvalidStroke,
    UnknownBoard,
    UnknownElement,
)

VISIBILITIES = ("+", "-", "#", "~")
RELATIONSHIP_KINDS = ("association", "inheritance", "aggregation", "composition", "dependency")
CARDINALITIES = ("", "1", "0..1", "*", "1..*", "0..*")

MIN_CLASS_SIZE = 20.0
DEFAULT_BOARD_WIDTH = 1000.0
DEFAULT_BOARD_HEIGHT = 750.0

FORMAT_NAME = "modelsync"
FORMAT_VERSION = 1

_ID_SUFFIX = re.compile(r"(\d+)$")


@dataclass
class Rect:
    x: float
    y: float
    w: float
    h: float

    def contains(self, px: float, py: float) -> bool:
        """Closed-rectangle containment (edges count as inside)."""
        return self.x <= px <= self.x + self.w and self.y <= py <= self.y + self.h

    def offset(self, dx: float, dy: float) -> Rect:
        return Rect(self.x + dx, self.y + dy, self.w, self.h)

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.w, self.h]

    @classmethod
    def from_seq(cls, seq) -> Rect:
        x, y, w, h = (float(v) for v in seq)
        return cls(x, y, w, h)


@dataclass
class Pose:
    x: float = 0.0
    y: float = 0.0
    z: float = 0.0
    yaw: float = 0.0

    def to_list(self) -> list[float]:
        return [self.x, self.y, self.z, self.yaw]

    @classmethod
    def from_seq(cls, seq) -> Pose:
        x, y, z, yaw = (float(v) for v in seq)
        return cls(x, y, z, yaw)


@dataclass
class Whiteboard:
    id: str
    name: str
    pose: Pose = field(default_factory=Pose)
    width: float = DEFAULT_BOARD_WIDTH
    height: float = DEFAULT_BOARD_HEIGHT
    links: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "name": self.name,
            "pose": self.pose.to_list(),
            "width": self.width,
            "height": self.height,
            "links": sorted(self.links),
        }

    @classmethod
    def from_dict(cls, d: dict) -> Whiteboard:
        return cls(
            id=d["id"],
            name=d["name"],
            pose=Pose.from_seq(d["pose"]),
            width=float(d["width"]),
            height=float(d["height"]),
            links=set(d["links"]),
        )


@dataclass
class MemberField:
    visibility: str
    name: str
    type_text: str

    def to_dict(self) -> dict:
        return {"visibility": self.visibility, "name": self.name, "type_text": self.type_text}

    @classmethod
    def from_dict(cls, d: dict) -> MemberField:
        return cls(d["visibility"], d["name"], d["type_text"])


@dataclass
class MemberMethod:
    visibility: str
    name: str
    params: list[list[str]] = field(default_factory=list)
    return_text: str = ""

    def to_dict(self) -> dict:
        return {
            "visibility": self.visibility,
            "name": self.name,
            "params": [list(p) for p in self.params],
            "return_text": self.return_text,
        }

    @classmethod
    def from_dict(cls, d: dict) -> MemberMethod:
        return cls(d["visibility"], d["name"], [list(p) for p in d["params"]], d["return_text"])


@dataclass
class ClassElement:
    id: str
    whiteboard_id: str
    name: str = ""
    stereotype: str | None = None
    attributes: list[MemberField] = field(default_factory=list)
    methods: list[MemberMethod] = field(default_factory=list)
    bounds: Rect = field(default_factory=lambda: Rect(0, 0, MIN_CLASS_SIZE, MIN_CLASS_SIZE))
    origin_id: str | None = None
    last_editor: str | None = None
    last_edit_time: int | None = None

    def members_dict(self) -> dict:
        """The mirrored portion of a class: header plus member lists."""
        return {
            "name": self.name,
            "stereotype": self.stereotype,
            "attributes": [a.to_dict() for a in self.attributes],
            "methods": [m.to_dict() for m in self.methods],
        }

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "board": self.whiteboard_id,
            "name": self.name,
            "stereotype": self.stereotype,
            "attributes": [a.to_dict() for a in self.attributes],
            "methods": [m.to_dict() for m in self.methods],
            "bounds": self.bounds.to_list(),
            "origin": self.origin_id,
            "last_editor": self.last_editor,
            "last_edit_time": self.last_edit_time,
        }

    @classmethod
    def from_dict(cls, d: dict) -> ClassElement:
        return cls(
            id=d["id"],
            whiteboard_id=d["board"],
            name=d["name"],
            stereotype=d["stereotype"],
            attributes=[MemberField.from_dict(a) for a in d["attributes"]],
            methods=[MemberMethod.from_dict(m) for m in d["methods"]],
            bounds=Rect.from_seq(d["bounds"]),
            origin_id=d["origin"],
            last_editor=d["last_editor"],
            last_edit_time=d["last_edit_time"],
        )


@dataclass
class Relationship:
    id: str
    kind: str
    source: str
    target: str
    source_card: str = ""
    target_card: str = ""
    label: str = ""
    waypoints: list[list[float]] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "kind": self.kind,
            "source": self.source,
            "target": self.target,
            "source_card": self.source_card,
            "target_card": self.target_card,
            "label": self.label,
            "waypoints": [list(p) for p in self.waypoints],
        }

    @classmethod
    def from_dict(cls, d: dict) -> Relationship:
        return cls(
            id=d["id"],
            kind=d["kind"],
            source=d["source"],
            target=d["target"],
            source_card=d["source_card"],
            target_card=d["target_card"],
            label=d["label"],
            waypoints=[[float(x), float(y)] for x, y in d["waypoints"]],
        )


@dataclass
class Package:
    id: str
    name: str
    member_ids: set[str] = field(default_factory=set)

    def to_dict(self) -> dict:
        return {"id": self.id, "name": self.name, "members": sorted(self.member_ids)}

    @classmethod
    def from_dict(cls, d: dict) -> Package:
        return cls(d["id"], d["name"], set(d["members"]))


@dataclass
class Stroke:
    id: str
    board: str
    points: list[list[float]]
    actor: str
    t_start: int
    t_end: int

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "board": self.board,
            "points": [list(p) for p in self.points],
            "actor": self.actor,
            "t_start": self.t_start,
            "t_end": self.t_end,
        }

    @classmethod
    def from_dict(cls, d: dict) -> Stroke:
        return cls(
            id=d["id"],
            board=d["board"],
            points=[[float(x), float(y)] for x, y in d["points"]],
            actor=d["actor"],
            t_start=int(d["t_start"]),
            t_end=int(d["t_end"]),
        )


@dataclass
class HistoryEntry:
    element_id: str
    actor: str
    timestamp: int
    op_kind: str

    def to_dict(self) -> dict:
        return {"element": self.element_id, "actor": self.actor, "ts": self.timestamp, "op": self.op_kind}

    @classmethod
    def from_dict(cls, d: dict) -> HistoryEntry:
        return cls(d["element"], d["actor"], int(d["ts"]), d["op"])


@dataclass(frozen=True)
class LayerSet:
    """A named set of element ids treated as one layer for the layer algebra."""

    name: str
    members: frozenset[str] = frozenset()


def layer_add(a: LayerSet, b: LayerSet) -> LayerSet:
    return LayerSet(f"{a.name}+{b.name}", a.members | b.members)


def layer_subtract(a: LayerSet, b: LayerSet) -> LayerSet:
    return LayerSet(f"{a.name}-{b.name}", a.members - b.members)


_CHANGE_KINDS = (
    "set_name",
    "set_stereotype",
    "add_attribute",
    "update_attribute",
    "remove_attribute",
    "add_method",
    "update_method",
    "remove_method",
    "move_bounds",
)


class ModelDocument:
    """The replicated design artifact.

    ``version`` mirrors the highest applied server sequence number; the
    document itself never bumps it (the sync engine does).
    """

    def __init__(self, doc_id: str = "doc", default_board: bool = True):
        self.doc_id = doc_id
        self.whiteboards: dict[str, Whiteboard] = {}
        self.elements: dict[str, ClassElement] = {}
        self.relationships: dict[str, Relationship] = {}
        self.packages: dict[str, Package] = {}
        self.strokes: dict[str, Stroke] = {}
        self.history: list[HistoryEntry] = []
        self.version = 0
        self._next_id = 0
        if default_board:
            board = Whiteboard(self._new_id("b"), "Board 1")
            self.whiteboards[board.id] = board

    # -- ids ---------------------------------------------------------------

    def _new_id(self, prefix: str) -> str:
        self._next_id += 1
        return f"{prefix}{self._next_id}"

    def _known_ids(self):
        yield from self.whiteboards
        yield from self.elements
        yield from self.relationships
        yield from self.packages
        yield from self.strokes

    # -- history -----------------------------------------------------------

    def _touch(self, element: ClassElement, actor: str, now: int, op_kind: str) -> None:
        element.last_editor = actor
        element.last_edit_time = int(now)
        self.history.append(HistoryEntry(element.id, actor, int(now), op_kind))

    def record_edit(self, element_id: str, actor: str, now: int, op_kind: str = "touch") -> HistoryEntry:
        """Append a history entry for an existing model entity.

        Classes also get their last-editor fields refreshed; other entity
        kinds only gain the history entry.
        """
        if element_id in self.elements:
            self._touch(self.elements[element_id], actor, now, op_kind)
            return self.history[-1]
        if element_id in self.relationships or element_id in self.strokes or element_id in self.packages:
            entry = HistoryEntry(element_id, actor, int(now), op_kind)
            self.history.append(entry)
            return entry
        raise UnknownElement(element_id)

    # -- whiteboards ---------------------------------------------------------

    def create_whiteboard(
        self,
        name: str,
        pose: Pose | None = None,
        width: float = DEFAULT_BOARD_WIDTH,
        height: float = DEFAULT_BOARD_HEIGHT,
    ) -> Whiteboard:
        if width <= 0 or height <= 0:
            raise InvalidChange("board dimensions must be positive")
        board = Whiteboard(self._new_id("b"), name, pose or Pose(), float(width), float(height))
        self.whiteboards[board.id] = board
        return board

    def update_whiteboard(
        self,
        board_id: str,
        name: str | None = None,
        pose: Pose | None = None,
        links: set[str] | None = None,
    ) -> Whiteboard:
        board = self.whiteboards.get(board_id)
        if board is None:
            raise UnknownBoard(board_id)
        if name is not None:
            board.name = name
        if pose is not None:
            board.pose = pose
        if links is not None:
            unknown = links - self.whiteboards.keys()
            if unknown:
                raise UnknownBoard(sorted(unknown)[0])
            board.links = set(links) - {board_id}
        return board

    # -- classes -------------------------------------------------------------

    def create_class(self, board: str, bounds: Rect, actor: str, now: int) -> str:
        wb = self.whiteboards.get(board)
        if wb is None:
            raise UnknownBoard(board)
        if bounds.w < MIN_CLASS_SIZE or bounds.h < MIN_CLASS_SIZE:
            raise BoundsTooSmall(f"{bounds.w}x{bounds.h} below {MIN_CLASS_SIZE} unit floor")
        if bounds.x < 0 or bounds.y < 0 or bounds.x + bounds.w > wb.width or bounds.y + bounds.h > wb.height:
            raise BoundsOutsideBoard(f"{bounds.to_list()} exceeds board {wb.width}x{wb.height}")
        element = ClassElement(self._new_id("c"), board, bounds=bounds)
        self.elements[element.id] = element
        self._touch(element, actor, now, "create_class")
        return element.id

    def clones_of(self, origin_id: str) -> list[ClassElement]:
        return [e for e in self.elements.values() if e.origin_id == origin_id]

    def _apply_class_change(self, element: ClassElement, change: dict) -> None:
        kind = change.get("kind")
        if kind == "set_name":
            name = change.get("name", "")
            if not name:
                raise InvalidChange("class name must be non-empty")
            element.name = name
        elif kind == "set_stereotype":
            element.stereotype = change.get("stereotype")
        elif kind in ("add_attribute", "add_method"):
            member = self._build_member(kind, change)
            target = element.attributes if kind == "add_attribute" else element.methods
            index = change.get("index")
            if index is None:
                target.append(member)
            else:
                target.insert(int(index), member)
        elif kind in ("update_attribute", "update_method"):
            target = element.attributes if kind == "update_attribute" else element.methods
            member = target[self._member_index(target, change)]
            if "visibility" in change:
                member.visibility = self._check_visibility(change["visibility"])
            if "name" in change:
                if not change["name"]:
                    raise InvalidChange("member name must be non-empty")
                member.name = change["name"]
            if "type_text" in change and isinstance(member, MemberField):
                member.type_text = change["type_text"]
            if isinstance(member, MemberMethod):
                if "params" in change:
                    member.params = [list(p) for p in change["params"]]
                if "return_text" in change:
                    member.return_text = change["return_text"]
        elif kind in ("remove_attribute", "remove_method"):
            target = element.attributes if kind == "remove_attribute" else element.methods
            del target[self._member_index(target, change)]
        elif kind == "move_bounds":
            bounds = Rect.from_seq(change["bounds"])
            if bounds.w < MIN_CLASS_SIZE or bounds.h < MIN_CLASS_SIZE:
                raise BoundsTooSmall(f"{bounds.w}x{bounds.h}")
            element.bounds = bounds
        else:
            raise InvalidChange(f"unknown change kind {kind!r}")

    @staticmethod
    def _check_visibility(value: str) -> str:
        if value not in VISIBILITIES:
            raise InvalidChange(f"visibility {value!r} not in {VISIBILITIES}")
        return value

    def _build_member(self, kind: str, change: dict):
        visibility = self._check_visibility(change.get("visibility", "+"))
        name = change.get("name", "")
        if not name:
            raise InvalidChange("member name must be non-empty")
        if kind == "add_attribute":
            return MemberField(visibility, name, change.get("type_text", ""))
        return MemberMethod(
            visibility,
            name,
            [list(p) for p in change.get("params", [])],
            change.get("return_text", ""),
        )

    @staticmethod
    def _member_index(target: list, change: dict) -> int:
        index = change.get("index")
        if index is None or not 0 <= int(index) < len(target):
            raise InvalidChange(f"member index {index!r} out of range")
        return int(index)

    def edit_class(self, element_id: str, change: dict, actor: str, now: int) -> ClassElement:
        """Apply one change to a class.

        Header and member changes on an element that has shallow clones are
        mirrored into every clone by resyncing the clone's header and member
        lists from the original; bounds moves are never mirrored.
        """
        element = self.elements.get(element_id)
        if element is None:
            raise UnknownElement(element_id)
        kind = change.get("kind")
        if kind not in _CHANGE_KINDS:
            raise InvalidChange(f"unknown change kind {kind!r}")
        self._apply_class_change(element, change)
        self._touch(element, actor, now, kind)
        if kind != "move_bounds":
            for clone in self.clones_of(element_id):
                clone.name = element.name
                clone.stereotype = element.stereotype
                clone.attributes = _copy.deepcopy(element.attributes)
                clone.methods = _copy.deepcopy(element.methods)
                self._touch(clone, actor, now, kind)
        return element

    # -- relationships ---------------------------------------------------------

    def create_relationship(
        self,
        kind: str,
        source: str,
        target: str,
        source_card: str = "",
        target_card: str = "",
        label: str = "",
        waypoints: list[list[float]] | None = None,
        actor: str = "",
        now: int = 0,
    ) -> str:
        rel_id = self._insert_relationship(kind, source, target, source_card, target_card, label, waypoints)
        self._touch(self.elements[source], actor, now, "create_relationship")
        self._touch(self.elements[target], actor, now, "create_relationship")
        # Mirror onto shallow clones of either endpoint: the clone replaces
        # its endpoint, the other side stays the original counterpart.
        for clone in self.clones_of(source):
            self._insert_relationship(kind, clone.id, target, source_card, target_card, label, None)
            self._touch(clone, actor, now, "mirror_relationship")
        for clone in self.clones_of(target):
            self._insert_relationship(kind, source, clone.id, source_card, target_card, label, None)
            self._touch(clone, actor, now, "mirror_relationship")
        return rel_id

    def _insert_relationship(
        self,
        kind: str,
        source: str,
        target: str,
        source_card: str,
        target_card: str,
        label: str,
        waypoints: list[list[float]] | None,
    ) -> str:
        if kind not in RELATIONSHIP_KINDS:
            raise InvalidChange(f"unknown relationship kind {kind!r}")
        if source not in self.elements:
            raise UnknownElement(source)
        if target not in self.elements:
            raise UnknownElement(target)
        if source_card not in CARDINALITIES or target_card not in CARDINALITIES:
            raise InvalidCardinality(f"{source_card!r}/{target_card!r}")
        if kind == "inheritance" and (source_card or target_card):
            raise InvalidCardinality("inheritance carries empty cardinalities")
        rel = Relationship(
            self._new_id("r"),
            kind,
            source,
            target,
            source_card,
            target_card,
            label,
            [list(p) for p in waypoints or []],
        )
        self.relationships[rel.id] = rel
        return rel.id

    # -- deletion ----------------------------------------------------------

    def delete_element(self, element_id: str, actor: str, now: int) -> frozenset[str]:
        """Delete an entity; classes cascade. Unknown ids are a no-op.

        Deleting a class atomically removes every relationship touching it
        and its package membership, and detaches its shallow clones.
        """
        if element_id in self.elements:
            removed = {element_id}
            for rel_id, rel in list(self.relationships.items()):
                if rel.source == element_id or rel.target == element_id:
                    del self.relationships[rel_id]
                    removed.add(rel_id)
            for package in self.packages.values():
                package.member_ids.discard(element_id)
            for clone in self.clones_of(element_id):
                clone.origin_id = None
            del self.elements[element_id]
            self.history.append(HistoryEntry(element_id, actor, int(now), "delete"))
            return frozenset(removed)
        if element_id in self.relationships:
            del self.relationships[element_id]
            self.history.append(HistoryEntry(element_id, actor, int(now), "delete"))
            return frozenset({element_id})
        if element_id in self.strokes:
            del self.strokes[element_id]
            self.history.append(HistoryEntry(element_id, actor, int(now), "delete"))
            return frozenset({element_id})
        if element_id in self.packages:
            del self.packages[element_id]
            self.history.append(HistoryEntry(element_id, actor, int(now), "delete"))
            return frozenset({element_id})
        return frozenset()

    # -- packages ----------------------------------------------------------

    def create_package(self, name: str, member_ids, actor: str, now: int) -> str:
        members = set(member_ids)
        self._check_package_members(members, exclude=None)
        package = Package(self._new_id("p"), name, members)
        self.packages[package.id] = package
        self.history.append(HistoryEntry(package.id, actor, int(now), "create_package"))
        return package.id

    def update_package(
        self,
        package_id: str,
        add=(),
        remove=(),
        name: str | None = None,
        actor: str = "",
        now: int = 0,
    ) -> Package:
        package = self.packages.get(package_id)
        if package is None:
            raise UnknownElement(package_id)
        added = set(add)
        self._check_package_members(added, exclude=package_id)
        if name is not None:
            package.name = name
        package.member_ids |= added
        package.member_ids -= set(remove)
        self.history.append(HistoryEntry(package_id, actor, int(now), "update_package"))
        return package

    def _check_package_members(self, members: set[str], exclude: str | None) -> None:
        for member in sorted(members):
            if member not in self.elements:
                raise UnknownElement(member)
            for package in self.packages.values():
                if package.id != exclude and member in package.member_ids:
                    raise InvalidChange(f"{member} already belongs to package {package.id}")

    # -- strokes -----------------------------------------------------------

    def add_stroke(self, board: str, points, actor: str, t_start: int, t_end: int) -> str:
        wb = self.whiteboards.get(board)
        if wb is None:
            raise UnknownBoard(board)
        pts = [[float(x), float(y)] for x, y in points]
        if len(pts) < 2:
            raise InvalidStroke("stroke needs at least 2 points")
        for x, y in pts:
            if not (0 <= x <= wb.width and 0 <= y <= wb.height):
                raise InvalidStroke(f"point ({x},{y}) outside board")
        stroke = Stroke(self._new_id("s"), board, pts, actor, int(t_start), int(t_end))
        self.strokes[stroke.id] = stroke
        return stroke.id

    # -- copy --------------------------------------------------------------

    def deep_copy(self, cluster, target_board: str, offset, actor: str, now: int) -> dict[str, str]:
        """Duplicate a cluster independently.

        Relationships with both endpoints inside the cluster are duplicated
        between the copies; relationships leaving the cluster are dropped.
        Returns the source-id to copy-id mapping.
        """
        return self._copy_cluster(cluster, target_board, offset, actor, now, shallow=False)

    def shallow_copy(self, cluster, target_board: str, offset, actor: str, now: int) -> dict[str, str]:
        """Clone a cluster with live links back to the originals.

        Clones carry ``origin_id`` and mirror subsequent header/member edits
        of their origin. Internal relationships are duplicated between
        clones; external ones are re-created from the clone to the original
        external counterpart.
        """
        return self._copy_cluster(cluster, target_board, offset, actor, now, shallow=True)

    def _copy_cluster(self, cluster, target_board, offset, actor, now, shallow: bool) -> dict[str, str]:
        if target_board not in self.whiteboards:
            raise UnknownBoard(target_board)
        source_ids = sorted(set(cluster))
        for source_id in source_ids:
            if source_id not in self.elements:
                raise UnknownElement(source_id)
        dx, dy = float(offset[0]), float(offset[1])
        op_kind = "shallow_copy" if shallow else "deep_copy"
        mapping: dict[str, str] = {}
        for source_id in source_ids:
            source = self.elements[source_id]
            element = ClassElement(
                id=self._new_id("c"),
                whiteboard_id=target_board,
                name=source.name,
                stereotype=source.stereotype,
                attributes=_copy.deepcopy(source.attributes),
                methods=_copy.deepcopy(source.methods),
                bounds=source.bounds.offset(dx, dy),
                origin_id=source_id if shallow else None,
            )
            self.elements[element.id] = element
            mapping[source_id] = element.id
            self._touch(element, actor, now, op_kind)
        in_cluster = set(source_ids)
        for rel in list(self.relationships.values()):
            src_in = rel.source in in_cluster
            tgt_in = rel.target in in_cluster
            if src_in and tgt_in:
                new_id = self._insert_relationship(
                    rel.kind,
                    mapping[rel.source],
                    mapping[rel.target],
                    rel.source_card,
                    rel.target_card,
                    rel.label,
                    [[x + dx, y + dy] for x, y in rel.waypoints],
                )
                mapping[rel.id] = new_id
            elif shallow and (src_in or tgt_in):
                new_id = self._insert_relationship(
                    rel.kind,
                    mapping[rel.source] if src_in else rel.source,
                    mapping[rel.target] if tgt_in else rel.target,
                    rel.source_card,
                    rel.target_card,
                    rel.label,
                    None,
                )
                mapping[rel.id] = new_id
        return mapping

    # -- layers --------------------------------------------------------------

    def layer(self, name: str, member_ids) -> LayerSet:
        members = frozenset(member_ids)
        for member in sorted(members):
            if member not in self.elements and member not in self.relationships:
                raise UnknownElement(member)
        return LayerSet(name, members)

    def board_layer(self, board_id: str) -> LayerSet:
        """All classes on a board plus relationships fully inside it, as a layer."""
        board = self.whiteboards.get(board_id)
        if board is None:
            raise UnknownBoard(board_id)
        classes = {e.id for e in self.elements.values() if e.whiteboard_id == board_id}
        rels = {r.id for r in self.relationships.values() if r.source in classes and r.target in classes}
        return LayerSet(board.name, frozenset(classes | rels))

    # -- queries ---------------------------------------------------------------

    def classes_on_board(self, board_id: str) -> list[ClassElement]:
        """Classes on one board in creation order (last one is topmost)."""
        return [e for e in self.elements.values() if e.whiteboard_id == board_id]

    # -- integrity -----------------------------------------------------------

    def check_integrity(self) -> list[str]:
        """Walk the whole document; returns violations (empty means sound)."""
        problems = []
        seen: set[str] = set()
        for known in self._known_ids():
            if known in seen:
                problems.append(f"duplicate id {known}")
            seen.add(known)
        for element in self.elements.values():
            if element.whiteboard_id not in self.whiteboards:
                problems.append(f"{element.id} on unknown board {element.whiteboard_id}")
            if element.origin_id is not None:
                if element.origin_id == element.id:
                    problems.append(f"{element.id} is its own origin")
                elif element.origin_id not in self.elements:
                    problems.append(f"{element.id} origin {element.origin_id} dangles")
            if element.bounds.w < MIN_CLASS_SIZE or element.bounds.h < MIN_CLASS_SIZE:
                problems.append(f"{element.id} bounds below minimum size")
        for rel in self.relationships.values():
            if rel.source not in self.elements:
                problems.append(f"{rel.id} source {rel.source} dangles")
            if rel.target not in self.elements:
                problems.append(f"{rel.id} target {rel.target} dangles")
            if rel.kind not in RELATIONSHIP_KINDS:
                problems.append(f"{rel.id} has unknown kind {rel.kind}")
            if rel.kind == "inheritance" and (rel.source_card or rel.target_card):
                problems.append(f"{rel.id} inheritance with cardinalities")
        membership: dict[str, str] = {}
        for package in self.packages.values():
            for member in package.member_ids:
                if member not in self.elements:
                    problems.append(f"package {package.id} member {member} dangles")
                if member in membership:
                    problems.append(f"{member} in two packages ({membership[member]}, {package.id})")
                membership[member] = package.id
        for stroke in self.strokes.values():
            if stroke.board not in self.whiteboards:
                problems.append(f"stroke {stroke.id} on unknown board {stroke.board}")
        for board in self.whiteboards.values():
            if board.id in board.links:
                problems.append(f"board {board.id} links to itself")
        return problems

    # -- serialization ---------------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "format": FORMAT_NAME,
            "version": FORMAT_VERSION,
            "whiteboards": [b.to_dict() for b in self.whiteboards.values()],
            "elements": [e.to_dict() for e in self.elements.values()],
            "relationships": [r.to_dict() for r in self.relationships.values()],
            "packages": [p.to_dict() for p in self.packages.values()],
            "strokes": [s.to_dict() for s in self.strokes.values()],
            "history": [h.to_dict() for h in self.history],
            "applied_seq": self.version,
        }

    @classmethod
    def from_dict(cls, data: dict, doc_id: str = "doc") -> ModelDocument:
        if data.get("format") != FORMAT_NAME or data.get("version") != FORMAT_VERSION:
            from .errors import FormatVersionMismatch

            raise FormatVersionMismatch(f"{data.get('format')}/{data.get('version')}")
        doc = cls(doc_id, default_board=False)
        for b in data["whiteboards"]:
            board = Whiteboard.from_dict(b)
            doc.whiteboards[board.id] = board
        for e in data["elements"]:
            element = ClassElement.from_dict(e)
            doc.elements[element.id] = element
        for r in data["relationships"]:
            rel = Relationship.from_dict(r)
            doc.relationships[rel.id] = rel
        for p in data["packages"]:
            package = Package.from_dict(p)
            doc.packages[package.id] = package
        for s in data["strokes"]:
            stroke = Stroke.from_dict(s)
            doc.strokes[stroke.id] = stroke
        doc.history = [HistoryEntry.from_dict(h) for h in data["history"]]
        doc.version = int(data["applied_seq"])
        highest = 0
        for known in doc._known_ids():
            match = _ID_SUFFIX.search(known)
            if match:
                highest = max(highest, int(match.group(1)))
        doc._next_id = highest
        return doc
