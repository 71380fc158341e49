"""Operation bodies: the tagged union of document mutations.

A body is a plain JSON object with an ``op`` discriminator; it is what
travels in sequenced operations, the oplog, and over the wire. Applying a
body is deterministic, so replicas that apply the same sequence agree bit
for bit, including on which bodies fail (failures become recorded no-ops).
"""

from __future__ import annotations

from .errors import MalformedOp, ModelSyncError
from .model import ModelDocument, Pose, Rect

OP_KINDS = (
    "create_class",
    "edit_class",
    "create_relationship",
    "delete_element",
    "deep_copy",
    "shallow_copy",
    "create_whiteboard",
    "update_whiteboard",
    "create_package",
    "update_package",
    "add_stroke",
    "record_edit",
)


def apply_body(doc: ModelDocument, body: dict, actor: str, ts: int):
    """Apply one mutation body; raises on invalid input."""
    op = body.get("op")
    if op == "create_class":
        return doc.create_class(body["board"], Rect.from_seq(body["bounds"]), actor, ts)
    if op == "edit_class":
        return doc.edit_class(body["id"], body["change"], actor, ts)
    if op == "create_relationship":
        return doc.create_relationship(
            body["kind"],
            body["source"],
            body["target"],
            body.get("source_card", ""),
            body.get("target_card", ""),
            body.get("label", ""),
            body.get("waypoints"),
            actor,
            ts,
        )
    if op == "delete_element":
        return sorted(doc.delete_element(body["id"], actor, ts))
    if op == "deep_copy":
        return doc.deep_copy(body["cluster"], body["board"], body["offset"], actor, ts)
    if op == "shallow_copy":
        return doc.shallow_copy(body["cluster"], body["board"], body["offset"], actor, ts)
    if op == "create_whiteboard":
        board = doc.create_whiteboard(
            body.get("name", ""),
            Pose.from_seq(body["pose"]) if body.get("pose") else None,
            body.get("width", 1000.0),
            body.get("height", 750.0),
        )
        return board.id
    if op == "update_whiteboard":
        board = doc.update_whiteboard(
            body["board"],
            name=body.get("name"),
            pose=Pose.from_seq(body["pose"]) if body.get("pose") else None,
            links=set(body["links"]) if body.get("links") is not None else None,
        )
        return board.id
    if op == "create_package":
        return doc.create_package(body.get("name", ""), body.get("members", []), actor, ts)
    if op == "update_package":
        package = doc.update_package(
            body["id"],
            add=body.get("add", []),
            remove=body.get("remove", []),
            name=body.get("name"),
            actor=actor,
            now=ts,
        )
        return package.id
    if op == "add_stroke":
        return doc.add_stroke(
            body["board"], body["points"], actor, body.get("t_start", ts), body.get("t_end", ts)
        )
    if op == "record_edit":
        doc.record_edit(body["id"], actor, ts, body.get("op_kind", "touch"))
        return body["id"]
    raise MalformedOp(f"unknown op {op!r}")


def try_apply(doc: ModelDocument, body: dict, actor: str, ts: int):
    """Apply a body, converting any failure into its stable error code.

    Returns ``(result, None)`` on success, ``(None, code)`` on failure. Every
    replica computes the same code for the same body in the same state.
    """
    try:
        return apply_body(doc, body, actor, ts), None
    except ModelSyncError as err:
        return None, err.code
    except (KeyError, TypeError, ValueError, IndexError):
        return None, MalformedOp.code
