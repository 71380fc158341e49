"""modelsync: real-time collaborative UML class diagram engine."""

from .model import (
    ClassElement,
    LayerSet,
    MemberField,
    MemberMethod,
    ModelDocument,
    Package,
    Pose,
    Rect,
    Relationship,
    Stroke,
    Whiteboard,
    layer_add,
    layer_subtract,
)
from .session import PresenceState, Session
from .strokes import (
    ClassShape,
    InformalSketch,
    RecognizerConfig,
    RelationshipLine,
    classify_stroke,
    materialize,
    resample_stroke,
)
from .sync import Operation, Replica, Sequencer, replay, state_digest

__version__ = "0.1.0"

__all__ = [
    "ClassElement",
    "ClassShape",
    "InformalSketch",
    "LayerSet",
    "MemberField",
    "MemberMethod",
    "ModelDocument",
    "Operation",
    "Package",
    "Pose",
    "PresenceState",
    "Rect",
    "RecognizerConfig",
    "Relationship",
    "RelationshipLine",
    "Replica",
    "Sequencer",
    "Session",
    "Stroke",
    "Whiteboard",
    "classify_stroke",
    "layer_add",
    "layer_subtract",
    "materialize",
    "replay",
    "resample_stroke",
    "state_digest",
]
