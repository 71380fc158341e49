"""Error types shared across the engine.

Every error carries a stable ``code`` string. Codes travel over the wire in
``err`` messages and are what replicas record when an operation body is
converted into a no-op, so they must be deterministic and identical on every
replica.
"""

from __future__ import annotations


class ModelSyncError(Exception):
    """Base class; ``code`` is the stable machine-readable identifier."""

    code = "error"

    def __init__(self, message: str = ""):
        super().__init__(message or self.code)


class UnknownBoard(ModelSyncError):
    code = "unknown_board"


class UnknownElement(ModelSyncError):
    code = "unknown_element"


class BoundsTooSmall(ModelSyncError):
    code = "bounds_too_small"


class BoundsOutsideBoard(ModelSyncError):
    code = "bounds_outside_board"


class InvalidCardinality(ModelSyncError):
    code = "invalid_cardinality"


class InvalidChange(ModelSyncError):
    code = "invalid_change"


class InvalidStroke(ModelSyncError):
    code = "invalid_stroke"


class TooFewPoints(ModelSyncError):
    code = "too_few_points"


class PaletteExhausted(ModelSyncError):
    code = "palette_exhausted"


class SessionFull(ModelSyncError):
    code = "session_full"


class NameEmpty(ModelSyncError):
    code = "name_empty"


class NotJoined(ModelSyncError):
    code = "not_joined"


class GapInLog(ModelSyncError):
    code = "gap_in_log"


class MalformedOp(ModelSyncError):
    code = "malformed_op"


class IoFailure(ModelSyncError):
    code = "io_failure"


class FormatVersionMismatch(ModelSyncError):
    code = "format_version_mismatch"


class OutOfRange(ModelSyncError):
    code = "out_of_range"


class WrongLength(ModelSyncError):
    code = "wrong_length"


class EmptyInput(ModelSyncError):
    code = "empty_input"


class ScriptError(ModelSyncError):
    code = "script_error"


class NonConvergence(ModelSyncError):
    code = "non_convergence"
