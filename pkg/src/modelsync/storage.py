"""Snapshot and oplog files.

Snapshot: one JSON document in the ``modelsync`` format (version 1).
Oplog: newline-delimited JSON, one sequenced op message per line.
"""

from __future__ import annotations

import json
from pathlib import Path

from .errors import GapInLog, IoFailure
from .model import ModelDocument
from .sync import Operation


def save_snapshot(doc: ModelDocument, path) -> None:
    try:
        Path(path).write_text(json.dumps(doc.to_dict(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    except OSError as err:
        raise IoFailure(str(err)) from err


def load_snapshot(path, doc_id: str = "doc") -> ModelDocument:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as err:
        raise IoFailure(str(err)) from err
    return ModelDocument.from_dict(data, doc_id)


def save_oplog(log: list[Operation], path) -> None:
    try:
        with Path(path).open("w", encoding="utf-8") as fh:
            for op in log:
                fh.write(json.dumps(op.to_wire(), sort_keys=True) + "\n")
    except OSError as err:
        raise IoFailure(str(err)) from err


def load_oplog(path) -> list[Operation]:
    try:
        lines = Path(path).read_text(encoding="utf-8").splitlines()
    except OSError as err:
        raise IoFailure(str(err)) from err
    log = [Operation.from_wire(json.loads(line)) for line in lines if line.strip()]
    for i, op in enumerate(log, start=1):
        if op.seq != i:
            raise GapInLog(f"expected seq {i}, found {op.seq}")
    return log
