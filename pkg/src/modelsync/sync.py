"""Operation-based replication with an authoritative total order.

One sequencer assigns gap-free sequence numbers; replicas apply operations
strictly in that order, buffering early arrivals and discarding duplicates.
There is no merge: an operation that no longer applies (say, an edit racing
a delete) becomes the same recorded no-op on every replica, which keeps the
log replayable and all replicas byte-identical.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

from . import canonical
from .errors import GapInLog
from .model import ModelDocument
from .ops import try_apply


@dataclass(frozen=True)
class Operation:
    """One sequenced, idempotent edit; the unit of replication."""

    actor: str
    client_seq: int
    body: dict
    issued_at: int
    seq: int | None = None

    def to_wire(self) -> dict:
        msg = {
            "t": "op",
            "actor": self.actor,
            "cseq": self.client_seq,
            "body": self.body,
            "ts": self.issued_at,
        }
        if self.seq is not None:
            msg["seq"] = self.seq
        return msg

    @classmethod
    def from_wire(cls, msg: dict) -> Operation:
        return cls(
            actor=msg["actor"],
            client_seq=int(msg["cseq"]),
            body=msg["body"],
            issued_at=int(msg["ts"]),
            seq=int(msg["seq"]) if msg.get("seq") is not None else None,
        )


class Sequencer:
    """Assigns the total order; resubmissions get their original number."""

    def __init__(self):
        self.log: list[Operation] = []
        self._by_client: dict[tuple[str, int], int] = {}

    @property
    def last_seq(self) -> int:
        return len(self.log)

    def sequence(self, op: Operation) -> tuple[Operation, bool]:
        """Returns ``(sequenced_op, is_new)``; duplicates return the original."""
        key = (op.actor, op.client_seq)
        existing = self._by_client.get(key)
        if existing is not None:
            return self.log[existing - 1], False
        sequenced = replace(op, seq=len(self.log) + 1)
        self.log.append(sequenced)
        self._by_client[key] = sequenced.seq
        return sequenced, True

    def restore(self, log: list[Operation]) -> None:
        """Adopt a previously persisted log as the authoritative prefix."""
        for i, op in enumerate(log, start=1):
            if op.seq != i:
                raise GapInLog(f"expected seq {i}, found {op.seq}")
        self.log = list(log)
        self._by_client = {(op.actor, op.client_seq): op.seq for op in log}


@dataclass
class Replica:
    """One copy of the document plus application bookkeeping.

    ``on_applied(op, result, error)`` fires after each in-order application;
    clients use it to learn ids their own operations produced.
    """

    document: ModelDocument = field(default_factory=ModelDocument)
    pending: dict[int, Operation] = field(default_factory=dict)
    noops: list[tuple[int, str]] = field(default_factory=list)
    on_applied: object = None

    @property
    def applied_seq(self) -> int:
        return self.document.version

    def apply(self, op: Operation) -> None:
        """Apply in total order; buffer early arrivals, drop duplicates."""
        if op.seq is None:
            raise ValueError("cannot apply an unsequenced operation")
        if op.seq <= self.applied_seq:
            return
        if op.seq > self.applied_seq + 1:
            self.pending[op.seq] = op
            return
        self._apply_next(op)
        while self.applied_seq + 1 in self.pending:
            self._apply_next(self.pending.pop(self.applied_seq + 1))

    def _apply_next(self, op: Operation) -> None:
        result, error = try_apply(self.document, op.body, op.actor, op.issued_at)
        if error is not None:
            self.noops.append((op.seq, error))
        self.document.version = op.seq
        if self.on_applied is not None:
            self.on_applied(op, result, error)

    def digest(self) -> str:
        return state_digest(self)


def state_digest(state) -> str:
    """Deterministic digest over the canonically serialized document."""
    doc = state.document if isinstance(state, Replica) else state
    return canonical.digest(doc.to_dict())


def replay(log: list[Operation], doc_id: str = "doc") -> ModelDocument:
    """Rebuild a document from a contiguous log; pure function of the log."""
    replica = replay_replica(log, doc_id)
    return replica.document


def replay_replica(log: list[Operation], doc_id: str = "doc") -> Replica:
    for i, op in enumerate(log, start=1):
        if op.seq != i:
            raise GapInLog(f"expected seq {i}, found {op.seq}")
    replica = Replica(document=ModelDocument(doc_id))
    for op in log:
        replica.apply(op)
    return replica
