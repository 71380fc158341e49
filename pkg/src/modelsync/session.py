"""Session hosting: join/leave, color assignment, sequencing, presence.

The session is transport-agnostic: every call returns the messages it wants
delivered as ``(recipient_actor, message)`` effects, and the caller (socket
server or simulation harness) moves them. That keeps the command loop a pure
state machine that both the live server and the deterministic harness share.

Presence is ephemeral awareness: it never enters the oplog, and fan-out per
actor is coalesced to at most one message every 100 ms (latest state wins).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from .errors import NameEmpty, NotJoined, SessionFull
from .history import ColorAssigner
from .model import ModelDocument
from .storage import load_oplog, load_snapshot, save_oplog, save_snapshot
from .sync import Operation, Replica, Sequencer

ACTIVITIES = ("looking", "drawing", "erasing", "pointing", "speaking", "idle")

MAX_CONNECTED = 16
PRESENCE_MIN_INTERVAL_MS = 100

Effect = tuple[str, dict]


@dataclass
class PresenceState:
    """Awareness snapshot of one collaborator."""

    actor: str
    board: str
    cursor: tuple[float, float] = (0.0, 0.0)
    scene_pos: tuple[float, float, float] = (0.0, 0.0, 0.0)
    gaze_target: str | None = None
    activity: str = "idle"
    updated_at: int = 0

    def __post_init__(self):
        if self.activity not in ACTIVITIES:
            raise ValueError(f"activity {self.activity!r} not in {ACTIVITIES}")

    def to_wire(self) -> dict:
        return {
            "t": "presence",
            "actor": self.actor,
            "board": self.board,
            "cursor": [self.cursor[0], self.cursor[1]],
            "pos": [self.scene_pos[0], self.scene_pos[1], self.scene_pos[2]],
            "gaze": self.gaze_target,
            "act": self.activity,
            "ts": self.updated_at,
        }

    @classmethod
    def from_wire(cls, msg: dict) -> PresenceState:
        return cls(
            actor=msg["actor"],
            board=msg["board"],
            cursor=(float(msg["cursor"][0]), float(msg["cursor"][1])),
            scene_pos=tuple(float(v) for v in msg["pos"]),
            gaze_target=msg.get("gaze"),
            activity=msg["act"],
            updated_at=int(msg["ts"]),
        )


@dataclass
class ActorInfo:
    actor: str
    name: str
    color: tuple[int, int, int]
    connected: bool = True


@dataclass
class JoinResult:
    actor: str
    color: tuple[int, int, int]
    snapshot: dict
    applied_seq: int
    effects: list[Effect] = field(default_factory=list)

    def welcome(self, epoch: int, peers: list[dict]) -> dict:
        return {
            "t": "welcome",
            "actor": self.actor,
            "color": list(self.color),
            "seq": self.applied_seq,
            "model": self.snapshot,
            "epoch": epoch,
            "peers": peers,
        }


class Session:
    def __init__(
        self,
        session_id: str,
        epoch: int = 0,
        palette: list[tuple[int, int, int]] | None = None,
        document: ModelDocument | None = None,
    ):
        self.session_id = session_id
        self.epoch = epoch
        self.sequencer = Sequencer()
        self.replica = Replica(document=document or ModelDocument(session_id))
        self.colors = ColorAssigner(palette)
        self.actors: dict[str, ActorInfo] = {}
        self.presence: dict[str, PresenceState] = {}
        self._presence_sent_at: dict[str, int] = {}
        self._presence_pending: dict[str, PresenceState] = {}
        self._join_counter = 0

    # -- membership ----------------------------------------------------------

    def connected_actors(self) -> list[str]:
        return [a for a, info in self.actors.items() if info.connected]

    def join(self, name: str, token: str | None = None) -> JoinResult:
        """Register (or re-register) an actor and build its welcome payload."""
        if not name:
            raise NameEmpty("actor name must be non-empty")
        if token is not None and token in self.actors:
            info = self.actors[token]
            info.connected = True
            info.name = name
        else:
            if len(self.connected_actors()) >= MAX_CONNECTED:
                raise SessionFull(f"{MAX_CONNECTED} actors already connected")
            self._join_counter += 1
            actor_id = f"a{self._join_counter}"
            color = self.colors.assign(actor_id)
            info = ActorInfo(actor_id, name, color)
            self.actors[actor_id] = info
        announce = {"t": "join", "actor": info.actor, "name": info.name, "color": list(info.color)}
        effects = [(peer, announce) for peer in self.connected_actors() if peer != info.actor]
        return JoinResult(
            actor=info.actor,
            color=info.color,
            snapshot=self.replica.document.to_dict(),
            applied_seq=self.replica.applied_seq,
            effects=effects,
        )

    def peers_of(self, actor: str) -> list[dict]:
        return [
            {"actor": info.actor, "name": info.name, "color": list(info.color)}
            for info in self.actors.values()
            if info.actor != actor and info.connected
        ]

    def leave(self, actor: str) -> list[Effect]:
        info = self.actors.get(actor)
        if info is None or not info.connected:
            return []
        info.connected = False
        self.presence.pop(actor, None)
        self._presence_pending.pop(actor, None)
        bye = {"t": "bye", "actor": actor}
        return [(peer, bye) for peer in self.connected_actors()]

    def _require_connected(self, actor: str) -> None:
        info = self.actors.get(actor)
        if info is None or not info.connected:
            raise NotJoined(actor)

    # -- operations ----------------------------------------------------------

    def submit(self, actor: str, client_seq: int, body: dict, ts: int) -> tuple[int, list[Effect]]:
        """Sequence, apply to the server replica, and fan out.

        Every connected actor (sender included) receives the sequenced op
        exactly once; duplicate submissions are acked with the original
        sequence number and not re-broadcast.
        """
        self._require_connected(actor)
        op, is_new = self.sequencer.sequence(Operation(actor, client_seq, body, int(ts)))
        effects: list[Effect] = [(actor, {"t": "ack", "cseq": client_seq, "seq": op.seq})]
        if is_new:
            self.replica.apply(op)
            wire = op.to_wire()
            effects.extend((peer, wire) for peer in self.connected_actors())
        return op.seq, effects

    # -- presence ------------------------------------------------------------

    def presence_update(self, state: PresenceState) -> tuple[list[Effect], int | None]:
        """Store and fan out presence, coalesced to 10 Hz per actor.

        Returns the effects to deliver now plus the time at which
        :meth:`flush_presence` must run to emit a held update, if any.
        """
        self._require_connected(state.actor)
        stored = self.presence.get(state.actor)
        if stored is not None and state.updated_at < stored.updated_at:
            return [], None
        self.presence[state.actor] = state
        now = state.updated_at
        sent_at = self._presence_sent_at.get(state.actor)
        if sent_at is None or now - sent_at >= PRESENCE_MIN_INTERVAL_MS:
            self._presence_sent_at[state.actor] = now
            self._presence_pending.pop(state.actor, None)
            return self._fan_out(state), None
        self._presence_pending[state.actor] = state
        return [], sent_at + PRESENCE_MIN_INTERVAL_MS

    def flush_presence(self, now: int) -> tuple[list[Effect], int | None]:
        """Emit held presence whose coalescing window has elapsed."""
        effects: list[Effect] = []
        next_due: int | None = None
        for actor in sorted(self._presence_pending):
            due = self._presence_sent_at[actor] + PRESENCE_MIN_INTERVAL_MS
            if now >= due:
                state = self._presence_pending.pop(actor)
                self._presence_sent_at[actor] = now
                effects.extend(self._fan_out(state))
            elif next_due is None or due < next_due:
                next_due = due
        return effects, next_due

    def _fan_out(self, state: PresenceState) -> list[Effect]:
        wire = state.to_wire()
        return [(peer, wire) for peer in self.connected_actors() if peer != state.actor]

    # -- persistence -----------------------------------------------------------

    def digest(self) -> str:
        return self.replica.digest()

    def persist(self, directory) -> None:
        base = Path(directory)
        base.mkdir(parents=True, exist_ok=True)
        save_snapshot(self.replica.document, base / f"{self.session_id}.model.json")
        save_oplog(self.sequencer.log, base / f"{self.session_id}.oplog.ndjson")

    @classmethod
    def load(
        cls,
        directory,
        session_id: str,
        epoch: int = 0,
        palette: list[tuple[int, int, int]] | None = None,
    ) -> Session:
        base = Path(directory)
        document = load_snapshot(base / f"{session_id}.model.json", session_id)
        oplog = load_oplog(base / f"{session_id}.oplog.ndjson")
        session = cls(session_id, epoch=epoch, palette=palette, document=document)
        session.sequencer.restore(oplog)
        # The snapshot may predate the oplog tail; replay the suffix.
        for op in oplog:
            session.replica.apply(op)
        return session
