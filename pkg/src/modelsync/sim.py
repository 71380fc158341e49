"""Deterministic multi-client simulation harness.

Spins up an in-process session plus N scripted bot clients on a virtual
clock. Every message (both directions) passes through a seeded network model
that adds latency, jitter, and optional duplication, so op broadcasts arrive
out of order and replicas must converge through the buffering rules alone.
Given the same scenario and seed, two runs produce byte-identical reports.
"""

from __future__ import annotations

import heapq
import json
import random
from dataclasses import dataclass
from pathlib import Path

from . import canonical
from .errors import ScriptError
from .model import ModelDocument, Stroke
from .session import PresenceState, Session
from .strokes import RecognizerConfig, classify_stroke, materialize, resample_stroke
from .sync import Operation, Replica

ACTION_VERBS = (
    "idle",
    "create_board",
    "board_switch",
    "stroke_rect",
    "stroke_line",
    "informal",
    "set_name",
    "set_stereotype",
    "add_attribute",
    "add_method",
    "move",
    "relationship",
    "delete",
    "deep_copy",
    "shallow_copy",
    "package",
    "record_edit",
    "presence",
    "presence_stream",
    "random_ops",
)


@dataclass
class NetworkModel:
    latency_ms: int = 0
    jitter_ms: int = 0
    duplicate: bool = False
    drop_presence: float = 0.0

    @classmethod
    def from_dict(cls, d: dict | None) -> NetworkModel:
        d = d or {}
        return cls(
            latency_ms=int(d.get("latency_ms", 0)),
            jitter_ms=int(d.get("jitter_ms", 0)),
            duplicate=bool(d.get("duplicate", False)),
            drop_presence=float(d.get("drop_presence", 0.0)),
        )

    def to_dict(self) -> dict:
        return {
            "latency_ms": self.latency_ms,
            "jitter_ms": self.jitter_ms,
            "duplicate": self.duplicate,
            "drop_presence": self.drop_presence,
        }

    def delays(self, rng: random.Random, presence: bool) -> list[int]:
        """Delivery delays for one message; empty means dropped."""
        if presence and self.drop_presence > 0 and rng.random() < self.drop_presence:
            return []
        def one() -> int:
            jitter = rng.uniform(-self.jitter_ms, self.jitter_ms) if self.jitter_ms else 0.0
            return max(0, int(round(self.latency_ms + jitter)))

        return [one(), one()] if self.duplicate else [one()]


def validate_scenario(scenario: dict) -> None:
    for bot in scenario.get("bots", []):
        for action in bot.get("script", []):
            verb = action.get("do")
            if verb not in ACTION_VERBS:
                raise ScriptError(f"unknown action {verb!r}")


def load_scenario(path) -> dict:
    scenario = json.loads(Path(path).read_text(encoding="utf-8"))
    validate_scenario(scenario)
    return scenario


def convergence_scenario(
    clients: int = 4,
    ops_per_client: int = 1000,
    latency_ms: int = 250,
    jitter_ms: int = 100,
    duplicate: bool = True,
    seed: int = 42,
    spacing_ms: int = 20,
) -> dict:
    """Random-op stress scenario used by the convergence acceptance suite."""
    return {
        "name": f"convergence-{clients}x{ops_per_client}",
        "seed": seed,
        "network": {"latency_ms": latency_ms, "jitter_ms": jitter_ms, "duplicate": duplicate},
        "bots": [
            {
                "name": f"bot{i}",
                "join_at": i * 5,
                "script": [{"at": 0, "do": "random_ops", "count": ops_per_client, "spacing_ms": spacing_ms}],
            }
            for i in range(clients)
        ],
    }


class _Bot:
    def __init__(self, sim: Simulation, spec: dict, rng: random.Random):
        self.sim = sim
        self.name = spec["name"]
        self.join_at = int(spec.get("join_at", 0))
        self.script = list(spec.get("script", []))
        self.rng = rng
        self.actor: str | None = None
        self.replica: Replica | None = None
        self.board: str | None = None
        self.cseq = 0
        self.my_classes: list[str] = []
        self.ops_issued = 0
        self.local_rejections = 0
        self.script_finished_at = 0
        self.last_own_applied_at = 0
        self.presence_log: list[tuple[int, str, int]] = []
        self.peer_presence: dict[str, PresenceState] = {}

    # -- inbound ----------------------------------------------------------

    def receive(self, msg: dict) -> None:
        kind = msg.get("t")
        if kind == "welcome":
            self._on_welcome(msg)
        elif kind == "op":
            self._on_op(msg)
        elif kind == "presence":
            actor = msg["actor"]
            state = PresenceState.from_wire(msg)
            known = self.peer_presence.get(actor)
            if known is None or state.updated_at >= known.updated_at:
                self.peer_presence[actor] = state
            self.presence_log.append((self.sim.now, actor, state.updated_at))

    def _on_welcome(self, msg: dict) -> None:
        if self.replica is not None:
            return  # duplicated welcome
        self.actor = msg["actor"]
        self.replica = Replica(
            document=ModelDocument.from_dict(msg["model"], self.sim.session.session_id),
            on_applied=self._on_applied,
        )
        self.board = next(iter(self.replica.document.whiteboards))
        base = self.sim.now
        for action in self.script:
            if action["do"] == "random_ops":
                spacing = int(action.get("spacing_ms", 20))
                for k in range(int(action["count"])):
                    self.sim.schedule(base + int(action.get("at", 0)) + k * spacing, self._run_random_op)
                self.script_finished_at = max(
                    self.script_finished_at, base + int(action.get("at", 0)) + (int(action["count"]) - 1) * spacing
                )
            elif action["do"] == "presence_stream":
                interval = int(action.get("interval_ms", 20))
                for k in range(int(action["count"])):
                    at = base + int(action.get("at", 0)) + k * interval
                    self.sim.schedule(at, lambda a=action: self._send_presence(a))
                self.script_finished_at = max(
                    self.script_finished_at, base + int(action.get("at", 0)) + (int(action["count"]) - 1) * interval
                )
            else:
                at = base + int(action.get("at", 0))
                self.sim.schedule(at, lambda a=action: self._run_action(a))
                self.script_finished_at = max(self.script_finished_at, at)

    def _on_op(self, msg: dict) -> None:
        if self.replica is None:
            return
        self.replica.apply(Operation.from_wire(msg))

    def _on_applied(self, op: Operation, result, error) -> None:
        if op.actor != self.actor:
            return
        self.last_own_applied_at = self.sim.now
        if error is None and op.body.get("op") == "create_class":
            self.my_classes.append(result)

    # -- outbound ----------------------------------------------------------

    def _submit(self, body: dict) -> None:
        self.cseq += 1
        self.ops_issued += 1
        self.sim.client_send(
            self,
            {
                "t": "op",
                "actor": self.actor,
                "cseq": self.cseq,
                "body": body,
                "ts": self.sim.now,
            },
        )

    def _send_presence(self, action: dict) -> None:
        cursor = action.get("cursor", [0.0, 0.0])
        state = PresenceState(
            actor=self.actor,
            board=action.get("board", self.board),
            cursor=(float(cursor[0]) + self.rng.uniform(0, 1), float(cursor[1])),
            activity=action.get("activity", "looking"),
            updated_at=self.sim.now,
        )
        self.sim.client_send(self, state.to_wire())

    # -- script interpretation ---------------------------------------------

    def _resolve(self, token: str) -> str | None:
        doc = self.replica.document
        if token == "$last":
            return self.my_classes[-1] if self.my_classes else None
        if token.startswith("$"):
            index = int(token[1:]) - 1
            return self.my_classes[index] if 0 <= index < len(self.my_classes) else None
        if token in doc.elements:
            return token
        for element in doc.elements.values():
            if element.name == token:
                return element.id
        return None

    def _resolve_or_reject(self, token: str) -> str | None:
        found = self._resolve(token)
        if found is None:
            self.local_rejections += 1
        return found

    def _resolve_board(self, token: str | None) -> str | None:
        if token is None:
            return self.board
        doc = self.replica.document
        if token in doc.whiteboards:
            return token
        for board in doc.whiteboards.values():
            if board.name == token:
                return board.id
        return None

    def _run_action(self, action: dict) -> None:
        verb = action["do"]
        if verb == "idle":
            return
        if verb == "create_board":
            self._submit({"op": "create_whiteboard", "name": action.get("name", "Board")})
            return
        if verb == "board_switch":
            board = self._resolve_board(action.get("board"))
            if board is None:
                self.local_rejections += 1
                return
            self.board = board
            self._send_presence({"board": board, "activity": "looking"})
            return
        if verb == "stroke_rect":
            self._stroke_rect(action)
            return
        if verb == "stroke_line":
            self._stroke_line(action)
            return
        if verb == "informal":
            points = [[float(x), float(y)] for x, y in action["points"]]
            self._submit(
                {"op": "add_stroke", "board": self.board, "points": points, "t_start": self.sim.now, "t_end": self.sim.now}
            )
            return
        if verb in ("set_name", "set_stereotype", "add_attribute", "add_method", "move"):
            target = self._resolve_or_reject(action["target"])
            if target is None:
                return
            self._submit({"op": "edit_class", "id": target, "change": self._change_for(verb, action)})
            return
        if verb == "relationship":
            source = self._resolve_or_reject(action["source"])
            target = self._resolve_or_reject(action["target"])
            if source is None or target is None:
                return
            self._submit(
                {
                    "op": "create_relationship",
                    "kind": action.get("kind", "association"),
                    "source": source,
                    "target": target,
                    "source_card": action.get("source_card", ""),
                    "target_card": action.get("target_card", ""),
                    "label": action.get("label", ""),
                    "waypoints": None,
                }
            )
            return
        if verb == "delete":
            target = self._resolve_or_reject(action["target"])
            if target is not None:
                self._submit({"op": "delete_element", "id": target})
            return
        if verb in ("deep_copy", "shallow_copy"):
            cluster = [self._resolve(t) for t in action["targets"]]
            cluster = [c for c in cluster if c is not None]
            if not cluster:
                self.local_rejections += 1
                return
            board = self._resolve_board(action.get("board")) or self.board
            offset = action.get("offset", [40, 40])
            self._submit(
                {"op": verb, "cluster": cluster, "board": board, "offset": [float(offset[0]), float(offset[1])]}
            )
            return
        if verb == "package":
            members = [self._resolve(t) for t in action["members"]]
            members = [m for m in members if m is not None]
            self._submit({"op": "create_package", "name": action.get("name", ""), "members": members})
            return
        if verb == "record_edit":
            target = self._resolve_or_reject(action["target"])
            if target is not None:
                self._submit({"op": "record_edit", "id": target})
            return
        if verb == "presence":
            self._send_presence(action)
            return
        raise ScriptError(f"unknown action {verb!r}")

    def _change_for(self, verb: str, action: dict) -> dict:
        if verb == "set_name":
            return {"kind": "set_name", "name": action["name"]}
        if verb == "set_stereotype":
            return {"kind": "set_stereotype", "stereotype": action.get("stereotype")}
        if verb == "add_attribute":
            return {
                "kind": "add_attribute",
                "visibility": action.get("visibility", "+"),
                "name": action["name"],
                "type_text": action.get("type", ""),
            }
        if verb == "add_method":
            return {
                "kind": "add_method",
                "visibility": action.get("visibility", "+"),
                "name": action["name"],
                "params": [list(p) for p in action.get("params", [])],
                "return_text": action.get("return", ""),
            }
        return {"kind": "move_bounds", "bounds": [float(v) for v in action["bounds"]]}

    def _stroke_rect(self, action: dict) -> None:
        x, y, w, h = (float(v) for v in action["rect"])
        corners = [(x, y), (x + w, y), (x + w, y + h), (x, y + h), (x, y)]
        points: list[list[float]] = []
        for (ax, ay), (bx, by) in zip(corners, corners[1:]):
            for s in range(6):
                t = s / 6
                points.append([ax + t * (bx - ax), ay + t * (by - ay)])
        points.append([x, y])
        self._submit_stroke(points, action)

    def _stroke_line(self, action: dict) -> None:
        source = self._resolve_or_reject(action["from"])
        target = self._resolve_or_reject(action["to"])
        if source is None or target is None:
            return
        doc = self.replica.document
        a = doc.elements[source].bounds
        b = doc.elements[target].bounds
        ax, ay = a.x + a.w / 2, a.y + a.h / 2
        bx, by = b.x + b.w / 2, b.y + b.h / 2
        points = [[ax + s / 12 * (bx - ax), ay + s / 12 * (by - ay)] for s in range(13)]
        self._submit_stroke(points, action)

    def _submit_stroke(self, points: list[list[float]], action: dict) -> None:
        board = self._resolve_board(action.get("board")) or self.board
        config = RecognizerConfig()
        resampled = resample_stroke(points, config)
        view = [(e.id, e.bounds) for e in self.replica.document.classes_on_board(board)]
        result = classify_stroke(resampled, view, config)
        stroke = Stroke("pending", board, points, self.actor, self.sim.now, self.sim.now)
        self._submit(materialize(result, stroke, self.actor, self.sim.now).body)

    # -- random op load ------------------------------------------------------

    def _run_random_op(self) -> None:
        rng = self.rng
        doc = self.replica.document
        classes = list(doc.elements)
        roll = rng.random()
        if roll < 0.30 or not classes:
            bounds = [
                round(rng.uniform(0, 900), 1),
                round(rng.uniform(0, 650), 1),
                round(rng.uniform(12, 120), 1),
                round(rng.uniform(12, 120), 1),
            ]
            self._submit({"op": "create_class", "board": self.board, "bounds": bounds})
        elif roll < 0.55:
            target = rng.choice(classes)
            change_roll = rng.random()
            if change_roll < 0.4:
                change = {"kind": "set_name", "name": f"C{rng.randint(0, 999)}"}
            elif change_roll < 0.7:
                change = {
                    "kind": "add_attribute",
                    "visibility": rng.choice(["+", "-", "#", "~"]),
                    "name": f"f{rng.randint(0, 99)}",
                    "type_text": rng.choice(["int", "String", "bool"]),
                }
            else:
                change = {
                    "kind": "move_bounds",
                    "bounds": [
                        round(rng.uniform(0, 900), 1),
                        round(rng.uniform(0, 650), 1),
                        round(rng.uniform(20, 120), 1),
                        round(rng.uniform(20, 120), 1),
                    ],
                }
            self._submit({"op": "edit_class", "id": target, "change": change})
        elif roll < 0.70 and len(classes) >= 2:
            kind = rng.choice(["association", "inheritance", "aggregation", "composition", "dependency"])
            cards = ("", "") if kind == "inheritance" else (rng.choice(["", "1", "0..*"]), rng.choice(["", "1", "*"]))
            self._submit(
                {
                    "op": "create_relationship",
                    "kind": kind,
                    "source": rng.choice(classes),
                    "target": rng.choice(classes),
                    "source_card": cards[0],
                    "target_card": cards[1],
                    "label": "",
                    "waypoints": None,
                }
            )
        elif roll < 0.78:
            self._submit({"op": "delete_element", "id": rng.choice(classes)})
        elif roll < 0.86:
            cluster = rng.sample(classes, k=min(len(classes), rng.randint(1, 3)))
            verb = "deep_copy" if rng.random() < 0.5 else "shallow_copy"
            self._submit(
                {"op": verb, "cluster": cluster, "board": self.board, "offset": [rng.randint(-50, 50), rng.randint(-50, 50)]}
            )
        elif roll < 0.93:
            x0 = round(rng.uniform(0, 900), 1)
            y0 = round(rng.uniform(0, 700), 1)
            points = [[x0 + 4 * k, min(749.0, y0 + rng.uniform(-3, 3))] for k in range(10)]
            self._submit(
                {"op": "add_stroke", "board": self.board, "points": points, "t_start": self.sim.now, "t_end": self.sim.now}
            )
        else:
            self._submit({"op": "record_edit", "id": rng.choice(classes)})


class Simulation:
    def __init__(self, scenario: dict, palette=None):
        validate_scenario(scenario)
        self.scenario = scenario
        self.seed = int(scenario.get("seed", 0))
        self.network = NetworkModel.from_dict(scenario.get("network"))
        self.session = Session(scenario.get("session", "sim"), palette=palette)
        self.net_rng = random.Random(self.seed * 7919 + 1)
        self.now = 0
        self._queue: list[tuple[int, int, object]] = []
        self._tiebreak = 0
        self.bots = [
            _Bot(self, spec, random.Random(self.seed * 1000 + i))
            for i, spec in enumerate(scenario.get("bots", []))
        ]
        self._actor_to_bot: dict[str, _Bot] = {}
        self._joined: dict[str, str] = {}
        self.messages_delivered = 0
        names = [b.name for b in self.bots]
        if len(set(names)) != len(names):
            raise ScriptError("bot names must be unique")

    # -- scheduling -----------------------------------------------------------

    def schedule(self, at: int, fn) -> None:
        self._tiebreak += 1
        heapq.heappush(self._queue, (max(at, self.now), self._tiebreak, fn))

    # -- message movement ------------------------------------------------------

    def client_send(self, bot: _Bot, msg: dict) -> None:
        presence = msg.get("t") == "presence"
        for delay in self.network.delays(self.net_rng, presence):
            self.schedule(self.now + delay, lambda m=dict(msg): self._server_receive(bot, m))

    def _server_send(self, actor: str, msg: dict) -> None:
        presence = msg.get("t") == "presence"
        for delay in self.network.delays(self.net_rng, presence):
            self.schedule(self.now + delay, lambda a=actor, m=msg: self._client_receive(a, m))

    def _client_receive(self, actor: str, msg: dict) -> None:
        bot = self._actor_to_bot.get(actor)
        if bot is not None:
            self.messages_delivered += 1
            bot.receive(msg)

    def _server_receive(self, bot: _Bot, msg: dict) -> None:
        kind = msg.get("t")
        if kind == "hello":
            # A duplicated hello rejoins with the token instead of minting
            # a second actor for the same client.
            token = self._joined.get(bot.name)
            result = self.session.join(msg["name"], token=token)
            self._joined[bot.name] = result.actor
            welcome = result.welcome(self.session.epoch, self.session.peers_of(result.actor))
            self._actor_to_bot[result.actor] = bot
            self._deliver_effects(result.effects)
            self._server_send(result.actor, welcome)
        elif kind == "op":
            _, effects = self.session.submit(msg["actor"], msg["cseq"], msg["body"], msg["ts"])
            self._deliver_effects(effects)
        elif kind == "presence":
            effects, due = self.session.presence_update(PresenceState.from_wire(msg))
            self._deliver_effects(effects)
            if due is not None:
                self.schedule(due, lambda: self._flush_presence())

    def _flush_presence(self) -> None:
        effects, due = self.session.flush_presence(self.now)
        self._deliver_effects(effects)
        if due is not None:
            self.schedule(due, lambda: self._flush_presence())

    def _deliver_effects(self, effects) -> None:
        for actor, msg in effects:
            self._server_send(actor, msg)

    # -- run -----------------------------------------------------------------

    def run(self) -> dict:
        for bot in self.bots:
            self.schedule(bot.join_at, lambda b=bot: self.client_send(b, {
                "t": "hello", "session": self.session.session_id, "name": b.name, "proto": 1,
            }))
        while self._queue:
            at, _, fn = heapq.heappop(self._queue)
            self.now = at
            fn()
        return self._report()

    def _report(self) -> dict:
        server_digest = self.session.digest()
        digests = {"server": server_digest}
        noops = list(self.session.replica.noops)
        seq_to_actor = {op.seq: op.actor for op in self.session.sequencer.log}
        noop_counts: dict[str, int] = {}
        for seq, _ in noops:
            actor = seq_to_actor.get(seq)
            if actor is not None:
                noop_counts[actor] = noop_counts.get(actor, 0) + 1
        bots_report = []
        converged = True
        for bot in self.bots:
            if bot.replica is None:
                converged = False
                continue
            digest = bot.replica.digest()
            digests[bot.actor] = digest
            if digest != server_digest or bot.replica.noops != noops:
                converged = False
            bots_report.append(
                {
                    "name": bot.name,
                    "actor": bot.actor,
                    "completion_ms": max(bot.script_finished_at, bot.last_own_applied_at),
                    "syntactic_errors": bot.local_rejections + noop_counts.get(bot.actor, 0),
                    "ops_issued": bot.ops_issued,
                    "ops_applied": bot.replica.applied_seq,
                }
            )
        return {
            "scenario": self.scenario.get("name", "unnamed"),
            "seed": self.seed,
            "clients": len(self.bots),
            "network": self.network.to_dict(),
            "bots": bots_report,
            "convergence": {
                "converged": converged,
                "time_to_quiescence_ms": self.now,
                "digests": digests,
            },
            "noops": [[seq, code] for seq, code in noops],
            "ops_sequenced": self.session.sequencer.last_seq,
            "messages_delivered": self.messages_delivered,
        }


def run_scenario(scenario: dict, palette=None) -> dict:
    """Execute a scenario and return its report (dict, canonically dumpable)."""
    return Simulation(scenario, palette=palette).run()


def report_json(report: dict) -> str:
    return canonical.canonical_json(report)
