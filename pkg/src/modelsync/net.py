"""Socket front for sessions.

One listening port speaks both transports: a client whose first byte is
``{`` gets newline-delimited JSON; a client that starts with an HTTP GET is
upgraded to a WebSocket and exchanges the identical JSON payloads as text
frames. The WebSocket layer is a minimal RFC 6455 server (text frames,
fragmentation, ping/pong, close) so both protocols can share the port.
"""

from __future__ import annotations

import asyncio
import base64
import hashlib
import json
import logging
import time
from pathlib import Path

from .errors import ModelSyncError
from .session import PresenceState, Session

log = logging.getLogger("modelsync.net")

WS_GUID = "258EAFA5-E914-47DA-95CA-C5AB0DC85B11"
MAX_MESSAGE_BYTES = 16 * 1024 * 1024

OP_CONT, OP_TEXT, OP_BINARY, OP_CLOSE, OP_PING, OP_PONG = 0x0, 0x1, 0x2, 0x8, 0x9, 0xA


def websocket_accept(key: str) -> str:
    digest = hashlib.sha1((key + WS_GUID).encode("ascii")).digest()
    return base64.b64encode(digest).decode("ascii")


def encode_frame(opcode: int, payload: bytes, mask: bool = False) -> bytes:
    header = bytearray([0x80 | opcode])
    length = len(payload)
    mask_bit = 0x80 if mask else 0
    if length < 126:
        header.append(mask_bit | length)
    elif length < 1 << 16:
        header.append(mask_bit | 126)
        header += length.to_bytes(2, "big")
    else:
        header.append(mask_bit | 127)
        header += length.to_bytes(8, "big")
    if mask:
        key = b"\x37\xfa\x21\x3d"  # fixed key is fine for a test client
        header += key
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return bytes(header) + payload


async def read_frame(reader: asyncio.StreamReader) -> tuple[bool, int, bytes]:
    head = await reader.readexactly(2)
    fin = bool(head[0] & 0x80)
    opcode = head[0] & 0x0F
    masked = bool(head[1] & 0x80)
    length = head[1] & 0x7F
    if length == 126:
        length = int.from_bytes(await reader.readexactly(2), "big")
    elif length == 127:
        length = int.from_bytes(await reader.readexactly(8), "big")
    if length > MAX_MESSAGE_BYTES:
        raise ConnectionError("frame too large")
    key = await reader.readexactly(4) if masked else None
    payload = await reader.readexactly(length) if length else b""
    if key:
        payload = bytes(b ^ key[i % 4] for i, b in enumerate(payload))
    return fin, opcode, payload


async def read_message(reader: asyncio.StreamReader) -> tuple[int, bytes]:
    """Next data or control message; data fragments are reassembled."""
    opcode = None
    buffer = b""
    while True:
        fin, frame_op, payload = await read_frame(reader)
        if frame_op in (OP_CLOSE, OP_PING, OP_PONG):
            return frame_op, payload
        if frame_op != OP_CONT:
            opcode = frame_op
            buffer = payload
        else:
            buffer += payload
        if len(buffer) > MAX_MESSAGE_BYTES:
            raise ConnectionError("message too large")
        if fin:
            if opcode is None:
                raise ConnectionError("continuation without start frame")
            return opcode, buffer


def _encode_msg(msg: dict) -> str:
    return json.dumps(msg, separators=(",", ":"))


class _Connection:
    """One client link; knows how to push a JSON message."""

    def __init__(self, writer: asyncio.StreamWriter):
        self.writer = writer
        self.session_id: str | None = None
        self.actor: str | None = None

    def send(self, msg: dict) -> None:
        raise NotImplementedError

    def close(self) -> None:
        try:
            self.writer.close()
        except Exception:
            pass


class _LineConnection(_Connection):
    def send(self, msg: dict) -> None:
        self.writer.write(_encode_msg(msg).encode("utf-8") + b"\n")


class _WebSocketConnection(_Connection):
    def send(self, msg: dict) -> None:
        self.writer.write(encode_frame(OP_TEXT, _encode_msg(msg).encode("utf-8")))


class CollabServer:
    """Hosts any number of independent sessions on one port."""

    def __init__(self, host: str = "127.0.0.1", port: int = 7350, persist_dir=None, palette=None):
        self.host = host
        self.port = port
        self.persist_dir = Path(persist_dir) if persist_dir else None
        self.palette = palette
        self.sessions: dict[str, Session] = {}
        self._epochs: dict[str, float] = {}
        self._conns: dict[str, dict[str, _Connection]] = {}
        self._server: asyncio.base_events.Server | None = None

    # -- lifecycle ----------------------------------------------------------

    async def start(self) -> None:
        self._server = await asyncio.start_server(self._handle_client, self.host, self.port)
        self.port = self._server.sockets[0].getsockname()[1]
        log.info("listening on %s:%s", self.host, self.port)

    async def stop(self) -> None:
        if self._server is not None:
            self._server.close()
            await self._server.wait_closed()
        self.persist_all()
        for conns in self._conns.values():
            for conn in conns.values():
                conn.close()

    def persist_all(self) -> None:
        if self.persist_dir is None:
            return
        for session in self.sessions.values():
            session.persist(self.persist_dir)

    # -- sessions -----------------------------------------------------------

    def _get_session(self, session_id: str) -> Session:
        session = self.sessions.get(session_id)
        if session is None:
            if self.persist_dir and (self.persist_dir / f"{session_id}.model.json").exists():
                session = Session.load(self.persist_dir, session_id, palette=self.palette)
            else:
                session = Session(session_id, palette=self.palette)
            self.sessions[session_id] = session
            self._epochs[session_id] = time.time() * 1000.0
            self._conns.setdefault(session_id, {})
        return session

    def _session_now(self, session_id: str) -> int:
        return int(time.time() * 1000.0 - self._epochs.get(session_id, 0.0))

    def _route(self, session_id: str, effects) -> None:
        conns = self._conns.get(session_id, {})
        for actor, msg in effects:
            conn = conns.get(actor)
            if conn is not None:
                try:
                    conn.send(msg)
                except Exception:
                    log.warning("send to %s failed", actor, exc_info=True)

    # -- connection handling ----------------------------------------------------

    async def _handle_client(self, reader: asyncio.StreamReader, writer: asyncio.StreamWriter) -> None:
        conn: _Connection | None = None
        try:
            first = await reader.read(1)
            if not first:
                writer.close()
                return
            if first == b"{":
                conn = _LineConnection(writer)
                await self._line_loop(conn, reader, first)
            else:
                conn = _WebSocketConnection(writer)
                if await self._ws_handshake(reader, writer, first):
                    await self._ws_loop(conn, reader)
        except (asyncio.IncompleteReadError, ConnectionError, OSError):
            pass
        finally:
            if conn is not None:
                self._disconnect(conn)
            try:
                writer.close()
            except Exception:
                pass

    async def _line_loop(self, conn: _Connection, reader: asyncio.StreamReader, first: bytes) -> None:
        line = first + await reader.readline()
        while line:
            await self._dispatch_raw(conn, line)
            line = await reader.readline()

    async def _ws_handshake(self, reader, writer, first: bytes) -> bool:
        request = first + await reader.readuntil(b"\r\n\r\n")
        headers = {}
        for raw in request.split(b"\r\n")[1:]:
            if b":" in raw:
                name, _, value = raw.partition(b":")
                headers[name.strip().lower()] = value.strip()
        key = headers.get(b"sec-websocket-key")
        if key is None or b"websocket" not in headers.get(b"upgrade", b"").lower():
            writer.write(b"HTTP/1.1 400 Bad Request\r\nContent-Length: 0\r\n\r\n")
            return False
        accept = websocket_accept(key.decode("ascii"))
        writer.write(
            b"HTTP/1.1 101 Switching Protocols\r\n"
            b"Upgrade: websocket\r\n"
            b"Connection: Upgrade\r\n"
            b"Sec-WebSocket-Accept: " + accept.encode("ascii") + b"\r\n\r\n"
        )
        await writer.drain()
        return True

    async def _ws_loop(self, conn: _Connection, reader: asyncio.StreamReader) -> None:
        while True:
            opcode, payload = await read_message(reader)
            if opcode == OP_CLOSE:
                conn.writer.write(encode_frame(OP_CLOSE, payload[:2]))
                return
            if opcode == OP_PING:
                conn.writer.write(encode_frame(OP_PONG, payload))
                continue
            if opcode == OP_PONG:
                continue
            await self._dispatch_raw(conn, payload)

    def _disconnect(self, conn: _Connection) -> None:
        if conn.session_id is None or conn.actor is None:
            return
        conns = self._conns.get(conn.session_id, {})
        if conns.get(conn.actor) is conn:
            del conns[conn.actor]
            session = self.sessions[conn.session_id]
            self._route(conn.session_id, session.leave(conn.actor))

    # -- message dispatch -----------------------------------------------------

    async def _dispatch_raw(self, conn: _Connection, raw: bytes) -> None:
        text = raw.strip()
        if not text:
            return
        try:
            msg = json.loads(text)
        except json.JSONDecodeError:
            conn.send({"t": "err", "code": "bad_json", "msg": "unparseable message"})
            return
        try:
            self._dispatch(conn, msg)
        except ModelSyncError as err:
            conn.send({"t": "err", "code": err.code, "msg": str(err)})
        await conn.writer.drain()

    def _dispatch(self, conn: _Connection, msg: dict) -> None:
        kind = msg.get("t")
        if kind == "hello":
            self._on_hello(conn, msg)
            return
        if conn.session_id is None or conn.actor is None:
            conn.send({"t": "err", "code": "not_joined", "msg": "hello first"})
            return
        session = self.sessions[conn.session_id]
        if kind == "op":
            _, effects = session.submit(conn.actor, int(msg["cseq"]), msg["body"], int(msg.get("ts", 0)))
            self._route(conn.session_id, effects)
        elif kind == "presence":
            state = PresenceState.from_wire({**msg, "actor": conn.actor})
            effects, due = session.presence_update(state)
            self._route(conn.session_id, effects)
            if due is not None:
                delay = max(0.0, (due - self._session_now(conn.session_id)) / 1000.0)
                loop = asyncio.get_running_loop()
                loop.call_later(delay, self._flush_presence, conn.session_id)
        elif kind == "digest":
            conn.send({"t": "digest", "seq": session.replica.applied_seq, "sha256": session.digest()})
        elif kind == "bye":
            self._route(conn.session_id, session.leave(conn.actor))
            conn.session_id = None
            conn.actor = None
        else:
            conn.send({"t": "err", "code": "unknown_message", "msg": f"unknown type {kind!r}"})

    def _on_hello(self, conn: _Connection, msg: dict) -> None:
        if int(msg.get("proto", 1)) != 1:
            conn.send({"t": "err", "code": "proto_mismatch", "msg": "protocol version 1 required"})
            return
        session_id = str(msg.get("session", "default"))
        session = self._get_session(session_id)
        result = session.join(str(msg.get("name", "")), token=msg.get("actor"))
        conn.session_id = session_id
        conn.actor = result.actor
        old = self._conns[session_id].get(result.actor)
        if old is not None and old is not conn:
            old.close()
        self._conns[session_id][result.actor] = conn
        conn.send(result.welcome(int(self._epochs[session_id]), session.peers_of(result.actor)))
        self._route(session_id, result.effects)

    def _flush_presence(self, session_id: str) -> None:
        session = self.sessions.get(session_id)
        if session is None:
            return
        effects, due = session.flush_presence(self._session_now(session_id))
        self._route(session_id, effects)
        if due is not None:
            delay = max(0.0, (due - self._session_now(session_id)) / 1000.0)
            asyncio.get_running_loop().call_later(delay, self._flush_presence, session_id)


async def serve(host: str, port: int, persist_dir=None, palette=None) -> None:
    """Run a server until cancelled; persists sessions on the way out."""
    server = CollabServer(host, port, persist_dir=persist_dir, palette=palette)
    await server.start()
    print(f"modelsync serving on {server.host}:{server.port}", flush=True)
    try:
        await asyncio.Event().wait()
    except asyncio.CancelledError:
        pass
    finally:
        await server.stop()
