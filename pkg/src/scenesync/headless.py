"""Protocol-conformant client with no rendering.

Maintains a state mirror by applying decoded batches through the same scene
graph and GUI state machines the server runs, emits interaction frames, and
can simulate link latency. Its canonical text snapshot is the equivalence
oracle used throughout the test suite.
"""

from __future__ import annotations

import asyncio
import hashlib
import json
import logging
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import aiohttp

from .buffering import CameraState, default_camera
from .errors import (
    HandshakeRejectedError,
    ProtocolError,
    UnknownPathError,
    UnknownUidError,
)
from .guicore import GUI_VALUE_TYPES, GuiElement, GuiRegistry, validate_value
from .messages import Message, decode_batch, encode_batch
from .protocol import REGISTRY, SCHEMA_HASH, gui_client_update_type
from .scenegraph import Pose, SceneGraph, parse_path

log = logging.getLogger(__name__)

_UPSERT_PREFIX = "scene_upsert_"
_GUI_ADD_PREFIX = "gui_add_"
_COMMON_NODE_FIELDS = ("path", "wxyz", "position", "visible", "clickable")


@dataclass
class ClientMirror:
    """Local copy of server state; a pure function of the applied messages."""

    scene: SceneGraph = field(default_factory=SceneGraph)
    gui: GuiRegistry = field(default_factory=GuiRegistry)
    camera: CameraState = field(default_factory=default_camera)
    last_seq: int = 0


def apply_message(mirror: ClientMirror, msg: Message) -> None:
    """Apply one server message to the mirror, using the same semantics as
    the server-side state machines. Removals of already-dead state warn and
    continue; anything structurally wrong raises ProtocolError."""
    t = msg.type
    p = msg.payload
    if t.startswith(_UPSERT_PREFIX):
        kind = t[len(_UPSERT_PREFIX):]
        props = {k: v for k, v in p.items() if k not in _COMMON_NODE_FIELDS}
        mirror.scene.upsert(
            p["path"], kind, props,
            Pose.make(p["wxyz"], p["position"]),
            p["visible"], p["clickable"],
        )
        return
    if t == "scene_set_pose":
        _warn_unknown_path(lambda: mirror.scene.set_pose(p["path"], Pose.make(p["wxyz"], p["position"])))
        return
    if t == "scene_set_visible":
        _warn_unknown_path(lambda: mirror.scene.set_visible(p["path"], p["visible"]))
        return
    if t == "scene_set_clickable":
        _warn_unknown_path(lambda: mirror.scene.set_clickable(p["path"], p["clickable"]))
        return
    if t.startswith("scene_set_") and t.endswith("_prop"):
        _warn_unknown_path(lambda: mirror.scene.set_prop(p["path"], p["name"], p["value"]))
        return
    if t == "scene_remove":
        try:
            mirror.scene.remove(p["path"])
        except UnknownPathError:
            log.warning("remove for unknown path %s (already gone)", p["path"])
        return
    if t.startswith(_GUI_ADD_PREFIX):
        kind = t[len(_GUI_ADD_PREFIX):]
        props = {
            k: v for k, v in p.items()
            if k not in ("uid", "container_uid", "order", "value")
        }
        element = GuiElement(
            uid=p["uid"], kind=kind, container_uid=p["container_uid"],
            order=p["order"], props=props, value=None,
        )
        if kind in GUI_VALUE_TYPES:
            element.value = validate_value(element, p["value"], mode="trust")
        mirror.gui.insert(element)
        return
    if t.startswith("gui_set_") and t.endswith("_prop"):
        try:
            mirror.gui.set_prop_trusted(p["uid"], p["name"], p["value"])
        except UnknownUidError:
            log.warning("prop update for unknown gui uid %d", p["uid"])
        return
    if t.startswith("gui_set_") and t.endswith("_value"):
        try:
            mirror.gui.set_value_trusted(p["uid"], p["value"])
        except UnknownUidError:
            log.warning("value update for unknown gui uid %d", p["uid"])
        return
    if t == "gui_remove":
        try:
            mirror.gui.remove(p["uid"])
        except UnknownUidError:
            log.warning("remove for unknown gui uid %d (already gone)", p["uid"])
        return
    if t == "camera_set":
        mirror.camera = CameraState(
            pose=Pose.make(p["wxyz"], p["position"]),
            fov=p["fov"], aspect=p["aspect"], look_at=tuple(p["look_at"]),
        )
        return
    raise ProtocolError(f"client cannot apply server message of type {t!r}")


def apply_batch(mirror: ClientMirror, seq: int, messages: list[Message]) -> None:
    """Apply one decoded batch; batch seqs must be strictly increasing."""
    if seq <= mirror.last_seq:
        raise ProtocolError(f"batch seq {seq} not greater than last seq {mirror.last_seq}")
    for msg in messages:
        apply_message(mirror, msg)
    mirror.last_seq = seq


# ---------------------------------------------------------------------------
# Canonical state rendering


def _fmt(value: Any) -> str:
    if value is None:
        return "null"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return format(value, ".9g")
    if isinstance(value, str):
        return json.dumps(value, ensure_ascii=True)
    if isinstance(value, (bytes, bytearray)):
        digest = hashlib.sha256(bytes(value)).hexdigest()[:16]
        return f"bytes{len(value)}:{digest}"
    if isinstance(value, (tuple, list)):
        return "(" + ",".join(_fmt(v) for v in value) + ")"
    raise TypeError(f"cannot render {type(value).__name__} canonically")


def canonical_state(mirror: ClientMirror) -> str:
    """Deterministic text rendering: nodes sorted by path, GUI elements by
    uid, floats at 9 significant digits. Equal states render byte-identically."""
    lines = ["scene:"]
    for path in sorted(mirror.scene.nodes):
        node = mirror.scene.nodes[path]
        parts = [
            f"  {path}",
            f"kind={node.kind}",
            f"visible={_fmt(node.visible)}",
            f"clickable={_fmt(node.clickable)}",
            f"wxyz={_fmt(node.local_pose.wxyz)}",
            f"position={_fmt(node.local_pose.position)}",
        ]
        parts += [f"{k}={_fmt(node.props[k])}" for k in sorted(node.props)]
        lines.append(" ".join(parts))
    lines.append("gui:")
    for uid in sorted(mirror.gui.elements):
        el = mirror.gui.elements[uid]
        parts = [
            f"  {uid}",
            f"kind={el.kind}",
            f"container={el.container_uid}",
            f"order={el.order}",
            f"value={_fmt(el.value)}",
        ]
        parts += [f"{k}={_fmt(el.props[k])}" for k in sorted(el.props)]
        lines.append(" ".join(parts))
    cam = mirror.camera
    lines.append(
        "camera: "
        f"wxyz={_fmt(cam.pose.wxyz)} position={_fmt(cam.pose.position)} "
        f"fov={_fmt(cam.fov)} aspect={_fmt(cam.aspect)} look_at={_fmt(cam.look_at)}"
    )
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Live session


class HeadlessSession:
    """A connected headless client, driving its own event-loop thread so
    tests and scripts can use it synchronously.

    With `rtt_ms` set, each inbound batch is applied after rtt/2 and its ack
    leaves another rtt/2 later, approximating a symmetric slow link.
    """

    def __init__(self, url: str, rtt_ms: float = 0.0, schema_hash: Optional[str] = None):
        self.url = url
        self.rtt = rtt_ms / 1000.0
        self.schema_hash = schema_hash if schema_hash is not None else SCHEMA_HASH
        self.mirror = ClientMirror()
        self.mirror_lock = threading.RLock()
        self.client_id: Optional[int] = None
        self.error: Optional[Exception] = None
        self.batches_applied = 0
        self.messages_applied = 0
        self._last_apply = time.monotonic()
        self._closed = threading.Event()
        self._loop = asyncio.new_event_loop()
        self._thread = threading.Thread(target=self._run_loop, name="scenesync-headless", daemon=True)
        self._session: Optional[aiohttp.ClientSession] = None
        self._ws: Optional[aiohttp.ClientWebSocketResponse] = None
        self._send_queue: Optional[asyncio.Queue] = None
        self._reader_task: Optional[asyncio.Task] = None
        self._writer_task: Optional[asyncio.Task] = None

    # -- lifecycle

    def _run_loop(self) -> None:
        asyncio.set_event_loop(self._loop)
        self._loop.run_forever()

    def connect(self, timeout: float = 15.0) -> "HeadlessSession":
        self._thread.start()
        future = asyncio.run_coroutine_threadsafe(self._connect_async(), self._loop)
        try:
            future.result(timeout=timeout)
        except Exception:
            self.close()
            raise
        return self

    async def _connect_async(self) -> None:
        self._session = aiohttp.ClientSession()
        self._ws = await self._session.ws_connect(self.url, max_msg_size=0)
        hello = REGISTRY.make("client_hello", schema_hash=self.schema_hash)
        await self._ws.send_bytes(encode_batch(REGISTRY, [hello], seq=0))
        first = await self._ws.receive(timeout=10)
        if first.type != aiohttp.WSMsgType.BINARY:
            raise ProtocolError(f"expected a binary handshake reply, got {first.type}")
        _, messages = decode_batch(REGISTRY, first.data)
        if len(messages) != 1:
            raise ProtocolError("handshake reply must carry exactly one message")
        reply = messages[0]
        if reply.type == "handshake_reject":
            raise HandshakeRejectedError(
                reply.payload["reason"],
                server_hash=reply.payload["server_schema_hash"],
                client_hash=reply.payload["client_schema_hash"],
            )
        if reply.type != "handshake_accept":
            raise ProtocolError(f"unexpected handshake reply {reply.type!r}")
        self.client_id = reply.payload["client_id"]
        self._send_queue = asyncio.Queue()
        self._writer_task = self._loop.create_task(self._writer())
        self._reader_task = self._loop.create_task(self._reader())

    async def _reader(self) -> None:
        assert self._ws is not None
        try:
            async for msg in self._ws:
                if msg.type != aiohttp.WSMsgType.BINARY:
                    continue
                if self.rtt:
                    await asyncio.sleep(self.rtt / 2.0)
                seq, messages = decode_batch(REGISTRY, msg.data)
                with self.mirror_lock:
                    apply_batch(self.mirror, seq, messages)
                    self.batches_applied += 1
                    self.messages_applied += len(messages)
                    self._last_apply = time.monotonic()
                if self.rtt:
                    self._loop.create_task(self._delayed_ack(seq))
                else:
                    await self._enqueue_ack(seq)
        except Exception as exc:  # protocol/decode errors surface on .error
            self.error = exc
            log.warning("headless session error: %s", exc)
            await self._ws.close()
        finally:
            self._closed.set()

    async def _delayed_ack(self, seq: int) -> None:
        await asyncio.sleep(self.rtt / 2.0)
        await self._enqueue_ack(seq)

    async def _enqueue_ack(self, seq: int) -> None:
        ack = REGISTRY.make("ack", seq=seq)
        await self._send_queue.put(encode_batch(REGISTRY, [ack], seq=0))

    async def _writer(self) -> None:
        assert self._ws is not None and self._send_queue is not None
        while True:
            frame = await self._send_queue.get()
            if frame is None:
                return
            try:
                await self._ws.send_bytes(frame)
            except ConnectionError:
                return

    def close(self) -> None:
        if self._loop.is_closed():
            return

        async def _shutdown() -> None:
            for task in (self._reader_task, self._writer_task):
                if task is not None:
                    task.cancel()
            if self._ws is not None:
                await self._ws.close()
            if self._session is not None:
                await self._session.close()

        if self._loop.is_running():
            try:
                asyncio.run_coroutine_threadsafe(_shutdown(), self._loop).result(timeout=5)
            except Exception:
                pass
            self._loop.call_soon_threadsafe(self._loop.stop)
        if self._thread.is_alive():
            self._thread.join(timeout=5)
        if not self._loop.is_running():
            self._loop.close()

    def __enter__(self) -> "HeadlessSession":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    # -- outbound interaction

    def _send(self, name: str, **fields) -> None:
        frame = encode_batch(REGISTRY, [REGISTRY.make(name, **fields)], seq=0)
        if self._send_queue is None:
            raise ProtocolError("session is not connected")
        self._loop.call_soon_threadsafe(self._send_queue.put_nowait, frame)

    def set_gui_value(self, uid: int, value: Any) -> None:
        """Send a user edit for a non-button element."""
        with self.mirror_lock:
            element = self.mirror.gui.get(uid)
        self._send(gui_client_update_type(element.kind), uid=uid, value=value)

    def click_button(self, uid: int) -> None:
        self._send("gui_client_click", uid=uid)

    def click_node(
        self,
        path: str,
        ray_origin=(0.0, 0.0, 3.0),
        ray_direction=(0.0, 0.0, -1.0),
        screen_pos=(0.5, 0.5),
    ) -> None:
        self._send(
            "scene_click", path=path,
            ray_origin=tuple(float(v) for v in ray_origin),
            ray_direction=tuple(float(v) for v in ray_direction),
            screen_pos=tuple(float(v) for v in screen_pos),
        )

    def report_camera(self, state: CameraState) -> None:
        self._send(
            "camera_report",
            wxyz=state.pose.wxyz, position=state.pose.position,
            fov=state.fov, aspect=state.aspect, look_at=state.look_at,
        )

    # -- mirror access

    def canonical_state(self) -> str:
        with self.mirror_lock:
            return canonical_state(self.mirror)

    @property
    def last_seq(self) -> int:
        with self.mirror_lock:
            return self.mirror.last_seq

    def gui_value(self, uid: int) -> Any:
        with self.mirror_lock:
            return self.mirror.gui.get(uid).value

    def node(self, path: str):
        with self.mirror_lock:
            return self.mirror.scene.nodes.get(parse_path(path))

    def wait_for(self, predicate: Callable[[ClientMirror], bool], timeout: float = 5.0) -> bool:
        """Poll the mirror until `predicate(mirror)` holds."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self.mirror_lock:
                try:
                    if predicate(self.mirror):
                        return True
                except (UnknownPathError, UnknownUidError, KeyError):
                    pass
            time.sleep(0.002)
        return False

    def wait_quiet(self, quiet_ms: float = 200.0, timeout: float = 10.0) -> bool:
        """Wait until no batch has been applied for `quiet_ms`."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self.mirror_lock:
                last = self._last_apply
            if time.monotonic() - last >= quiet_ms / 1000.0:
                return True
            time.sleep(0.005)
        return False


def _warn_unknown_path(op: Callable[[], Any]) -> None:
    try:
        op()
    except UnknownPathError as exc:
        log.warning("%s", exc)


def connect(url: str, rtt_ms: float = 0.0, schema_hash: Optional[str] = None) -> HeadlessSession:
    """Connect a headless client and return the live session."""
    return HeadlessSession(url, rtt_ms=rtt_ms, schema_hash=schema_hash).connect()
