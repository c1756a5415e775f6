"""Server core: authoritative state, message emission, client records, and
callback dispatch.

`ServerCore` is the sequencer: every mutation from any thread funnels
through its lock, updates the authoritative scene/GUI state, and folds the
resulting message into the persistent buffer plus each connection's pending
buffer. Nothing here waits on the network; the websocket layer drains
pending buffers on its own clock. `ViewerServer` is the user-facing entry
point that adds the actual transport.
"""

from __future__ import annotations

import logging
import math
import queue
import threading
import time
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .buffering import CameraState, ConnectionState, PersistentBuffer, snapshot_for_new_client
from .errors import (
    IllTypedValueError,
    RejectedValueError,
    RemovedHandleError,
    StaleClientError,
    ValidationError,
)
from .guicore import GuiEvent, GuiRegistry
from .handles import ClientHandle, GuiApi, SceneApi
from .messages import Message
from .protocol import (
    REGISTRY,
    SCHEMA_HASH,
    gui_client_update_type,
    gui_prop_setter,
    gui_value_setter,
    scene_prop_setter,
)
from .scenegraph import Pose, SceneGraph, ScenePath, as_path

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class ClickEvent:
    """A click on a clickable scene node, as an unprojected ray."""

    path: str
    client_id: int
    ray_origin: tuple[float, float, float]
    ray_direction: tuple[float, float, float]
    screen_pos: tuple[float, float]


class Subscription:
    """Token for a registered callback; drop it with `unsubscribe()`."""

    def __init__(self, remove: Callable[[], None]):
        self._remove = remove

    def unsubscribe(self) -> None:
        self._remove()


class _Dispatcher:
    """Single worker thread running all user callbacks in receipt order.
    Callback exceptions are logged, never propagated."""

    def __init__(self):
        self._queue: "queue.Queue" = queue.Queue()
        self._pending = 0
        self._lock = threading.Lock()
        self._thread = threading.Thread(target=self._run, name="scenesync-dispatch", daemon=True)
        self._thread.start()

    def submit(self, fn: Callable, *args) -> None:
        with self._lock:
            self._pending += 1
        self._queue.put((fn, args))

    @property
    def idle(self) -> bool:
        with self._lock:
            return self._pending == 0

    def stop(self) -> None:
        self._queue.put(None)
        self._thread.join(timeout=5)

    def _run(self) -> None:
        while True:
            item = self._queue.get()
            if item is None:
                return
            fn, args = item
            try:
                fn(*args)
            except Exception:
                log.exception("callback raised; continuing")
            finally:
                with self._lock:
                    self._pending -= 1


@dataclass
class _ClientRecord:
    conn: ConnectionState
    handle: ClientHandle
    scene: SceneGraph


class ServerCore:
    """Authoritative state plus routing; usable without any transport."""

    def __init__(self):
        self.lock = threading.RLock()
        self.registry = REGISTRY
        self.schema_hash = SCHEMA_HASH
        self.scene_graph = SceneGraph()
        self.gui_registry = GuiRegistry()
        self.global_buffer = PersistentBuffer(self.registry)
        self.message_log: Optional[list[Message]] = None  # test tap for broadcast traffic

        self.scene = SceneApi(self, None)
        self.gui = GuiApi(self, None)

        self._clients: dict[int, _ClientRecord] = {}
        self._next_client_id = 1
        self._gui_scope: dict[int, Optional[int]] = {}
        self._click_callbacks: dict[tuple[Optional[int], str], list[Callable]] = {}
        self._connect_callbacks: list[Callable] = []
        self._dispatcher = _Dispatcher()
        self._close_client_hook: Optional[Callable[[int], None]] = None

    # ------------------------------------------------------------------
    # emission

    def _emit(self, msg: Message) -> None:
        # lock held by caller
        mtype = self.registry.get(msg.type)
        if msg.scope is None:
            self.global_buffer.apply(msg)
            if self.message_log is not None:
                self.message_log.append(msg)
            for record in self._clients.values():
                record.conn.pending.apply(msg)
                if mtype.dedup == "purge_prefix":
                    record.conn.overlay.apply(msg)
        else:
            record = self._clients.get(msg.scope)
            if record is not None:
                record.conn.overlay.apply(msg)
                record.conn.pending.apply(msg)

    def _make(self, type_name: str, /, scope: Optional[int] = None, **fields) -> Message:
        return self.registry.make(type_name, scope=scope, **fields)

    def _scene_for(self, scope: Optional[int]) -> SceneGraph:
        if scope is None:
            return self.scene_graph
        record = self._clients.get(scope)
        if record is None:
            raise StaleClientError(f"client {scope} is not connected")
        return record.scene

    # ------------------------------------------------------------------
    # scene operations

    def upsert_node(self, path, kind, props, pose, visible, clickable, scope=None):
        with self.lock:
            graph = self._scene_for(scope)
            node = graph.upsert(path, kind, props, pose, visible, clickable)
            self._emit(
                self._make(
                    f"scene_upsert_{kind}",
                    scope=scope,
                    path=str(node.path),
                    wxyz=node.local_pose.wxyz,
                    position=node.local_pose.position,
                    visible=node.visible,
                    clickable=node.clickable,
                    **node.props,
                )
            )
            return node

    def set_node_prop(self, path, name, value, scope=None) -> None:
        with self.lock:
            graph = self._scene_for(scope)
            node = graph.set_prop(path, name, value)
            self._emit(
                self._make(
                    scene_prop_setter(node.kind, name),
                    scope=scope,
                    path=str(node.path),
                    name=name,
                    value=node.props[name],
                )
            )

    def set_node_pose(self, path, pose: Pose, scope=None) -> None:
        with self.lock:
            graph = self._scene_for(scope)
            node = graph.set_pose(path, pose)
            self._emit(
                self._make(
                    "scene_set_pose", scope=scope, path=str(node.path),
                    wxyz=pose.wxyz, position=pose.position,
                )
            )

    def set_node_visible(self, path, visible: bool, scope=None) -> None:
        with self.lock:
            graph = self._scene_for(scope)
            node = graph.set_visible(path, visible)
            self._emit(
                self._make("scene_set_visible", scope=scope, path=str(node.path), visible=node.visible)
            )

    def set_node_clickable(self, path, clickable: bool, scope=None) -> None:
        with self.lock:
            graph = self._scene_for(scope)
            node = graph.set_clickable(path, clickable)
            self._emit(
                self._make(
                    "scene_set_clickable", scope=scope, path=str(node.path), clickable=node.clickable
                )
            )

    def remove_node(self, path, scope=None) -> list[str]:
        with self.lock:
            graph = self._scene_for(scope)
            removed = graph.remove(path)
            msg = self._make("scene_remove", scope=scope, path=str(as_path(path)))
            self._emit(msg)
            self._drop_click_callbacks(removed, scope)
            if scope is None:
                # Per-client nodes mounted under a removed global path vanish
                # from every mirror; keep the server-side records in step.
                for cid, record in self._clients.items():
                    if str(as_path(path)) != "/" and as_path(path) in record.scene.nodes:
                        also_removed = record.scene.remove(path)
                        self._drop_click_callbacks(also_removed, cid)
            return [str(p) for p in removed]

    def _drop_click_callbacks(self, paths, scope) -> None:
        for p in paths:
            self._click_callbacks.pop((scope, str(p)), None)

    def get_node(self, path, scope=None):
        with self.lock:
            try:
                graph = self._scene_for(scope)
            except StaleClientError:
                return None
            p = as_path(path)
            return graph.nodes.get(p)

    def add_click_callback(self, path, fn: Callable, scope=None) -> Subscription:
        with self.lock:
            key = (scope, str(as_path(path)))
            node = self._scene_for(scope).nodes.get(as_path(path))
            if node is None:
                raise RemovedHandleError(f"node {path} was removed")
            if not node.clickable:
                self.set_node_clickable(path, True, scope)
            self._click_callbacks.setdefault(key, []).append(fn)

        def _remove():
            with self.lock:
                callbacks = self._click_callbacks.get(key)
                if callbacks and fn in callbacks:
                    callbacks.remove(fn)

        return Subscription(_remove)

    # ------------------------------------------------------------------
    # gui operations

    def gui_add(self, kind, props, value, container_uid, scope=None) -> int:
        with self.lock:
            if scope is not None and scope not in self._clients:
                raise StaleClientError(f"client {scope} is not connected")
            if container_uid != 0:
                owner = self._gui_scope.get(container_uid)
                if owner is not None and owner != scope:
                    raise ValidationError(
                        f"container uid={container_uid} belongs to client {owner}"
                    )
            element = self.gui_registry.add(kind, props, value, container_uid)
            self._gui_scope[element.uid] = scope
            fields: dict[str, Any] = dict(
                uid=element.uid, container_uid=element.container_uid, order=element.order,
                **element.props,
            )
            if element.kind in _VALUE_KINDS:
                fields["value"] = element.value
            self._emit(self._make(f"gui_add_{kind}", scope=scope, **fields))
            return element.uid

    def gui_set_prop(self, uid: int, name: str, value) -> None:
        with self.lock:
            element, corrected = self.gui_registry.set_prop(uid, name, value)
            scope = self._gui_scope.get(uid)
            self._emit(
                self._make(
                    gui_prop_setter(element.kind, name), scope=scope,
                    uid=uid, name=name, value=element.props[name],
                )
            )
            if corrected is not None:
                # A tightened bound moved the value; mirrors must hear the
                # corrected value under its own redundancy key.
                self._emit(
                    self._make(gui_value_setter(element.kind), scope=scope, uid=uid, value=corrected)
                )

    def gui_set_value(self, uid: int, value) -> None:
        """Server-initiated write: strict validation, no callback dispatch."""
        with self.lock:
            element = self.gui_registry.set_value(uid, value)
            scope = self._gui_scope.get(uid)
            self._emit(
                self._make(gui_value_setter(element.kind), scope=scope, uid=uid, value=element.value)
            )

    def gui_remove(self, uid: int) -> None:
        with self.lock:
            scope = self._gui_scope.get(uid)
            removed = self.gui_registry.remove(uid)
            for u in removed:
                self._gui_scope.pop(u, None)
            self._emit(
                self._make(
                    "gui_remove", scope=scope,
                    uid=uid, subtree_uids=[u for u in removed if u != uid],
                )
            )

    def get_gui_element(self, uid: int):
        with self.lock:
            return self.gui_registry.elements.get(uid)

    def add_gui_callback(self, uid: int, fn: Callable) -> Subscription:
        with self.lock:
            self.gui_registry.add_callback(uid, fn)

        def _remove():
            with self.lock:
                self.gui_registry.remove_callback(uid, fn)

        return Subscription(_remove)

    # ------------------------------------------------------------------
    # camera

    def get_camera(self, client_id: int) -> CameraState:
        with self.lock:
            record = self._clients.get(client_id)
            if record is None:
                raise StaleClientError(f"client {client_id} is not connected")
            return record.conn.camera

    def set_camera(self, client_id: int, state: CameraState) -> None:
        with self.lock:
            record = self._clients.get(client_id)
            if record is None:
                raise StaleClientError(f"client {client_id} is not connected")
            record.conn.camera = state
            self._emit(
                self._make(
                    "camera_set", scope=client_id,
                    wxyz=state.pose.wxyz, position=state.pose.position,
                    fov=state.fov, aspect=state.aspect, look_at=state.look_at,
                )
            )

    # ------------------------------------------------------------------
    # connections

    def register_connection(self) -> ConnectionState:
        """Create a connection record with the late-joiner snapshot already
        queued as its first pending content."""
        with self.lock:
            client_id = self._next_client_id
            self._next_client_id += 1
            conn = ConnectionState(client_id, self.registry)
            record = _ClientRecord(conn=conn, handle=ClientHandle(self, client_id), scene=SceneGraph())
            self._clients[client_id] = record
            conn.enqueue(snapshot_for_new_client(self.global_buffer))
            return conn

    def connection_ready(self, conn: ConnectionState) -> None:
        with self.lock:
            record = self._clients.get(conn.client_id)
            callbacks = list(self._connect_callbacks)
        if record is None:
            return
        for fn in callbacks:
            self._dispatcher.submit(fn, record.handle)

    def connection_closed(self, client_id: int) -> None:
        with self.lock:
            record = self._clients.pop(client_id, None)
            if record is None:
                return
            owned = [u for u, s in self._gui_scope.items() if s == client_id]
            for uid in owned:
                if uid in self.gui_registry:
                    self.gui_registry.remove(uid)
                self._gui_scope.pop(uid, None)
            for key in [k for k in self._click_callbacks if k[0] == client_id]:
                del self._click_callbacks[key]

    def is_connected(self, client_id: int) -> bool:
        with self.lock:
            return client_id in self._clients

    def list_clients(self) -> dict[int, ClientHandle]:
        with self.lock:
            return {cid: record.handle for cid, record in self._clients.items()}

    def on_client_connect(self, fn: Callable) -> Subscription:
        with self.lock:
            self._connect_callbacks.append(fn)

        def _remove():
            with self.lock:
                if fn in self._connect_callbacks:
                    self._connect_callbacks.remove(fn)

        return Subscription(_remove)

    # ------------------------------------------------------------------
    # client events (called on the transport loop; dispatched to the
    # callback worker)

    def client_event(self, client_id: int, msg: Message) -> None:
        self._dispatcher.submit(self._handle_client_event, client_id, msg)

    def _handle_client_event(self, client_id: int, msg: Message) -> None:
        t = msg.type
        try:
            if t.startswith("gui_client_"):
                self._handle_gui_event(client_id, msg)
            elif t == "camera_report":
                self._handle_camera_report(client_id, msg)
            elif t == "scene_click":
                self._handle_scene_click(client_id, msg)
            else:
                log.warning("unexpected client message %s from client %d", t, client_id)
        except IllTypedValueError as exc:
            log.error("protocol violation from client %d: %s", client_id, exc)
            if self._close_client_hook is not None:
                self._close_client_hook(client_id)

    def _handle_gui_event(self, client_id: int, msg: Message) -> None:
        uid = msg.payload["uid"]
        with self.lock:
            element = self.gui_registry.elements.get(uid)
            if element is None:
                log.warning("gui event for unknown uid %d (stale client %d)", uid, client_id)
                return
            owner = self._gui_scope.get(uid)
            if owner is not None and owner != client_id:
                log.warning("client %d touched uid %d owned by client %s", client_id, uid, owner)
                return
            is_click = msg.type == "gui_client_click"
            if is_click != (element.kind == "button"):
                raise IllTypedValueError(
                    f"message {msg.type} does not match element kind {element.kind}"
                )
            if not is_click and msg.type != gui_client_update_type(element.kind):
                raise IllTypedValueError(
                    f"message {msg.type} does not match element kind {element.kind}"
                )
            event = GuiEvent(
                uid=uid,
                client_id=client_id,
                new_value=msg.payload.get("value"),
                timestamp_ms=int(time.time() * 1000),
            )
            try:
                element, normalized, callbacks = self.gui_registry.apply_client_update(event)
            except RejectedValueError as exc:
                log.warning("rejected client value: %s", exc)
                return
            self._emit(
                self._make(gui_value_setter(element.kind), scope=owner, uid=uid, value=normalized)
            )
            event = GuiEvent(uid, client_id, normalized, event.timestamp_ms)
        for fn in callbacks:
            try:
                fn(event)
            except Exception:
                log.exception("gui callback raised; continuing")

    def _handle_camera_report(self, client_id: int, msg: Message) -> None:
        p = msg.payload
        try:
            state = CameraState(
                pose=Pose.make(p["wxyz"], p["position"]),
                fov=p["fov"], aspect=p["aspect"], look_at=tuple(p["look_at"]),
            )
        except ValidationError as exc:
            log.warning("dropped invalid camera report from client %d: %s", client_id, exc)
            return
        with self.lock:
            record = self._clients.get(client_id)
            if record is not None:
                record.conn.camera = state
                record.conn.camera_reported = True

    def _handle_scene_click(self, client_id: int, msg: Message) -> None:
        p = msg.payload
        direction = p["ray_direction"]
        norm = math.sqrt(sum(c * c for c in direction))
        if norm < 1e-8:
            log.warning("dropped click with degenerate ray from client %d", client_id)
            return
        direction = tuple(c / norm for c in direction)
        path = p["path"]
        with self.lock:
            scene_path = as_path(path)
            if scene_path in self.scene_graph.nodes:
                key = (None, str(scene_path))
                node = self.scene_graph.nodes[scene_path]
            else:
                record = self._clients.get(client_id)
                if record is None or scene_path not in record.scene.nodes:
                    log.warning("click on unknown node %s from client %d", path, client_id)
                    return
                key = (client_id, str(scene_path))
                node = record.scene.nodes[scene_path]
            if not node.clickable:
                log.warning("click on non-clickable node %s ignored", path)
                return
            callbacks = list(self._click_callbacks.get(key, ()))
        event = ClickEvent(
            path=str(scene_path),
            client_id=client_id,
            ray_origin=tuple(p["ray_origin"]),
            ray_direction=direction,
            screen_pos=tuple(p["screen_pos"]),
        )
        for fn in callbacks:
            try:
                fn(event)
            except Exception:
                log.exception("click callback raised; continuing")

    # ------------------------------------------------------------------
    # lifecycle / test support

    def connection_stats(self, client_id: int) -> dict[str, int]:
        with self.lock:
            record = self._clients.get(client_id)
            if record is None:
                raise StaleClientError(f"client {client_id} is not connected")
            conn = record.conn
            return dict(
                outstanding=conn.outstanding,
                max_outstanding_seen=conn.max_outstanding_seen,
                pending=len(conn.pending),
                sent_batches=conn.sent_batches,
                sent_messages=conn.sent_messages,
            )

    def wait_synced(self, timeout: float = 5.0) -> bool:
        """Block until every connection has drained and acked everything and
        no callbacks are in flight. Test/synchronization helper."""
        deadline = time.monotonic() + timeout
        while time.monotonic() < deadline:
            with self.lock:
                conns_idle = all(r.conn.idle for r in self._clients.values())
            if conns_idle and self._dispatcher.idle:
                return True
            time.sleep(0.002)
        return False

    def shutdown(self) -> None:
        self._dispatcher.stop()


_VALUE_KINDS = frozenset(
    ("button", "checkbox", "slider", "number", "text", "dropdown", "rgb", "vector3")
)


class ViewerServer(ServerCore):
    """A running visualization server: ServerCore plus the websocket/HTTP
    transport. Construction binds the port and starts serving."""

    def __init__(self, host: str = "127.0.0.1", port: int = 8080):
        super().__init__()
        from .transport import ServerTransport  # deferred: avoid import cycle

        self._transport = ServerTransport(self, host, port)
        self._transport.start()
        self._close_client_hook = self._transport.close_client

    @property
    def host(self) -> str:
        return self._transport.host

    @property
    def port(self) -> int:
        return self._transport.port

    @property
    def url(self) -> str:
        return f"ws://{self.host}:{self.port}/ws"

    def stop(self) -> None:
        self._transport.stop()
        self.shutdown()

    def __enter__(self) -> "ViewerServer":
        return self

    def __exit__(self, *exc) -> None:
        self.stop()


def create_server(host: str = "127.0.0.1", port: int = 8080) -> ViewerServer:
    """Start a visualization server; scene and GUI facades are immediately
    usable and any number of clients may connect."""
    return ViewerServer(host, port)
