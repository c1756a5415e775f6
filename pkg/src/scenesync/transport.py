"""WebSocket serving: handshake, batch flushing on a timer, ack intake, and
the static HTTP endpoints.

One event-loop thread per server. The flush task drains each connection's
pending buffer into at most one batch per tick, gated by the ack window;
per-connection writer tasks keep sends ordered without holding the server
lock across IO.
"""

from __future__ import annotations

import asyncio
import logging
import threading
from pathlib import Path
from typing import TYPE_CHECKING, Optional

from aiohttp import WSMsgType, web

from .buffering import FLUSH_INTERVAL, ConnectionState
from .errors import DecodeError, SchemaError, ServerStartupError
from .messages import encode_batch, decode_batch

if TYPE_CHECKING:
    from .api import ServerCore

log = logging.getLogger(__name__)

_HANDSHAKE_TIMEOUT = 10.0

_PLACEHOLDER_PAGE = """<!doctype html>
<html>
  <head><title>scenesync</title></head>
  <body>
    <h1>scenesync server</h1>
    <p>No web client bundle was found. Build the frontend (see README) or
    connect with the headless client:</p>
    <pre>scenesync headless connect ws://HOST:PORT/ws --dump-state</pre>
  </body>
</html>
"""


def _default_static_dir() -> Optional[Path]:
    candidate = Path(__file__).resolve().parents[2] / "frontend" / "dist"
    return candidate if (candidate / "index.html").is_file() else None


class _Live:
    """Loop-side record for one accepted connection."""

    __slots__ = ("conn", "ws", "queue", "writer_task")

    def __init__(self, conn: ConnectionState, ws: web.WebSocketResponse):
        self.conn = conn
        self.ws = ws
        self.queue: asyncio.Queue = asyncio.Queue()
        self.writer_task: Optional[asyncio.Task] = None


class ServerTransport:
    def __init__(
        self,
        core: "ServerCore",
        host: str = "127.0.0.1",
        port: int = 8080,
        static_dir: Optional[Path] = None,
    ):
        self._core = core
        self._requested_host = host
        self._requested_port = port
        self._static_dir = static_dir if static_dir is not None else _default_static_dir()
        self._loop: Optional[asyncio.AbstractEventLoop] = None
        self._thread: Optional[threading.Thread] = None
        self._runner: Optional[web.AppRunner] = None
        self._flush_task: Optional[asyncio.Task] = None
        self._lives: dict[int, _Live] = {}
        self._stopped = False
        self.host = host
        self.port = port

    # ------------------------------------------------------------------
    # lifecycle

    def start(self) -> None:
        self._loop = asyncio.new_event_loop()
        started = threading.Event()

        def run() -> None:
            asyncio.set_event_loop(self._loop)
            started.set()
            self._loop.run_forever()

        self._thread = threading.Thread(target=run, name="scenesync-io", daemon=True)
        self._thread.start()
        started.wait()
        future = asyncio.run_coroutine_threadsafe(self._start_site(), self._loop)
        try:
            future.result(timeout=15)
        except ServerStartupError:
            self._stop_loop()
            raise
        except OSError as exc:
            self._stop_loop()
            raise ServerStartupError(
                f"cannot bind {self._requested_host}:{self._requested_port}: {exc}"
            ) from exc

    def stop(self) -> None:
        if self._loop is None or self._stopped:
            return
        self._stopped = True
        future = asyncio.run_coroutine_threadsafe(self._shutdown(), self._loop)
        try:
            future.result(timeout=10)
        except Exception:
            log.exception("transport shutdown did not finish cleanly")
        self._stop_loop()

    def _stop_loop(self) -> None:
        if self._loop is not None:
            self._loop.call_soon_threadsafe(self._loop.stop)
        if self._thread is not None:
            self._thread.join(timeout=5)

    async def _start_site(self) -> None:
        app = web.Application()
        app.router.add_get("/ws", self._ws_handler)
        app.router.add_get("/healthz", self._healthz)
        app.router.add_get("/", self._index)
        if self._static_dir is not None:
            app.router.add_static("/assets", self._static_dir)
        self._runner = web.AppRunner(app)
        await self._runner.setup()
        site = web.TCPSite(self._runner, self._requested_host, self._requested_port)
        try:
            await site.start()
        except OSError as exc:
            raise ServerStartupError(
                f"cannot bind {self._requested_host}:{self._requested_port}: {exc}"
            ) from exc
        server = site._server  # actual bound sockets; needed for port 0
        sock = server.sockets[0]
        self.host, self.port = sock.getsockname()[:2]
        self._flush_task = asyncio.get_running_loop().create_task(self._flush_loop())

    async def _shutdown(self) -> None:
        if self._flush_task is not None:
            self._flush_task.cancel()
        for live in list(self._lives.values()):
            if live.writer_task is not None:
                live.writer_task.cancel()
            await live.ws.close()
        self._lives.clear()
        if self._runner is not None:
            await self._runner.cleanup()

    # ------------------------------------------------------------------
    # HTTP endpoints

    async def _healthz(self, request: web.Request) -> web.Response:
        return web.Response(text="ok")

    async def _index(self, request: web.Request) -> web.Response:
        if self._static_dir is not None:
            index = self._static_dir / "index.html"
            if index.is_file():
                return web.FileResponse(index)
        return web.Response(text=_PLACEHOLDER_PAGE, content_type="text/html")

    # ------------------------------------------------------------------
    # flush

    async def _flush_loop(self) -> None:
        registry = self._core.registry
        while True:
            await asyncio.sleep(FLUSH_INTERVAL)
            drained: list[tuple[_Live, int, list]] = []
            with self._core.lock:
                for live in self._lives.values():
                    result = live.conn.flush_tick()
                    if result is not None:
                        drained.append((live, result[0], result[1]))
            # encode outside the lock: large batches must not stall writers
            for live, seq, messages in drained:
                live.queue.put_nowait(encode_batch(registry, messages, seq))

    async def _writer(self, live: _Live) -> None:
        while True:
            frame = await live.queue.get()
            if frame is None:
                return
            await live.ws.send_bytes(frame)

    def queues_empty(self) -> bool:
        return all(live.queue.empty() for live in self._lives.values())

    def close_client(self, client_id: int) -> None:
        """Tear down one connection (protocol violation path)."""
        if self._loop is None:
            return

        async def _close() -> None:
            live = self._lives.get(client_id)
            if live is not None:
                await live.ws.close()

        asyncio.run_coroutine_threadsafe(_close(), self._loop)

    # ------------------------------------------------------------------
    # websocket

    async def _ws_handler(self, request: web.Request) -> web.WebSocketResponse:
        ws = web.WebSocketResponse(max_msg_size=0)
        await ws.prepare(request)
        registry = self._core.registry

        # Handshake: first client frame must be a hello with a matching hash.
        try:
            first = await ws.receive(timeout=_HANDSHAKE_TIMEOUT)
        except asyncio.TimeoutError:
            await ws.close()
            return ws
        if first.type != WSMsgType.BINARY:
            await ws.close()
            return ws
        try:
            _, messages = decode_batch(registry, first.data)
            if len(messages) != 1 or messages[0].type != "client_hello":
                raise SchemaError("expected a client_hello frame")
            client_hash = messages[0].payload["schema_hash"]
        except (DecodeError, SchemaError) as exc:
            log.warning("bad handshake frame: %s", exc)
            await ws.close()
            return ws

        if client_hash != self._core.schema_hash:
            reject = registry.make(
                "handshake_reject",
                reason="schema hash mismatch",
                server_schema_hash=self._core.schema_hash,
                client_schema_hash=client_hash,
            )
            await ws.send_bytes(encode_batch(registry, [reject], seq=0))
            await ws.close()
            return ws

        conn = self._core.register_connection()
        live = _Live(conn, ws)
        self._lives[conn.client_id] = live
        accept = registry.make("handshake_accept", client_id=conn.client_id)
        await ws.send_bytes(encode_batch(registry, [accept], seq=0))
        live.writer_task = asyncio.get_running_loop().create_task(self._writer(live))
        self._core.connection_ready(conn)
        log.info("client %d connected", conn.client_id)

        try:
            async for msg in ws:
                if msg.type != WSMsgType.BINARY:
                    continue
                try:
                    seq, messages = decode_batch(registry, msg.data)
                except (DecodeError, SchemaError) as exc:
                    log.error("undecodable frame from client %d: %s", conn.client_id, exc)
                    break
                if seq != 0 or len(messages) != 1:
                    log.error("malformed client frame from client %d", conn.client_id)
                    break
                inbound = messages[0]
                if inbound.type == "ack":
                    with self._core.lock:
                        if not conn.on_ack(inbound.payload["seq"]):
                            log.warning(
                                "client %d acked unknown seq %d",
                                conn.client_id, inbound.payload["seq"],
                            )
                else:
                    self._core.client_event(conn.client_id, inbound)
        finally:
            self._lives.pop(conn.client_id, None)
            if live.writer_task is not None:
                live.writer_task.cancel()
            self._core.connection_closed(conn.client_id)
            log.info("client %d disconnected", conn.client_id)

        return ws
