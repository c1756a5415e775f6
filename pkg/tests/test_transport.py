"""Live transport tests: HTTP endpoints, handshake, snapshot delivery, ack
flow control, and connection teardown."""

import socket
import threading
import time

import pytest
import requests

from scenesync import ViewerServer, connect
from scenesync.errors import HandshakeRejectedError, ServerStartupError


@pytest.fixture
def server():
    s = ViewerServer(port=0)
    yield s
    s.stop()


def _http(server, path):
    return requests.get(f"http://{server.host}:{server.port}{path}", timeout=5)


# ---------------------------------------------------------------------------
# HTTP


def test_healthz(server):
    response = _http(server, "/healthz")
    assert response.status_code == 200
    assert response.text == "ok"


def test_index_serves_html(server):
    response = _http(server, "/")
    assert response.status_code == 200
    assert "text/html" in response.headers["Content-Type"]


def test_port_zero_reports_bound_port(server):
    assert 1 <= server.port <= 65535


def test_bind_conflict_raises_named_error(server):
    with pytest.raises(ServerStartupError, match=f"{server.port}"):
        ViewerServer(host=server.host, port=server.port)


# ---------------------------------------------------------------------------
# handshake


def test_good_handshake_delivers_snapshot(server):
    server.scene.add_box("/box")
    server.gui.add_button("Click")
    with connect(server.url) as session:
        assert session.client_id == 1
        assert session.wait_for(lambda m: "/box" in [str(p) for p in m.scene.nodes])
        assert session.wait_for(lambda m: len(m.gui.elements) == 1)


def test_connect_to_empty_server_empty_mirror(server):
    with connect(server.url) as session:
        assert server.wait_synced()
        state = session.canonical_state()
        assert state.startswith("scene:\n  / ")
        assert len(session.mirror.scene.nodes) == 1
        assert session.mirror.gui.elements == {}


def test_mismatched_hash_rejected(server):
    with pytest.raises(HandshakeRejectedError) as excinfo:
        connect(server.url, schema_hash="0" * 64)
    assert excinfo.value.client_hash == "0" * 64
    assert excinfo.value.server_hash == server.schema_hash


def test_client_ids_assigned_in_connect_order(server):
    sessions = [connect(server.url) for _ in range(3)]
    try:
        assert [s.client_id for s in sessions] == [1, 2, 3]
    finally:
        for s in sessions:
            s.close()


def test_simultaneous_connects_distinct_ids(server):
    results = []
    lock = threading.Lock()

    def go():
        session = connect(server.url)
        with lock:
            results.append(session.client_id)
        session.close()

    threads = [threading.Thread(target=go) for _ in range(8)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert sorted(results) == list(range(1, 9))


def test_non_hello_first_frame_closes_connection(server):
    import asyncio

    import aiohttp

    from scenesync.messages import encode_batch
    from scenesync.protocol import REGISTRY

    async def attempt():
        async with aiohttp.ClientSession() as http:
            ws = await http.ws_connect(server.url)
            await ws.send_bytes(encode_batch(REGISTRY, [REGISTRY.make("ack", seq=1)], seq=0))
            msg = await ws.receive(timeout=5)
            return msg.type

    result = asyncio.run(attempt())
    assert result in (aiohttp.WSMsgType.CLOSE, aiohttp.WSMsgType.CLOSED)


def test_garbage_frame_closes_connection(server):
    import asyncio

    import aiohttp

    async def attempt():
        async with aiohttp.ClientSession() as http:
            ws = await http.ws_connect(server.url)
            await ws.send_bytes(b"\xc1 this is not a frame")
            msg = await ws.receive(timeout=5)
            return msg.type

    result = asyncio.run(attempt())
    assert result in (aiohttp.WSMsgType.CLOSE, aiohttp.WSMsgType.CLOSED)


# ---------------------------------------------------------------------------
# synchronization and flow control


def test_incremental_updates_reach_client(server):
    with connect(server.url) as session:
        box = server.scene.add_box("/box")
        box.color = (255, 0, 0)
        assert session.wait_for(
            lambda m: "/box" in [str(p) for p in m.scene.nodes]
            and m.scene.get("/box").props["color"] == (255, 0, 0)
        )


def test_window_never_exceeded_with_slow_client(server):
    with connect(server.url, rtt_ms=120) as session:
        box = server.scene.add_box("/box")
        for i in range(300):
            box.color = (i % 256, 0, 0)
            if i % 50 == 0:
                time.sleep(0.02)
        assert server.wait_synced(timeout=15)
        stats = server.connection_stats(session.client_id)
        assert stats["max_outstanding_seen"] <= 2
        assert stats["outstanding"] == 0
        assert session.mirror.scene.get("/box").props["color"] == (299 % 256, 0, 0)
        # dedup while the window was blocked: far fewer wire messages than updates
        assert session.messages_applied < 150


def test_disconnect_updates_client_list(server):
    a = connect(server.url)
    b = connect(server.url)
    assert set(server.list_clients()) == {1, 2}
    a.close()
    deadline = time.monotonic() + 5
    while time.monotonic() < deadline and 1 in server.list_clients():
        time.sleep(0.01)
    assert set(server.list_clients()) == {2}
    b.close()


def test_reconnect_gets_fresh_snapshot(server):
    server.scene.add_box("/box")
    with connect(server.url) as first:
        assert first.wait_for(lambda m: len(m.scene.nodes) == 2)
        first_state = first.canonical_state()
    with connect(server.url) as second:
        assert second.wait_for(lambda m: len(m.scene.nodes) == 2)
        assert second.canonical_state() == first_state
        assert second.client_id == 2
