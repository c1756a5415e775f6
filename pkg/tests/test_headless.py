"""Headless client tests: mirror apply semantics, canonical state
determinism, wire-level equivalence with the server-side state machines,
and sequencing rules."""

import pytest

from opdriver import RandomOpDriver
from scenesync import ViewerServer, connect
from scenesync.api import ServerCore
from scenesync.errors import ProtocolError
from scenesync.headless import (
    ClientMirror,
    apply_batch,
    apply_message,
    canonical_state,
)
from scenesync.messages import decode_batch, encode_batch
from scenesync.protocol import REGISTRY


def _batch(messages, seq):
    return decode_batch(REGISTRY, encode_batch(REGISTRY, messages, seq=seq))


# ---------------------------------------------------------------------------
# mirror semantics


def test_empty_mirror_canonical_is_fixed():
    one, two = ClientMirror(), ClientMirror()
    assert canonical_state(one) == canonical_state(two)
    text = canonical_state(one)
    assert text.startswith("scene:\n  / kind=placeholder")
    assert "gui:\n" in text
    assert "camera:" in text


def test_apply_batch_enforces_monotonic_seq():
    mirror = ClientMirror()
    msg = REGISTRY.make("scene_remove", path="/ghost")
    apply_batch(mirror, 1, [msg])
    assert mirror.last_seq == 1
    with pytest.raises(ProtocolError, match="seq"):
        apply_batch(mirror, 1, [msg])
    with pytest.raises(ProtocolError, match="seq"):
        apply_batch(mirror, 0, [msg])
    apply_batch(mirror, 5, [msg])
    assert mirror.last_seq == 5


def test_mirror_rejects_client_only_messages():
    mirror = ClientMirror()
    with pytest.raises(ProtocolError):
        apply_message(mirror, REGISTRY.make("ack", seq=1))
    with pytest.raises(ProtocolError):
        apply_message(mirror, REGISTRY.make("client_hello", schema_hash="x"))


def test_mirror_upsert_then_hide():
    mirror = ClientMirror()
    upsert = REGISTRY.make(
        "scene_upsert_box",
        path="/a", wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
        visible=True, clickable=False,
        dimensions=(1.0, 1.0, 1.0), color=(0, 0, 0),
    )
    hide = REGISTRY.make("scene_set_visible", path="/a", visible=False)
    apply_batch(mirror, 1, [upsert, hide])
    assert mirror.scene.get("/a").visible is False


def test_mirror_tolerates_remove_of_unknown_state():
    mirror = ClientMirror()
    apply_message(mirror, REGISTRY.make("scene_remove", path="/never"))
    apply_message(mirror, REGISTRY.make("gui_remove", uid=99, subtree_uids=[]))
    apply_message(mirror, REGISTRY.make("scene_set_visible", path="/nope", visible=False))
    assert len(mirror.scene.nodes) == 1


def test_float_formatting_nine_significant_digits():
    mirror = ClientMirror()
    apply_message(
        mirror,
        REGISTRY.make(
            "scene_upsert_camera_frustum",
            path="/cam", wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
            visible=True, clickable=False,
            fov=1.2345678912345, aspect=16 / 9, scale=0.3, color=(0, 0, 0),
        ),
    )
    text = canonical_state(mirror)
    assert "fov=1.23456789 " in text
    assert "aspect=1.77777778" in text


def test_two_mirrors_fed_same_log_identical():
    core = ServerCore()
    core.message_log = []
    try:
        RandomOpDriver(core, seed=31).run(500)
        log = core.message_log
    finally:
        core.shutdown()
    a, b = ClientMirror(), ClientMirror()
    for msg in log:
        apply_message(a, msg)
        apply_message(b, msg)
    assert canonical_state(a) == canonical_state(b)


def test_wire_roundtripped_log_matches_direct_apply():
    """Fuzzed batches: a mirror fed encode/decode-cycled messages equals the
    server-side oracle state fed the originals."""
    core = ServerCore()
    core.message_log = []
    try:
        RandomOpDriver(core, seed=77).run(800)
        log = core.message_log
    finally:
        core.shutdown()
    direct, cycled = ClientMirror(), ClientMirror()
    seq = 0
    for start in range(0, len(log), 50):
        chunk = log[start : start + 50]
        seq += 1
        _, decoded = _batch(chunk, seq)
        apply_batch(cycled, seq, decoded)
        for msg in chunk:
            apply_message(direct, msg)
    assert canonical_state(cycled) == canonical_state(direct)


# ---------------------------------------------------------------------------
# live sessions


@pytest.fixture
def server():
    s = ViewerServer(port=0)
    yield s
    s.stop()


def test_connect_after_history_equals_always_connected(server):
    early = connect(server.url)
    driver = RandomOpDriver(server, seed=5)
    driver.run(400)
    assert server.wait_synced(10)
    late = connect(server.url)
    assert server.wait_synced(10)
    try:
        assert late.canonical_state() == early.canonical_state()
    finally:
        early.close()
        late.close()


def test_corrupted_hash_rejected_live(server):
    from scenesync.errors import HandshakeRejectedError

    with pytest.raises(HandshakeRejectedError, match="mismatch"):
        connect(server.url, schema_hash="f" * 64)


def test_session_counters_and_wait_quiet(server):
    with connect(server.url) as session:
        server.scene.add_box("/box")
        assert session.wait_for(lambda m: len(m.scene.nodes) == 2)
        assert session.wait_quiet(quiet_ms=100, timeout=5)
        assert session.batches_applied >= 1
        assert session.messages_applied >= 1
        assert session.last_seq >= 1
