"""Buffer and flow-control tests.

The centerpiece is the convergence invariant: for any op sequence, a mirror
fed the deduplicated snapshot ends byte-identical to a mirror fed the full
message log. Both the real state machines and a naive dict-based oracle
check it, so a bug in shared apply code cannot hide."""

import random

import pytest

from opdriver import RandomOpDriver, naive_replay
from scenesync.api import ServerCore
from scenesync.buffering import (
    WINDOW,
    ConnectionState,
    PersistentBuffer,
    RedundancyKey,
    redundancy_key,
    snapshot_for_new_client,
)
from scenesync.headless import ClientMirror, apply_message, canonical_state
from scenesync.protocol import REGISTRY


def _make(type_name, **fields):
    return REGISTRY.make(type_name, **fields)


def _upsert(path, **extra):
    fields = dict(
        path=path, wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
        visible=True, clickable=False,
        dimensions=(1.0, 1.0, 1.0), color=(90, 120, 255),
    )
    fields.update(extra)
    return _make("scene_upsert_box", **fields)


def _set_color(path, color):
    return _make("scene_set_color_prop", path=path, name="color", value=color)


# ---------------------------------------------------------------------------
# key classification


def test_redundancy_key_classes():
    msg = _upsert("/box")
    key = redundancy_key(REGISTRY.get(msg.type), msg)
    assert key == RedundancyKey("node_upsert", "/box")

    msg = _set_color("/box", (1, 2, 3))
    key = redundancy_key(REGISTRY.get(msg.type), msg)
    assert key == RedundancyKey("node_prop", "/box", "color")

    msg = _make("gui_set_float_value", uid=7, value=1.0)
    key = redundancy_key(REGISTRY.get(msg.type), msg)
    assert key == RedundancyKey("gui_value", "7")

    msg = _make("ack", seq=1)
    assert redundancy_key(REGISTRY.get(msg.type), msg) is None

    msg = _make(
        "camera_set", wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
        fov=1.0, aspect=1.0, look_at=(0.0, 0.0, 0.0),
    )
    assert redundancy_key(REGISTRY.get(msg.type), msg) == RedundancyKey("camera_set", "", "camera")


# ---------------------------------------------------------------------------
# dedup


def test_two_updates_one_entry_latest_value():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_set_color("/box", (255, 0, 0)))
    buf.apply(_set_color("/box", (0, 0, 255)))
    messages = buf.messages()
    assert len(messages) == 1
    assert messages[0].payload["value"] == (0, 0, 255)
    # sequential-apply oracle over a naive state map agrees with replay
    full = [_upsert("/box"), _set_color("/box", (255, 0, 0)), _set_color("/box", (0, 0, 255))]
    buf2 = PersistentBuffer(REGISTRY)
    for msg in full:
        buf2.apply(msg)
    assert naive_replay(full) == naive_replay(buf2.messages())


def test_replace_keeps_original_position():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_set_color("/a", (1, 1, 1)))
    buf.apply(_set_color("/b", (2, 2, 2)))
    buf.apply(_set_color("/a", (9, 9, 9)))
    messages = buf.messages()
    assert [m.payload["path"] for m in messages] == ["/a", "/b"]
    assert messages[0].payload["value"] == (9, 9, 9)


def test_thousand_updates_single_entry():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/box"))
    for i in range(1000):
        buf.apply(_set_color("/box", (i % 256, 0, 0)))
    assert len(buf) == 2  # upsert + one prop entry
    assert buf.messages()[-1].payload["value"] == (999 % 256, 0, 0)


def test_upsert_purges_stale_prop_entries_for_path():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/box"))
    buf.apply(_set_color("/box", (255, 0, 0)))
    buf.apply(_upsert("/box", color=(1, 2, 3)))  # re-create resets props
    messages = buf.messages()
    assert len(messages) == 1
    assert messages[0].type == "scene_upsert_box"
    # replay equivalence against the full history
    full = [_upsert("/box"), _set_color("/box", (255, 0, 0)), _upsert("/box", color=(1, 2, 3))]
    assert naive_replay(full) == naive_replay(messages)


def test_upsert_purge_does_not_touch_children():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/a"))
    buf.apply(_set_color("/a/b", (5, 5, 5)))
    buf.apply(_upsert("/a"))
    assert len(buf) == 2


# ---------------------------------------------------------------------------
# purge


def test_remove_purges_subtree_and_is_not_stored():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/a"))
    buf.apply(_upsert("/a/b"))
    buf.apply(_make("scene_remove", path="/a"))
    assert len(buf) == 0


def test_remove_prefix_does_not_match_sibling_names():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/a"))
    buf.apply(_upsert("/ab"))
    buf.apply(_make("scene_remove", path="/a"))
    remaining = [m.payload["path"] for m in buf.messages()]
    assert remaining == ["/ab"]


def test_pending_buffer_retains_removals():
    buf = PersistentBuffer(REGISTRY, retain_removals=True)
    buf.apply(_upsert("/a"))
    buf.apply(_upsert("/a/b"))
    buf.apply(_make("scene_remove", path="/a"))
    messages = buf.messages()
    assert [m.type for m in messages] == ["scene_remove"]
    # consecutive removes of the same path collapse
    buf.apply(_upsert("/a"))
    buf.apply(_make("scene_remove", path="/a"))
    assert [m.type for m in buf.messages()] == ["scene_remove"]


def test_gui_remove_purges_by_uid_set():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_make(
        "gui_add_folder", uid=1, container_uid=0, order=0,
        label="f", expanded=True, visible=True,
    ))
    buf.apply(_make(
        "gui_add_button", uid=2, container_uid=1, order=1,
        label="b", color=None, disabled=False, visible=True, value=0,
    ))
    buf.apply(_make("gui_set_int_value", uid=2, value=3))
    buf.apply(_make("gui_add_button", uid=3, container_uid=0, order=2,
                    label="other", color=None, disabled=False, visible=True, value=0))
    buf.apply(_make("gui_remove", uid=1, subtree_uids=[2]))
    remaining = buf.messages()
    assert len(remaining) == 1
    assert remaining[0].payload["uid"] == 3


def test_policy_none_always_appends():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_make("ack", seq=1))
    buf.apply(_make("ack", seq=1))
    assert len(buf) == 2


# ---------------------------------------------------------------------------
# snapshots


def test_empty_snapshot():
    assert snapshot_for_new_client(PersistentBuffer(REGISTRY), PersistentBuffer(REGISTRY)) == []


def test_snapshot_parent_precedes_child():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/parent"))
    buf.apply(_upsert("/parent/child"))
    buf.apply(_upsert("/parent"))  # refresh parent; position must not move
    snapshot = snapshot_for_new_client(buf)
    paths = [m.payload["path"] for m in snapshot]
    assert paths.index("/parent") < paths.index("/parent/child")


def test_snapshot_overlay_follows_global():
    global_buf = PersistentBuffer(REGISTRY)
    overlay = PersistentBuffer(REGISTRY)
    global_buf.apply(_upsert("/shared"))
    overlay.apply(_upsert("/private"))
    snapshot = snapshot_for_new_client(global_buf, overlay)
    assert [m.payload["path"] for m in snapshot] == ["/shared", "/private"]


def test_snapshot_replay_idempotent():
    buf = PersistentBuffer(REGISTRY)
    buf.apply(_upsert("/box"))
    buf.apply(_set_color("/box", (9, 9, 9)))
    snapshot = snapshot_for_new_client(buf)
    once = ClientMirror()
    for msg in snapshot:
        apply_message(once, msg)
    twice = ClientMirror()
    for msg in snapshot + snapshot:
        apply_message(twice, msg)
    assert canonical_state(once) == canonical_state(twice)


# ---------------------------------------------------------------------------
# connection flow control


def test_flush_empty_pending_no_frame():
    conn = ConnectionState(1, REGISTRY)
    assert conn.flush_tick() is None


def test_flush_blocked_at_window():
    conn = ConnectionState(1, REGISTRY)
    for _ in range(WINDOW):
        conn.enqueue([_upsert(f"/n{conn.next_seq}")])
        assert conn.flush_tick() is not None
    conn.enqueue([_upsert("/more")])
    assert conn.flush_tick() is None  # window full regardless of pending size
    assert conn.outstanding == WINDOW


def test_dedup_while_window_full_then_ack():
    conn = ConnectionState(1, REGISTRY)
    conn.enqueue([_upsert("/box")])
    seq1, _ = conn.flush_tick()
    conn.enqueue([_upsert("/other")])
    seq2, _ = conn.flush_tick()
    # window now full; three updates to one key arrive
    for color in ((1, 0, 0), (2, 0, 0), (3, 0, 0)):
        conn.enqueue([_set_color("/box", color)])
    assert conn.flush_tick() is None
    conn.on_ack(seq1)
    result = conn.flush_tick()
    assert result is not None
    _, messages = result
    assert len(messages) == 1  # superseded updates never hit the wire
    assert messages[0].payload["value"] == (3, 0, 0)


def test_ack_unknown_seq_tolerated():
    conn = ConnectionState(1, REGISTRY)
    assert conn.on_ack(99) is False
    conn.enqueue([_upsert("/box")])
    seq, _ = conn.flush_tick()
    assert conn.on_ack(seq) is True
    assert conn.on_ack(seq) is False  # duplicate
    assert conn.outstanding == 0


def test_randomized_send_ack_schedule_window_invariant():
    rng = random.Random(5)
    conn = ConnectionState(1, REGISTRY)
    in_flight = []
    for i in range(10_000):
        roll = rng.random()
        if roll < 0.5:
            conn.enqueue([_set_color(f"/n{rng.randrange(20)}", (i % 256, 0, 0))])
        elif roll < 0.8:
            result = conn.flush_tick()
            if result is not None:
                in_flight.append(result[0])
        elif in_flight:
            idx = rng.randrange(len(in_flight))
            conn.on_ack(in_flight.pop(idx))
        assert 0 <= conn.outstanding <= WINDOW
    assert conn.max_outstanding_seen <= WINDOW


# ---------------------------------------------------------------------------
# the convergence invariant (offline core, no sockets)


def _mirror_replay(messages) -> str:
    mirror = ClientMirror()
    for msg in messages:
        apply_message(mirror, msg)
    return canonical_state(mirror)


def _assert_buffer_keys_live(core: ServerCore):
    for key in core.global_buffer.keys():
        if key.cls in ("node_upsert", "node_prop"):
            assert key.target in {str(p) for p in core.scene_graph.nodes}, key
        elif key.cls in ("gui_add", "gui_prop", "gui_value"):
            assert int(key.target) in core.gui_registry.elements, key


@pytest.mark.slow
def test_convergence_1000_sequences_of_1000_ops():
    """replay(full S) == replay(dedup-buffer(S)), for 1000 independent
    random 1000-op sequences, checked with the real mirror semantics every
    sequence and with the naive dict oracle on a sample."""
    for sequence in range(1000):
        core = ServerCore()
        core.message_log = []
        try:
            RandomOpDriver(core, seed=20_000 + sequence).run(1000)
            log = core.message_log
            snapshot = snapshot_for_new_client(core.global_buffer)
            assert _mirror_replay(snapshot) == _mirror_replay(log), f"sequence {sequence}"
            if sequence % 20 == 0:
                assert naive_replay(log) == naive_replay(snapshot), f"sequence {sequence}"
                _assert_buffer_keys_live(core)
        finally:
            core.shutdown()


def test_per_key_last_write_wins_in_snapshot():
    core = ServerCore()
    core.message_log = []
    driver = RandomOpDriver(core, seed=777)
    try:
        driver.run(3000)
        last_by_key = {}
        for msg in core.message_log:
            mtype = REGISTRY.get(msg.type)
            if mtype.dedup != "by_key":
                continue
            last_by_key[redundancy_key(mtype, msg)] = msg
        for key, msg in {k: m for k, m in last_by_key.items()}.items():
            stored = dict(zip(core.global_buffer.keys(), core.global_buffer.messages())).get(key)
            if stored is not None:
                assert stored == msg, f"stale message stored for {key}"
    finally:
        core.shutdown()
