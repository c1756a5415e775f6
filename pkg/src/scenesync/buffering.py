"""Message buffering: keyed deduplication, ordered persistence for late
joiners, and the per-connection ack window.

Everything here is pure bookkeeping (no IO); the websocket layer in
:mod:`scenesync.transport` drives it under the server lock.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Optional

from .errors import ValidationError
from .messages import Message, MessageRegistry, MessageType
from .scenegraph import Pose

#: Maximum sent-but-unacked batches per connection.
WINDOW = 2
#: Seconds between flush ticks.
FLUSH_INTERVAL = 0.02

_NODE_CLASSES = ("node_upsert", "node_prop")
_GUI_CLASSES = ("gui_add", "gui_prop", "gui_value")


@dataclass(frozen=True)
class RedundancyKey:
    """Identity under which later messages supersede earlier ones."""

    cls: str
    target: str
    sub: Optional[str] = None


def redundancy_key(mtype: MessageType, msg: Message) -> Optional[RedundancyKey]:
    """Derive the buffer key for a message; None for dedup policy 'none'."""
    if mtype.dedup == "none":
        return None
    if mtype.key_target_field is not None:
        target = str(msg.payload[mtype.key_target_field])
    else:
        target = ""
    sub = mtype.key_sub_const
    if mtype.key_sub_field is not None:
        sub = str(msg.payload[mtype.key_sub_field])
    return RedundancyKey(mtype.key_class, target, sub)


def _path_matches(target: str, removed: str) -> bool:
    return target == removed or target.startswith(removed.rstrip("/") + "/")


class PersistentBuffer:
    """Insertion-ordered, key-deduplicated message store.

    Dedup replaces an entry in place, keeping the position of the key's
    first insertion, so parent-before-child ordering survives updates.
    Removal messages purge everything they supersede; with
    ``retain_removals`` (pending buffers feeding live clients) the removal
    itself is kept so connected mirrors hear about it, while persistent
    buffers drop it so late joiners never learn about dead state.
    """

    def __init__(self, registry: MessageRegistry, retain_removals: bool = False):
        self._registry = registry
        self._retain_removals = retain_removals
        self._entries: dict[RedundancyKey, Message] = {}
        self._synth = 0

    def __len__(self) -> int:
        return len(self._entries)

    def __bool__(self) -> bool:
        return bool(self._entries)

    def messages(self) -> list[Message]:
        return list(self._entries.values())

    def keys(self) -> list[RedundancyKey]:
        return list(self._entries.keys())

    def clear(self) -> None:
        self._entries.clear()

    def drain(self) -> list[Message]:
        out = self.messages()
        self._entries.clear()
        return out

    def apply(self, msg: Message) -> None:
        """Fold one message into the buffer per its dedup policy."""
        mtype = self._registry.get(msg.type)
        if mtype.dedup == "purge_prefix":
            self._purge(mtype, msg)
            if self._retain_removals:
                key = RedundancyKey(mtype.key_class, str(msg.payload[mtype.key_target_field]))
                self._entries[key] = msg
            return
        key = redundancy_key(mtype, msg)
        if key is None:
            self._synth += 1
            key = RedundancyKey("other", f"#{self._synth}")
        elif key.cls == "node_upsert":
            # A re-upsert resets the node's props/pose wholesale, so stale
            # per-prop entries must not replay on top of it.
            stale = [k for k in self._entries if k.cls == "node_prop" and k.target == key.target]
            for k in stale:
                del self._entries[k]
        self._entries[key] = msg

    def _purge(self, mtype: MessageType, msg: Message) -> None:
        if mtype.key_class == "node_remove_purge":
            removed = str(msg.payload["path"])
            doomed = [
                k for k in self._entries
                if k.cls in _NODE_CLASSES and _path_matches(k.target, removed)
            ]
        elif mtype.key_class == "gui_remove_purge":
            uids = {str(msg.payload["uid"])}
            uids.update(str(u) for u in msg.payload["subtree_uids"])
            doomed = [k for k in self._entries if k.cls in _GUI_CLASSES and k.target in uids]
        else:
            raise ValidationError(f"unknown purge class {mtype.key_class!r}")
        for k in doomed:
            del self._entries[k]


def snapshot_for_new_client(
    global_buffer: PersistentBuffer, overlay: Optional[PersistentBuffer] = None
) -> list[Message]:
    """Ordered message list that reconstructs current state on an empty
    mirror: global entries first, then the client's overlay entries."""
    out = global_buffer.messages()
    if overlay is not None:
        out.extend(overlay.messages())
    return out


@dataclass
class CameraState:
    """Viewpoint of one client."""

    pose: Pose = field(default_factory=Pose.identity)
    fov: float = math.pi / 3.0
    aspect: float = 16.0 / 9.0
    look_at: tuple[float, float, float] = (0.0, 0.0, 0.0)

    def __post_init__(self):
        if not 0.0 < self.fov < math.pi:
            raise ValidationError(f"fov must be in (0, pi), got {self.fov!r}")
        if not self.aspect > 0:
            raise ValidationError(f"aspect must be > 0, got {self.aspect!r}")


DEFAULT_CAMERA_POSITION = (3.0, 3.0, 3.0)


def default_camera() -> CameraState:
    return CameraState(pose=Pose(position=DEFAULT_CAMERA_POSITION))


class ConnectionState:
    """Flow-control bookkeeping for one client connection."""

    def __init__(self, client_id: int, registry: MessageRegistry):
        self.client_id = client_id
        self.pending = PersistentBuffer(registry, retain_removals=True)
        self.overlay = PersistentBuffer(registry)
        self.outstanding = 0
        self.next_seq = 1
        self.unacked: set[int] = set()
        self.camera = default_camera()
        self.camera_reported = False
        self.max_outstanding_seen = 0
        self.sent_batches = 0
        self.sent_messages = 0

    def enqueue(self, messages: Iterable[Message]) -> None:
        for msg in messages:
            self.pending.apply(msg)

    def flush_tick(self) -> Optional[tuple[int, list[Message]]]:
        """Drain pending into one batch if the ack window allows. While the
        window is full, pending keeps absorbing (and deduplicating) updates."""
        if not self.pending or self.outstanding >= WINDOW:
            return None
        seq = self.next_seq
        self.next_seq += 1
        messages = self.pending.drain()
        self.outstanding += 1
        self.max_outstanding_seen = max(self.max_outstanding_seen, self.outstanding)
        self.unacked.add(seq)
        self.sent_batches += 1
        self.sent_messages += len(messages)
        return seq, messages

    def on_ack(self, seq: int) -> bool:
        """Handle a client batch ack; unknown/duplicate seqs are tolerated."""
        if seq not in self.unacked:
            return False
        self.unacked.discard(seq)
        self.outstanding -= 1
        return True

    @property
    def idle(self) -> bool:
        return not self.pending and self.outstanding == 0
