"""Message type registry, payload validation, and the batch codec.

Every wire message is an instance of a registered :class:`MessageType`. The
registry is built once at import time (see :mod:`scenesync.protocol`) and
frozen; it is the single source of truth for payload validation, the
exported schema document, and the generated client declarations.
"""

from __future__ import annotations

import hashlib
import json
import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Mapping, Optional, Union

from . import wire
from .errors import DecodeError, SchemaError, ValidationError

_INT64_MIN = -(1 << 63)
_INT64_MAX = (1 << 63) - 1


# ---------------------------------------------------------------------------
# Field types


class FieldType:
    """Base class for the closed set of wire field types."""

    def spec(self) -> str:
        raise NotImplementedError

    def validate(self, value: Any, where: str) -> Any:
        """Check `value` and return its normalized form."""
        raise NotImplementedError

    def __repr__(self) -> str:
        return self.spec()


class _Scalar(FieldType):
    __slots__ = ("kind",)

    def __init__(self, kind: str):
        self.kind = kind

    def spec(self) -> str:
        return self.kind

    def validate(self, value: Any, where: str) -> Any:
        kind = self.kind
        if kind == "bool":
            if not isinstance(value, bool):
                raise ValidationError(f"{where}: expected bool, got {type(value).__name__}")
            return value
        if kind == "int":
            if isinstance(value, bool) or not isinstance(value, int):
                raise ValidationError(f"{where}: expected int, got {type(value).__name__}")
            if not _INT64_MIN <= value <= _INT64_MAX:
                raise ValidationError(f"{where}: int out of 64-bit signed range")
            return value
        if kind == "float":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ValidationError(f"{where}: expected float, got {type(value).__name__}")
            return float(value)
        if kind == "string":
            if not isinstance(value, str):
                raise ValidationError(f"{where}: expected str, got {type(value).__name__}")
            return value
        if kind == "bytes":
            if not isinstance(value, (bytes, bytearray, memoryview)):
                raise ValidationError(f"{where}: expected bytes, got {type(value).__name__}")
            return bytes(value)
        if kind == "float32_array":
            if not isinstance(value, (bytes, bytearray, memoryview)):
                raise ValidationError(f"{where}: expected float32 bytes, got {type(value).__name__}")
            data = bytes(value)
            if len(data) % 4 != 0:
                raise ValidationError(f"{where}: float32 array byte length {len(data)} not a multiple of 4")
            return data
        raise AssertionError(f"unknown scalar kind {kind}")


BOOL = _Scalar("bool")
INT = _Scalar("int")
FLOAT = _Scalar("float")
STRING = _Scalar("string")
BYTES = _Scalar("bytes")
FLOAT32_ARRAY = _Scalar("float32_array")


class TupleOf(FieldType):
    __slots__ = ("item", "length")

    def __init__(self, item: FieldType, length: int):
        self.item = item
        self.length = length

    def spec(self) -> str:
        return f"tuple<{self.item.spec()},{self.length}>"

    def validate(self, value: Any, where: str) -> tuple:
        if not isinstance(value, (tuple, list)):
            raise ValidationError(f"{where}: expected a {self.length}-tuple, got {type(value).__name__}")
        if len(value) != self.length:
            raise ValidationError(f"{where}: expected {self.length} items, got {len(value)}")
        return tuple(self.item.validate(v, f"{where}[{i}]") for i, v in enumerate(value))


class ListOf(FieldType):
    __slots__ = ("item",)

    def __init__(self, item: FieldType):
        self.item = item

    def spec(self) -> str:
        return f"list<{self.item.spec()}>"

    def validate(self, value: Any, where: str) -> list:
        if not isinstance(value, (list, tuple)):
            raise ValidationError(f"{where}: expected a list, got {type(value).__name__}")
        return [self.item.validate(v, f"{where}[{i}]") for i, v in enumerate(value)]


class OptionalOf(FieldType):
    __slots__ = ("item",)

    def __init__(self, item: FieldType):
        self.item = item

    def spec(self) -> str:
        return f"optional<{self.item.spec()}>"

    def validate(self, value: Any, where: str) -> Any:
        if value is None:
            return None
        return self.item.validate(value, where)


class EnumOf(FieldType):
    __slots__ = ("options",)

    def __init__(self, *options: str):
        if not options:
            raise SchemaError("enum needs at least one option")
        self.options = tuple(options)

    def spec(self) -> str:
        return "enum<" + "|".join(self.options) + ">"

    def validate(self, value: Any, where: str) -> str:
        if not isinstance(value, str):
            raise ValidationError(f"{where}: expected str enum, got {type(value).__name__}")
        if value not in self.options:
            raise ValidationError(f"{where}: {value!r} not one of {self.options}")
        return value


# ---------------------------------------------------------------------------
# Message types and messages

DEDUP_POLICIES = ("none", "by_key", "purge_prefix")


@dataclass(frozen=True)
class MessageType:
    """Schema for one wire message.

    Redundancy-key metadata (`key_*`) drives buffer deduplication; it is a
    server-side concern and is not part of the exported schema hash except
    for `dedup`, which changes client-visible replay behavior.
    """

    name: str
    fields: tuple[tuple[str, FieldType], ...]
    dedup: str = "none"
    key_class: Optional[str] = None
    key_target_field: Optional[str] = None
    key_sub_field: Optional[str] = None
    key_sub_const: Optional[str] = None

    def __post_init__(self):
        if self.dedup not in DEDUP_POLICIES:
            raise SchemaError(f"{self.name}: unknown dedup policy {self.dedup!r}")
        if self.dedup != "none" and self.key_class is None:
            raise SchemaError(f"{self.name}: dedup policy {self.dedup} requires a key class")
        names = [n for n, _ in self.fields]
        if len(set(names)) != len(names):
            raise SchemaError(f"{self.name}: duplicate field names")
        if "type" in names:
            raise SchemaError(f"{self.name}: 'type' is a reserved field name")

    def validate_payload(self, payload: Mapping[str, Any]) -> dict[str, Any]:
        """Return a normalized payload dict in schema field order."""
        out: dict[str, Any] = {}
        for name, ftype in self.fields:
            if name in payload:
                out[name] = ftype.validate(payload[name], f"{self.name}.{name}")
            elif isinstance(ftype, OptionalOf):
                out[name] = None
            else:
                raise ValidationError(f"{self.name}: missing required field {name!r}")
        extra = set(payload) - {n for n, _ in self.fields}
        if extra:
            raise ValidationError(f"{self.name}: unexpected fields {sorted(extra)}")
        return out


#: Message delivery scope: None = broadcast, int = a single client id.
Scope = Optional[int]


@dataclass(frozen=True)
class Message:
    """A typed payload; the unit of synchronization.

    `scope` is routing metadata that never crosses the wire; it is excluded
    from equality so round-trip comparisons work field-by-field.
    """

    type: str
    payload: dict[str, Any]
    scope: Scope = field(default=None, compare=False)

    def __repr__(self) -> str:
        keys = ", ".join(self.payload)
        return f"Message({self.type}: {keys})"


class MessageRegistry:
    """Ordered, freezable collection of message types."""

    def __init__(self, version: str = "1"):
        self.version = version
        self._types: dict[str, MessageType] = {}
        self._frozen = False

    def register(self, mtype: MessageType) -> MessageType:
        if self._frozen:
            raise SchemaError("registry is frozen; message types are fixed at build time")
        if mtype.name in self._types:
            raise SchemaError(f"duplicate message type name {mtype.name!r}")
        self._types[mtype.name] = mtype
        return mtype

    def freeze(self) -> "MessageRegistry":
        self._frozen = True
        return self

    def get(self, name: str) -> MessageType:
        try:
            return self._types[name]
        except KeyError:
            raise SchemaError(f"unknown message type {name!r}") from None

    def __contains__(self, name: str) -> bool:
        return name in self._types

    def types(self) -> tuple[MessageType, ...]:
        return tuple(self._types.values())

    def make(self, type_name: str, /, scope: Scope = None, **fields: Any) -> Message:
        """Build a validated message. `type_name` is positional-only so that
        payload fields named `name` pass through **fields cleanly."""
        mtype = self.get(type_name)
        return Message(type_name, mtype.validate_payload(fields), scope)


# ---------------------------------------------------------------------------
# Batch codec

def encode_batch(registry: MessageRegistry, messages: Iterable[Message], seq: int = 0) -> bytes:
    """Encode an ordered message list into one self-describing binary frame.

    The frame is a MessagePack 2-array ``[seq, messages]``; each message is
    a string-keyed map carrying ``type`` plus its payload fields. Optional
    fields that are None are omitted.
    """
    if seq < 0:
        raise ValidationError("batch seq must be non-negative")
    encoded = []
    for msg in messages:
        mtype = registry.get(msg.type)
        payload = mtype.validate_payload(msg.payload)
        body: dict[str, Any] = {"type": msg.type}
        for name, _ in mtype.fields:
            value = payload[name]
            if value is not None:
                body[name] = value
        encoded.append(body)
    return wire.encode([seq, encoded])


def decode_batch(registry: MessageRegistry, frame: bytes) -> tuple[int, list[Message]]:
    """Decode a frame into (seq, messages). Fail-closed: any error yields no
    messages at all. Unknown fields in a message map are ignored."""
    top = wire.decode(frame)
    if not isinstance(top, list) or len(top) != 2:
        raise DecodeError("frame is not a [seq, messages] envelope", 0)
    seq, raw_messages = top
    if isinstance(seq, bool) or not isinstance(seq, int) or seq < 0:
        raise DecodeError("batch seq is not a non-negative integer", 0)
    if not isinstance(raw_messages, list):
        raise DecodeError("batch message list is malformed", 0)
    messages = []
    for raw in raw_messages:
        if not isinstance(raw, dict):
            raise DecodeError("batch entry is not a map", 0)
        name = raw.get("type")
        if not isinstance(name, str):
            raise DecodeError("message has no 'type' string field", 0)
        if name not in registry:
            raise SchemaError(f"unknown message type {name!r}")
        mtype = registry.get(name)
        known = {k: v for k, v in raw.items() if k != "type" and any(k == n for n, _ in mtype.fields)}
        messages.append(Message(name, mtype.validate_payload(known)))
    return seq, messages


# ---------------------------------------------------------------------------
# Schema export

@dataclass(frozen=True)
class SchemaDocument:
    """Deterministic description of a registry, used for hashing and codegen."""

    version: str
    types: tuple[dict[str, Any], ...]

    def to_json_bytes(self) -> bytes:
        doc = {
            "version": self.version,
            "types": list(self.types),
        }
        return json.dumps(doc, separators=(",", ":"), ensure_ascii=True).encode("ascii")


def export_schema(registry: MessageRegistry) -> SchemaDocument:
    """Export all message types, in registration order."""
    types = tuple(
        {
            "name": mtype.name,
            "fields": [[fname, ftype.spec()] for fname, ftype in mtype.fields],
            "dedup": mtype.dedup,
        }
        for mtype in registry.types()
    )
    return SchemaDocument(version=registry.version, types=types)


def schema_hash(doc: SchemaDocument) -> str:
    """SHA-256 of the canonical document bytes, as 64 hex characters."""
    return hashlib.sha256(doc.to_json_bytes()).hexdigest()
