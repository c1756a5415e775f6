"""Registry, batch codec, schema export/hash, and codegen tests.

Frames for decoder error cases are crafted with a tiny standalone encoder
(`_pack_*` below) so the checks do not depend on the production encoder.
"""

import random
import struct

import pytest

from scenesync import codegen
from scenesync.errors import CodegenError, DecodeError, SchemaError, ValidationError
from scenesync.messages import (
    BOOL,
    BYTES,
    EnumOf,
    FLOAT,
    FLOAT32_ARRAY,
    INT,
    ListOf,
    Message,
    MessageRegistry,
    MessageType,
    OptionalOf,
    STRING,
    TupleOf,
    decode_batch,
    encode_batch,
    export_schema,
    schema_hash,
)
from scenesync.protocol import REGISTRY, SCHEMA, SCHEMA_HASH


# ---------------------------------------------------------------------------
# minimal second encoder (int/str/map/array subset, assembled per the format
# spec) used to craft frames independently of scenesync.wire


def _pack_int(n: int) -> bytes:
    if 0 <= n <= 0x7F:
        return bytes([n])
    raise AssertionError("test encoder only handles small ints")


def _pack_str(s: str) -> bytes:
    raw = s.encode()
    assert len(raw) <= 31
    return bytes([0xA0 | len(raw)]) + raw


def _pack_array(items: list[bytes]) -> bytes:
    assert len(items) <= 15
    return bytes([0x90 | len(items)]) + b"".join(items)


def _pack_map(pairs: list[tuple[str, bytes]]) -> bytes:
    assert len(pairs) <= 15
    return bytes([0x80 | len(pairs)]) + b"".join(_pack_str(k) + v for k, v in pairs)


def _frame(seq: int, message_maps: list[list[tuple[str, bytes]]]) -> bytes:
    return _pack_array([_pack_int(seq), _pack_array([_pack_map(m) for m in message_maps])])


# ---------------------------------------------------------------------------
# registry behavior


def _tiny_registry() -> MessageRegistry:
    reg = MessageRegistry(version="1")
    reg.register(
        MessageType(
            "ping",
            (("label", STRING), ("count", INT), ("extra", OptionalOf(FLOAT))),
        )
    )
    return reg


def test_duplicate_type_name_rejected():
    reg = _tiny_registry()
    with pytest.raises(SchemaError, match="duplicate"):
        reg.register(MessageType("ping", ()))


def test_frozen_registry_rejects_registration():
    reg = _tiny_registry().freeze()
    with pytest.raises(SchemaError, match="frozen"):
        reg.register(MessageType("pong", ()))


def test_unknown_type_lookup():
    with pytest.raises(SchemaError, match="nope"):
        _tiny_registry().get("nope")


def test_payload_validation():
    reg = _tiny_registry()
    msg = reg.make("ping", label="x", count=2)
    assert msg.payload == {"label": "x", "count": 2, "extra": None}
    with pytest.raises(ValidationError, match="missing required"):
        reg.make("ping", label="x")
    with pytest.raises(ValidationError, match="unexpected"):
        reg.make("ping", label="x", count=1, bogus=3)
    with pytest.raises(ValidationError, match="expected int"):
        reg.make("ping", label="x", count="two")


def test_field_type_validators():
    assert FLOAT.validate(3, "f") == 3.0
    assert isinstance(FLOAT.validate(3, "f"), float)
    assert TupleOf(FLOAT, 3).validate([1, 2, 3], "t") == (1.0, 2.0, 3.0)
    assert ListOf(STRING).validate(("a", "b"), "l") == ["a", "b"]
    assert OptionalOf(INT).validate(None, "o") is None
    assert EnumOf("xy", "yz").validate("xy", "e") == "xy"
    with pytest.raises(ValidationError):
        EnumOf("xy", "yz").validate("zz", "e")
    with pytest.raises(ValidationError):
        BOOL.validate(1, "b")
    with pytest.raises(ValidationError):
        INT.validate(True, "i")
    with pytest.raises(ValidationError):
        INT.validate(1 << 63, "i")
    with pytest.raises(ValidationError):
        FLOAT32_ARRAY.validate(b"\x00\x01\x02", "a")
    assert BYTES.validate(bytearray(b"xy"), "b") == b"xy"


# ---------------------------------------------------------------------------
# batch codec


def test_empty_batch_roundtrip():
    frame = encode_batch(REGISTRY, [], seq=0)
    assert decode_batch(REGISTRY, frame) == (0, [])


def test_single_message_identity():
    msg = REGISTRY.make("scene_remove", path="/box")
    frame = encode_batch(REGISTRY, [msg], seq=3)
    seq, decoded = decode_batch(REGISTRY, frame)
    assert seq == 3
    assert decoded == [msg]


def _random_message(rng: random.Random) -> Message:
    choices = [
        lambda: REGISTRY.make(
            "scene_upsert_box",
            path="/" + rng.choice("abcd"),
            wxyz=(1.0, 0.0, 0.0, 0.0),
            position=(rng.uniform(-5, 5), rng.uniform(-5, 5), rng.uniform(-5, 5)),
            visible=rng.random() < 0.5,
            clickable=False,
            dimensions=(rng.uniform(0.1, 2), rng.uniform(0.1, 2), rng.uniform(0.1, 2)),
            color=(rng.randrange(256), rng.randrange(256), rng.randrange(256)),
        ),
        lambda: REGISTRY.make(
            "scene_upsert_point_cloud",
            path="/pc",
            wxyz=(0.0, 1.0, 0.0, 0.0),
            position=(0.0, 0.0, 0.0),
            visible=True,
            clickable=False,
            positions=struct.pack("<6f", *(rng.uniform(-1, 1) for _ in range(6))),
            colors=bytes(rng.randrange(256) for _ in range(6)),
            point_size=rng.uniform(0.001, 0.1),
        ),
        lambda: REGISTRY.make(
            "gui_add_slider",
            uid=rng.randrange(1, 1000),
            container_uid=0,
            order=rng.randrange(100),
            label=rng.choice(["a", "value", "речь", "x y"]),
            min=0.0, max=100.0, step=1.0,
            disabled=False, visible=True,
            value=float(rng.randrange(101)),
        ),
        lambda: REGISTRY.make(
            "gui_add_dropdown",
            uid=rng.randrange(1, 1000), container_uid=0, order=0,
            label="opts", options=["a", "b", "c"], disabled=False, visible=True, value="b",
        ),
        lambda: REGISTRY.make(
            "gui_add_button",
            uid=rng.randrange(1, 1000), container_uid=0, order=0,
            label="btn", color=None if rng.random() < 0.5 else (1, 2, 3),
            disabled=False, visible=True, value=rng.randrange(5),
        ),
        lambda: REGISTRY.make("ack", seq=rng.randrange(1 << 40)),
        lambda: REGISTRY.make(
            "scene_set_float_prop", path="/x", name="point_size", value=rng.uniform(0, 10)
        ),
        lambda: REGISTRY.make(
            "camera_set",
            wxyz=(1.0, 0.0, 0.0, 0.0), position=(1.0, 2.0, 3.0),
            fov=rng.uniform(0.1, 3.0), aspect=rng.uniform(0.2, 4.0),
            look_at=(0.0, 0.0, 0.0),
        ),
        lambda: REGISTRY.make(
            "scene_upsert_grid",
            path="/g", wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
            visible=True, clickable=False,
            width=10.0, height=10.0, cell_size=0.5,
            plane=rng.choice(["xy", "yz", "xz"]),
            color=(200, 200, 200),
        ),
    ]
    return rng.choice(choices)()


def test_randomized_roundtrip_10k():
    rng = random.Random(12345)
    messages = [_random_message(rng) for _ in range(10_000)]
    for start in range(0, len(messages), 500):
        chunk = messages[start : start + 500]
        seq, decoded = decode_batch(REGISTRY, encode_batch(REGISTRY, chunk, seq=start + 1))
        assert seq == start + 1
        assert len(decoded) == len(chunk)
        for original, round_tripped in zip(chunk, decoded):
            assert round_tripped.type == original.type
            assert round_tripped.payload == original.payload


def test_truncated_frame_fails_closed():
    frame = encode_batch(REGISTRY, [REGISTRY.make("scene_remove", path="/box")], seq=1)
    for cut in (1, len(frame) // 2, len(frame) - 1):
        with pytest.raises(DecodeError):
            decode_batch(REGISTRY, frame[:cut])


def test_unknown_type_named_in_error():
    frame = _frame(0, [[("type", _pack_str("mystery_message"))]])
    with pytest.raises(SchemaError, match="mystery_message"):
        decode_batch(REGISTRY, frame)


def test_unknown_optional_fields_ignored():
    frame = _frame(
        0,
        [[
            ("type", _pack_str("ack")),
            ("seq", _pack_int(9)),
            ("future_field", _pack_int(1)),
        ]],
    )
    seq, messages = decode_batch(REGISTRY, frame)
    assert messages[0].payload == {"seq": 9}


def test_missing_required_field_rejected():
    frame = _frame(0, [[("type", _pack_str("ack"))]])
    with pytest.raises(ValidationError, match="missing required"):
        decode_batch(REGISTRY, frame)


def test_envelope_shape_enforced():
    import scenesync.wire as wire

    with pytest.raises(DecodeError):
        decode_batch(REGISTRY, wire.encode([1, [], "extra"]))
    with pytest.raises(DecodeError):
        decode_batch(REGISTRY, wire.encode({"seq": 1}))
    with pytest.raises(DecodeError):
        decode_batch(REGISTRY, wire.encode([-1, []]))
    with pytest.raises(DecodeError):
        decode_batch(REGISTRY, wire.encode([0, ["not a map"]]))


def test_message_without_type_field():
    frame = _frame(0, [[("seq", _pack_int(1))]])
    with pytest.raises(DecodeError, match="type"):
        decode_batch(REGISTRY, frame)


# ---------------------------------------------------------------------------
# schema export, hash, codegen


def test_export_schema_lists_all_types_in_order():
    doc = export_schema(REGISTRY)
    assert len(doc.types) == len(REGISTRY.types())
    assert [d["name"] for d in doc.types] == [t.name for t in REGISTRY.types()]


def test_export_single_type_registry():
    reg = _tiny_registry()
    doc = export_schema(reg)
    assert len(doc.types) == 1
    assert doc.types[0]["name"] == "ping"
    assert doc.types[0]["fields"] == [
        ["label", "string"], ["count", "int"], ["extra", "optional<float>"],
    ]


def test_schema_document_deterministic():
    a = export_schema(REGISTRY).to_json_bytes()
    b = export_schema(REGISTRY).to_json_bytes()
    assert a == b


def test_schema_hash_format_and_stability():
    doc = export_schema(REGISTRY)
    h = schema_hash(doc)
    assert h == SCHEMA_HASH
    assert len(h) == 64
    assert all(c in "0123456789abcdef" for c in h)
    assert schema_hash(export_schema(REGISTRY)) == h


def test_schema_hash_sensitive_to_rename_and_retype():
    def build(field_name: str, field_type) -> str:
        reg = MessageRegistry(version="1")
        reg.register(MessageType("t", ((field_name, field_type),)))
        return schema_hash(export_schema(reg))

    base = build("count", INT)
    assert build("total", INT) != base  # rename
    assert build("count", FLOAT) != base  # retype

    def build_dedup(policy, key_class):
        reg = MessageRegistry(version="1")
        reg.register(
            MessageType("t", (("count", INT),), dedup=policy, key_class=key_class,
                        key_target_field="count")
        )
        return schema_hash(export_schema(reg))

    assert build_dedup("by_key", "other") != base  # dedup policy is hashed


def test_codegen_deterministic_and_complete():
    src1 = codegen.generate_client_declarations(SCHEMA)
    src2 = codegen.generate_client_declarations(SCHEMA)
    assert src1 == src2
    assert f'SCHEMA_HASH = "{SCHEMA_HASH}"' in src1
    for mtype in REGISTRY.types():
        assert f'"{mtype.name}"' in src1


def test_codegen_empty_registry_has_only_constants():
    reg = MessageRegistry(version="1")
    src = codegen.generate_client_declarations(export_schema(reg))
    assert "SCHEMA_HASH" in src
    assert "interface" not in src


def test_codegen_declaration_lists_fields():
    reg = _tiny_registry()
    src = codegen.generate_client_declarations(export_schema(reg))
    assert "export interface Ping {" in src
    assert "label: string;" in src
    assert "count: number;" in src
    assert "extra?: number | null;" in src


def test_codegen_type_mapping():
    reg = MessageRegistry(version="1")
    reg.register(
        MessageType(
            "kitchen_sink",
            (
                ("flag", BOOL),
                ("blob", BYTES),
                ("floats", FLOAT32_ARRAY),
                ("trio", TupleOf(FLOAT, 3)),
                ("names", ListOf(STRING)),
                ("plane", EnumOf("xy", "yz")),
            ),
        )
    )
    src = codegen.generate_client_declarations(export_schema(reg))
    assert "flag: boolean;" in src
    assert "blob: Uint8Array;" in src
    assert "floats: Float32Array;" in src
    assert "trio: [number, number, number];" in src
    assert "names: string[];" in src
    assert 'plane: "xy" | "yz";' in src
    assert 'kitchen_sink: ["floats"],' in src


def test_codegen_unmappable_type():
    from scenesync.messages import SchemaDocument

    doc = SchemaDocument(version="1", types=({"name": "t", "fields": [["x", "complex128"]], "dedup": "none"},))
    with pytest.raises(CodegenError, match="complex128"):
        codegen.generate_client_declarations(doc)
