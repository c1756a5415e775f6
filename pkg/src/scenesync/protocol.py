"""The concrete wire protocol: every message type the system exchanges.

Built once at import time from the scene/GUI kind tables so the wire schema
can never drift from the state machines. The registry is frozen afterwards;
`REGISTRY`, `SCHEMA` and `SCHEMA_HASH` are process-wide constants.
"""

from __future__ import annotations

from .guicore import GUI_KINDS, GUI_VALUE_TYPES
from .messages import (
    BOOL,
    FLOAT,
    INT,
    ListOf,
    MessageRegistry,
    MessageType,
    OptionalOf,
    STRING,
    TupleOf,
    export_schema,
    schema_hash,
)
from .scenegraph import NODE_KINDS

QUAT = TupleOf(FLOAT, 4)
VEC3 = TupleOf(FLOAT, 3)
VEC2 = TupleOf(FLOAT, 2)

# Redundancy-key classes (see transport buffering).
NODE_UPSERT = "node_upsert"
NODE_PROP = "node_prop"
NODE_REMOVE_PURGE = "node_remove_purge"
GUI_ADD = "gui_add"
GUI_PROP = "gui_prop"
GUI_VALUE = "gui_value"
GUI_REMOVE_PURGE = "gui_remove_purge"
CAMERA_SET = "camera_set"

_CAMERA_FIELDS = (
    ("wxyz", QUAT),
    ("position", VEC3),
    ("fov", FLOAT),
    ("aspect", FLOAT),
    ("look_at", VEC3),
)

# Maps a scene prop's wire type to the typed setter message that carries it.
_SCENE_PROP_SETTERS = (
    ("scene_set_bool_prop", BOOL),
    ("scene_set_int_prop", INT),
    ("scene_set_float_prop", FLOAT),
    ("scene_set_string_prop", STRING),
    ("scene_set_color_prop", TupleOf(INT, 3)),
    ("scene_set_vec3_prop", VEC3),
    ("scene_set_bytes_prop", None),  # bytes and float32 arrays
)

# Optional wrappers let nullable props (button color, number bounds) clear.
_GUI_PROP_SETTERS = (
    ("gui_set_bool_prop", BOOL),
    ("gui_set_float_prop", OptionalOf(FLOAT)),
    ("gui_set_string_prop", STRING),
    ("gui_set_string_list_prop", ListOf(STRING)),
    ("gui_set_color_prop", OptionalOf(TupleOf(INT, 3))),
)

_GUI_VALUE_SETTERS = (
    ("gui_set_bool_value", BOOL),
    ("gui_set_int_value", INT),
    ("gui_set_float_value", FLOAT),
    ("gui_set_string_value", STRING),
    ("gui_set_color_value", TupleOf(INT, 3)),
    ("gui_set_vector3_value", VEC3),
)

_GUI_CLIENT_UPDATES = (
    ("gui_client_bool", BOOL),
    ("gui_client_float", FLOAT),
    ("gui_client_string", STRING),
    ("gui_client_color", TupleOf(INT, 3)),
    ("gui_client_vector3", VEC3),
)


def _build_registry() -> MessageRegistry:
    reg = MessageRegistry(version="1")

    def add(name, fields, dedup="none", key_class=None, target=None, sub_field=None, sub=None):
        reg.register(
            MessageType(
                name=name,
                fields=tuple(fields),
                dedup=dedup,
                key_class=key_class,
                key_target_field=target,
                key_sub_field=sub_field,
                key_sub_const=sub,
            )
        )

    # -- scene state
    for kind, props in NODE_KINDS.items():
        fields = [
            ("path", STRING),
            ("wxyz", QUAT),
            ("position", VEC3),
            ("visible", BOOL),
            ("clickable", BOOL),
        ]
        fields += [(pname, spec.wire_type) for pname, spec in props.items()]
        add(
            f"scene_upsert_{kind}",
            fields,
            dedup="by_key",
            key_class=NODE_UPSERT,
            target="path",
        )

    add(
        "scene_set_pose",
        [("path", STRING), ("wxyz", QUAT), ("position", VEC3)],
        dedup="by_key", key_class=NODE_PROP, target="path", sub="pose",
    )
    add(
        "scene_set_visible",
        [("path", STRING), ("visible", BOOL)],
        dedup="by_key", key_class=NODE_PROP, target="path", sub="visible",
    )
    add(
        "scene_set_clickable",
        [("path", STRING), ("clickable", BOOL)],
        dedup="by_key", key_class=NODE_PROP, target="path", sub="clickable",
    )
    from .messages import BYTES  # local import keeps the top import list short

    for name, vtype in _SCENE_PROP_SETTERS:
        add(
            name,
            [("path", STRING), ("name", STRING), ("value", vtype if vtype is not None else BYTES)],
            dedup="by_key", key_class=NODE_PROP, target="path", sub_field="name",
        )
    add(
        "scene_remove",
        [("path", STRING)],
        dedup="purge_prefix", key_class=NODE_REMOVE_PURGE, target="path",
    )

    # -- gui state
    for kind, props in GUI_KINDS.items():
        fields = [("uid", INT), ("container_uid", INT), ("order", INT)]
        fields += [(pname, spec.wire_type) for pname, spec in props.items()]
        if kind in GUI_VALUE_TYPES:
            fields.append(("value", GUI_VALUE_TYPES[kind]))
        add(
            f"gui_add_{kind}",
            fields,
            dedup="by_key", key_class=GUI_ADD, target="uid",
        )
    for name, vtype in _GUI_PROP_SETTERS:
        add(
            name,
            [("uid", INT), ("name", STRING), ("value", vtype)],
            dedup="by_key", key_class=GUI_PROP, target="uid", sub_field="name",
        )
    for name, vtype in _GUI_VALUE_SETTERS:
        add(
            name,
            [("uid", INT), ("value", vtype)],
            dedup="by_key", key_class=GUI_VALUE, target="uid",
        )
    add(
        "gui_remove",
        [("uid", INT), ("subtree_uids", ListOf(INT))],
        dedup="purge_prefix", key_class=GUI_REMOVE_PURGE, target="uid",
    )

    # -- camera
    add(
        "camera_set",
        list(_CAMERA_FIELDS),
        dedup="by_key", key_class=CAMERA_SET, target=None, sub="camera",
    )
    add("camera_report", list(_CAMERA_FIELDS))

    # -- connection control
    add("client_hello", [("schema_hash", STRING)])
    add("handshake_accept", [("client_id", INT)])
    add(
        "handshake_reject",
        [("reason", STRING), ("server_schema_hash", STRING), ("client_schema_hash", STRING)],
    )
    add("ack", [("seq", INT)])

    # -- client interaction
    for name, vtype in _GUI_CLIENT_UPDATES:
        add(name, [("uid", INT), ("value", vtype)])
    add("gui_client_click", [("uid", INT)])
    add(
        "scene_click",
        [
            ("path", STRING),
            ("ray_origin", VEC3),
            ("ray_direction", VEC3),
            ("screen_pos", VEC2),
        ],
    )

    return reg.freeze()


REGISTRY = _build_registry()
SCHEMA = export_schema(REGISTRY)
SCHEMA_HASH = schema_hash(SCHEMA)

# Which typed setter message carries a given scene prop, by wire type spec.
_SPEC_TO_SCENE_SETTER = {
    "bool": "scene_set_bool_prop",
    "int": "scene_set_int_prop",
    "float": "scene_set_float_prop",
    "string": "scene_set_string_prop",
    "tuple<int,3>": "scene_set_color_prop",
    "tuple<float,3>": "scene_set_vec3_prop",
    "bytes": "scene_set_bytes_prop",
    "float32_array": "scene_set_bytes_prop",
    "enum<xy|yz|xz>": "scene_set_string_prop",
}

_SPEC_TO_GUI_PROP_SETTER = {
    "bool": "gui_set_bool_prop",
    "float": "gui_set_float_prop",
    "string": "gui_set_string_prop",
    "list<string>": "gui_set_string_list_prop",
    "tuple<int,3>": "gui_set_color_prop",
    "optional<tuple<int,3>>": "gui_set_color_prop",
    "optional<float>": "gui_set_float_prop",
}

_GUI_VALUE_SETTER_BY_KIND = {
    "button": "gui_set_int_value",
    "checkbox": "gui_set_bool_value",
    "slider": "gui_set_float_value",
    "number": "gui_set_float_value",
    "text": "gui_set_string_value",
    "dropdown": "gui_set_string_value",
    "rgb": "gui_set_color_value",
    "vector3": "gui_set_vector3_value",
}

_GUI_CLIENT_UPDATE_BY_KIND = {
    "checkbox": "gui_client_bool",
    "slider": "gui_client_float",
    "number": "gui_client_float",
    "text": "gui_client_string",
    "dropdown": "gui_client_string",
    "rgb": "gui_client_color",
    "vector3": "gui_client_vector3",
}


def scene_prop_setter(kind: str, prop: str) -> str:
    """Message type name that carries updates to a given scene prop."""
    spec = NODE_KINDS[kind][prop].wire_type.spec()
    return _SPEC_TO_SCENE_SETTER[spec]


def gui_prop_setter(kind: str, prop: str) -> str:
    spec = GUI_KINDS[kind][prop].wire_type.spec()
    return _SPEC_TO_GUI_PROP_SETTER[spec]


def gui_value_setter(kind: str) -> str:
    return _GUI_VALUE_SETTER_BY_KIND[kind]


def gui_client_update_type(kind: str) -> str:
    return _GUI_CLIENT_UPDATE_BY_KIND[kind]
