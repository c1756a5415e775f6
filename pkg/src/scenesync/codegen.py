"""TypeScript declaration generator for the wire schema.

The generated file is committed in the web client and checked in CI with
`scenesync gen-schema --check`; the embedded schema hash is what the client
presents during the connection handshake.
"""

from __future__ import annotations

import re

from .errors import CodegenError
from .messages import SchemaDocument, schema_hash

_HEADER = "// Generated by `scenesync gen-schema`. Do not edit by hand.\n"

_SCALAR_TS = {
    "bool": "boolean",
    "int": "number",
    "float": "number",
    "string": "string",
    "bytes": "Uint8Array",
    "float32_array": "Float32Array",
}


def _pascal(name: str) -> str:
    return "".join(part.capitalize() for part in name.split("_"))


def _split_args(inner: str) -> list[str]:
    """Split a composite spec's argument list at top-level commas."""
    parts, depth, start = [], 0, 0
    for i, ch in enumerate(inner):
        if ch == "<":
            depth += 1
        elif ch == ">":
            depth -= 1
        elif ch == "," and depth == 0:
            parts.append(inner[start:i])
            start = i + 1
    parts.append(inner[start:])
    return parts


def _ts_type(spec: str) -> str:
    """Map a schema field-type spec string to a TypeScript type."""
    if spec in _SCALAR_TS:
        return _SCALAR_TS[spec]
    m = re.fullmatch(r"(tuple|list|optional|enum)<(.*)>", spec)
    if not m:
        raise CodegenError(f"unmappable field type {spec!r}")
    head, inner = m.group(1), m.group(2)
    if head == "tuple":
        item_spec, length = _split_args(inner)
        item = _ts_type(item_spec)
        return "[" + ", ".join([item] * int(length)) + "]"
    if head == "list":
        return f"{_ts_type(inner)}[]"
    if head == "optional":
        return f"{_ts_type(inner)} | null"
    if head == "enum":
        return " | ".join(f'"{opt}"' for opt in inner.split("|"))
    raise CodegenError(f"unmappable field type {spec!r}")


def _is_optional(spec: str) -> bool:
    return spec.startswith("optional<")


def _float32_fields(descriptor: dict) -> list[str]:
    return [name for name, spec in descriptor["fields"] if spec == "float32_array"]


def generate_client_declarations(doc: SchemaDocument) -> str:
    """Emit one interface per message type plus the schema-hash constant.
    Output is a pure function of the document."""
    lines = [_HEADER]
    lines.append(f'export const SCHEMA_VERSION = "{doc.version}";')
    lines.append(f'export const SCHEMA_HASH = "{schema_hash(doc)}";')
    lines.append("")

    names = []
    for descriptor in doc.types:
        ts_name = _pascal(descriptor["name"])
        names.append(ts_name)
        lines.append(f"export interface {ts_name} {{")
        lines.append(f'  type: "{descriptor["name"]}";')
        for fname, spec in descriptor["fields"]:
            opt = "?" if _is_optional(spec) else ""
            lines.append(f"  {fname}{opt}: {_ts_type(spec)};")
        lines.append("}")
        lines.append("")

    if names:
        lines.append("export type AnyMessage =")
        for i, ts_name in enumerate(names):
            sep = ";" if i == len(names) - 1 else ""
            lines.append(f"  | {ts_name}{sep}")
        lines.append("")

    lines.append("export const MESSAGE_TYPES: readonly string[] = [")
    for descriptor in doc.types:
        lines.append(f'  "{descriptor["name"]}",')
    lines.append("];")
    lines.append("")

    lines.append("// Fields that decode from raw little-endian bytes to Float32Array.")
    lines.append("export const FLOAT32_ARRAY_FIELDS: Readonly<Record<string, readonly string[]>> = {")
    for descriptor in doc.types:
        f32 = _float32_fields(descriptor)
        if f32:
            quoted = ", ".join(f'"{name}"' for name in f32)
            lines.append(f'  {descriptor["name"]}: [{quoted}],')
    lines.append("};")
    return "\n".join(lines) + "\n"
