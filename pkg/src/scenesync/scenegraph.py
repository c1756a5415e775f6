"""Path-addressed scene graph with hierarchical transforms.

Pure state machine: no networking. The server mutates one instance as the
authoritative state; every connected client mirror runs the same class fed
by wire messages, which is what makes byte-exact convergence checks
possible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Iterator, Optional

import numpy as np

from .errors import PathError, UnknownPathError, ValidationError
from .messages import (
    BOOL,
    BYTES,
    EnumOf,
    FLOAT,
    FLOAT32_ARRAY,
    FieldType,
    INT,
    STRING,
    TupleOf,
)

# ---------------------------------------------------------------------------
# Paths


@dataclass(frozen=True, order=True)
class ScenePath:
    """Canonical slash-separated node address; the scene graph's primary key."""

    segments: tuple[str, ...]

    def __str__(self) -> str:
        return "/" + "/".join(self.segments)

    @property
    def is_root(self) -> bool:
        return not self.segments

    def parent(self) -> "ScenePath":
        if self.is_root:
            raise PathError("root path has no parent")
        return ScenePath(self.segments[:-1])

    def ancestors(self) -> Iterator["ScenePath"]:
        """Root-first proper ancestors."""
        for i in range(len(self.segments)):
            yield ScenePath(self.segments[:i])

    def is_ancestor_of(self, other: "ScenePath") -> bool:
        n = len(self.segments)
        return len(other.segments) > n and other.segments[:n] == self.segments


ROOT = ScenePath(())


def parse_path(raw: str) -> ScenePath:
    """Parse a raw path string into canonical form. Idempotent on canonical
    input; rejects empty strings, missing leading "/", empty segments, and
    whitespace inside segments."""
    if not isinstance(raw, str):
        raise PathError(f"path must be a string, got {type(raw).__name__}")
    if raw == "":
        raise PathError("path is empty")
    if not raw.startswith("/"):
        raise PathError(f"path {raw!r} must start with '/'")
    if raw == "/":
        return ROOT
    segments = raw[1:].split("/")
    for seg in segments:
        if seg == "":
            raise PathError(f"path {raw!r} contains an empty segment")
        if any(ch.isspace() for ch in seg):
            raise PathError(f"path segment {seg!r} contains whitespace")
    return ScenePath(tuple(segments))


def as_path(path: "ScenePath | str") -> ScenePath:
    return path if isinstance(path, ScenePath) else parse_path(path)


# ---------------------------------------------------------------------------
# Poses

_QUAT_DEGENERATE = 1e-8


def _check_finite(values, where: str) -> None:
    for v in values:
        if not math.isfinite(v):
            raise ValidationError(f"{where}: non-finite value {v!r}")


def normalize_wxyz(wxyz) -> tuple[float, float, float, float]:
    """Normalize a scalar-first quaternion; reject degenerate or non-finite."""
    if len(wxyz) != 4:
        raise ValidationError(f"quaternion needs 4 components, got {len(wxyz)}")
    q = tuple(float(v) for v in wxyz)
    _check_finite(q, "quaternion")
    norm = math.sqrt(q[0] * q[0] + q[1] * q[1] + q[2] * q[2] + q[3] * q[3])
    if norm < _QUAT_DEGENERATE:
        raise ValidationError(f"quaternion norm {norm!r} is degenerate")
    return (q[0] / norm, q[1] / norm, q[2] / norm, q[3] / norm)


@dataclass(frozen=True)
class Pose:
    """Rigid transform: scalar-first unit quaternion plus translation in meters."""

    wxyz: tuple[float, float, float, float] = (1.0, 0.0, 0.0, 0.0)
    position: tuple[float, float, float] = (0.0, 0.0, 0.0)

    @staticmethod
    def identity() -> "Pose":
        return _IDENTITY

    @staticmethod
    def make(wxyz, position) -> "Pose":
        """Validate and normalize raw components into a Pose."""
        if len(position) != 3:
            raise ValidationError(f"position needs 3 components, got {len(position)}")
        pos = tuple(float(v) for v in position)
        _check_finite(pos, "position")
        return Pose(normalize_wxyz(wxyz), pos)

    def rotate(self, v: tuple[float, float, float]) -> tuple[float, float, float]:
        """Rotate a 3-vector by this pose's quaternion."""
        w, x, y, z = self.wxyz
        vx, vy, vz = v
        # t = 2 * (q_vec x v); v' = v + w*t + q_vec x t
        tx = 2.0 * (y * vz - z * vy)
        ty = 2.0 * (z * vx - x * vz)
        tz = 2.0 * (x * vy - y * vx)
        return (
            vx + w * tx + (y * tz - z * ty),
            vy + w * ty + (z * tx - x * tz),
            vz + w * tz + (x * ty - y * tx),
        )

    def compose(self, local: "Pose") -> "Pose":
        """(q, t) ∘ (q', t') = (q·q', t + rotate(q, t'))."""
        w1, x1, y1, z1 = self.wxyz
        w2, x2, y2, z2 = local.wxyz
        q = (
            w1 * w2 - x1 * x2 - y1 * y2 - z1 * z2,
            w1 * x2 + x1 * w2 + y1 * z2 - z1 * y2,
            w1 * y2 - x1 * z2 + y1 * w2 + z1 * x2,
            w1 * z2 + x1 * y2 - y1 * x2 + z1 * w2,
        )
        rx, ry, rz = self.rotate(local.position)
        t = (self.position[0] + rx, self.position[1] + ry, self.position[2] + rz)
        return Pose(q, t)


_IDENTITY = Pose()


# ---------------------------------------------------------------------------
# Node kind property schemas

_REQUIRED = object()


@dataclass(frozen=True)
class PropSpec:
    """One kind-specific property: wire type, default, and value check."""

    wire_type: FieldType
    default: Any = _REQUIRED
    check: Optional[Callable[[Any, str], Any]] = None

    @property
    def required(self) -> bool:
        return self.default is _REQUIRED


def _positive_float(value, where):
    v = float(value)
    if not math.isfinite(v) or v <= 0:
        raise ValidationError(f"{where}: must be a positive finite float, got {value!r}")
    return v


def _finite_float(value, where):
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(f"{where}: must be finite, got {value!r}")
    return v


def _fov(value, where):
    v = float(value)
    if not (0.0 < v < math.pi):
        raise ValidationError(f"{where}: fov must be in (0, pi) radians, got {value!r}")
    return v


def _rgb(value, where):
    r, g, b = value
    for c in (r, g, b):
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c <= 255:
            raise ValidationError(f"{where}: color channels must be ints in [0, 255], got {value!r}")
    return (r, g, b)


def _vec3_positive(value, where):
    v = tuple(float(c) for c in value)
    for c in v:
        if not math.isfinite(c) or c <= 0:
            raise ValidationError(f"{where}: components must be positive and finite, got {value!r}")
    return v


def _float32_blob(value, where):
    data = bytes(value)
    if len(data) % 4 != 0:
        raise ValidationError(f"{where}: byte length {len(data)} not a multiple of 4")
    if len(data) and not np.isfinite(np.frombuffer(data, dtype="<f4")).all():
        raise ValidationError(f"{where}: contains non-finite float32 values")
    return data


def _subdivisions(value, where):
    if isinstance(value, bool) or not isinstance(value, int) or not 0 <= value <= 5:
        raise ValidationError(f"{where}: subdivisions must be an int in [0, 5], got {value!r}")
    return value


def _dim_ge1(value, where):
    if isinstance(value, bool) or not isinstance(value, int) or value < 1:
        raise ValidationError(f"{where}: must be an integer >= 1, got {value!r}")
    return value


def _points_xyz(value, where):
    data = _float32_blob(value, where)
    if len(data) % 12 != 0:
        raise ValidationError(f"{where}: byte length {len(data)} is not N*3 float32s")
    return data


def _segments_xyz(value, where):
    data = _points_xyz(value, where)
    if len(data) % 24 != 0:
        raise ValidationError(f"{where}: byte length {len(data)} is not 2M*3 float32s")
    return data


def _faces_u32(value, where):
    data = bytes(value)
    if len(data) % 12 != 0:
        raise ValidationError(f"{where}: byte length {len(data)} is not M*3 uint32s")
    return data


RGB = TupleOf(INT, 3)
VEC3 = TupleOf(FLOAT, 3)

# Ordered prop tables per node kind. Wire types here are reused verbatim by
# the protocol's per-kind upsert message definitions.
NODE_KINDS: dict[str, dict[str, PropSpec]] = {
    "frame": {
        "show_axes": PropSpec(BOOL, True),
        "axes_length": PropSpec(FLOAT, 0.5, _positive_float),
        "axes_radius": PropSpec(FLOAT, 0.025, _positive_float),
    },
    "grid": {
        "width": PropSpec(FLOAT, 10.0, _positive_float),
        "height": PropSpec(FLOAT, 10.0, _positive_float),
        "cell_size": PropSpec(FLOAT, 0.5, _positive_float),
        "plane": PropSpec(EnumOf("xy", "yz", "xz"), "xy"),
        "color": PropSpec(RGB, (200, 200, 200), _rgb),
    },
    "point_cloud": {
        "positions": PropSpec(FLOAT32_ARRAY, check=_points_xyz),
        "colors": PropSpec(BYTES),
        "point_size": PropSpec(FLOAT, 0.01, _positive_float),
    },
    "line_segments": {
        "positions": PropSpec(FLOAT32_ARRAY, check=_segments_xyz),
        "color": PropSpec(RGB, (255, 255, 255), _rgb),
        "line_width": PropSpec(FLOAT, 1.0, _positive_float),
    },
    "mesh": {
        "vertices": PropSpec(FLOAT32_ARRAY, check=_points_xyz),
        "faces": PropSpec(BYTES, check=_faces_u32),
        "color": PropSpec(RGB, (160, 160, 160), _rgb),
        "wireframe": PropSpec(BOOL, False),
    },
    "box": {
        "dimensions": PropSpec(VEC3, (1.0, 1.0, 1.0), _vec3_positive),
        "color": PropSpec(RGB, (90, 120, 255), _rgb),
    },
    "icosphere": {
        "radius": PropSpec(FLOAT, 0.5, _positive_float),
        "subdivisions": PropSpec(INT, 2, _subdivisions),
        "color": PropSpec(RGB, (90, 120, 255), _rgb),
    },
    "camera_frustum": {
        "fov": PropSpec(FLOAT, check=_fov),
        "aspect": PropSpec(FLOAT, 16.0 / 9.0, _positive_float),
        "scale": PropSpec(FLOAT, 0.3, _positive_float),
        "color": PropSpec(RGB, (255, 180, 60), _rgb),
    },
    "label": {
        "text": PropSpec(STRING, ""),
    },
    "image": {
        "width": PropSpec(INT, check=_dim_ge1),
        "height": PropSpec(INT, check=_dim_ge1),
        "data": PropSpec(BYTES),
        "render_width": PropSpec(FLOAT, 1.0, _positive_float),
        "render_height": PropSpec(FLOAT, 1.0, _positive_float),
    },
    "placeholder": {},
}


def _cross_validate(kind: str, props: dict[str, Any]) -> None:
    if kind == "point_cloud":
        n = len(props["positions"]) // 12
        if len(props["colors"]) != n * 3:
            raise ValidationError(
                f"point_cloud: colors byte length {len(props['colors'])} does not match "
                f"{n} points (need {n * 3})"
            )
    elif kind == "mesh":
        n_vertices = len(props["vertices"]) // 12
        faces = np.frombuffer(props["faces"], dtype="<u4")
        if len(faces) and int(faces.max()) >= n_vertices:
            raise ValidationError(
                f"mesh: face index {int(faces.max())} out of range for {n_vertices} vertices"
            )
    elif kind == "image":
        expected = 3 * props["width"] * props["height"]
        if len(props["data"]) != expected:
            raise ValidationError(
                f"image: rgb data length {len(props['data'])} != 3*width*height ({expected})"
            )


def validate_props(kind: str, props: dict[str, Any]) -> dict[str, Any]:
    """Validate a full property map for a node kind; fills defaults."""
    try:
        schema = NODE_KINDS[kind]
    except KeyError:
        raise ValidationError(f"unknown node kind {kind!r}") from None
    out: dict[str, Any] = {}
    for name, spec in schema.items():
        if name in props:
            value = spec.wire_type.validate(props[name], f"{kind}.{name}")
            if spec.check is not None:
                value = spec.check(value, f"{kind}.{name}")
            out[name] = value
        elif spec.required:
            raise ValidationError(f"{kind}: missing required prop {name!r}")
        else:
            out[name] = spec.default
    unknown = set(props) - set(schema)
    if unknown:
        raise ValidationError(f"{kind}: unknown props {sorted(unknown)}")
    _cross_validate(kind, out)
    return out


def validate_prop_update(kind: str, props: dict[str, Any], name: str, value: Any) -> Any:
    """Validate one property change against the kind schema, including
    cross-field constraints with the node's existing props."""
    schema = NODE_KINDS[kind]
    if name not in schema:
        raise ValidationError(f"{kind} has no prop {name!r}")
    spec = schema[name]
    value = spec.wire_type.validate(value, f"{kind}.{name}")
    if spec.check is not None:
        value = spec.check(value, f"{kind}.{name}")
    merged = dict(props)
    merged[name] = value
    _cross_validate(kind, merged)
    return value


# ---------------------------------------------------------------------------
# Scene graph state


@dataclass
class SceneNode:
    path: ScenePath
    kind: str
    props: dict[str, Any]
    local_pose: Pose = field(default_factory=Pose.identity)
    visible: bool = True
    clickable: bool = False


class SceneGraph:
    """Mutable node tree keyed by ScenePath. Single-writer: callers serialize
    mutations; snapshots/reads taken under the same serialization."""

    def __init__(self):
        self.nodes: dict[ScenePath, SceneNode] = {
            ROOT: SceneNode(ROOT, "placeholder", {})
        }

    def __contains__(self, path: "ScenePath | str") -> bool:
        return as_path(path) in self.nodes

    def get(self, path: "ScenePath | str") -> SceneNode:
        p = as_path(path)
        try:
            return self.nodes[p]
        except KeyError:
            raise UnknownPathError(f"no node at {p}") from None

    def upsert(
        self,
        path: "ScenePath | str",
        kind: str,
        props: dict[str, Any],
        pose: Pose = _IDENTITY,
        visible: bool = True,
        clickable: bool = False,
    ) -> SceneNode:
        """Create or replace the node at `path`. Missing ancestors are created
        as placeholders; existing ancestors and children are left untouched."""
        p = as_path(path)
        validated = validate_props(kind, props)
        for ancestor in p.ancestors():
            if ancestor not in self.nodes:
                self.nodes[ancestor] = SceneNode(ancestor, "placeholder", {})
        node = SceneNode(p, kind, validated, pose, visible, clickable)
        self.nodes[p] = node
        return node

    def set_prop(self, path: "ScenePath | str", name: str, value: Any) -> SceneNode:
        node = self.get(path)
        node.props[name] = validate_prop_update(node.kind, node.props, name, value)
        return node

    def set_pose(self, path: "ScenePath | str", pose: Pose) -> SceneNode:
        node = self.get(path)
        node.local_pose = pose
        return node

    def set_visible(self, path: "ScenePath | str", visible: bool) -> SceneNode:
        node = self.get(path)
        node.visible = bool(visible)
        return node

    def set_clickable(self, path: "ScenePath | str", clickable: bool) -> SceneNode:
        node = self.get(path)
        node.clickable = bool(clickable)
        return node

    def remove(self, path: "ScenePath | str") -> list[ScenePath]:
        """Remove the node and its whole subtree; returns removed paths.

        Auto-created placeholder ancestors left childless are pruned too, so
        a mirror that replays only the deduplicated history (which never
        mentions them) converges exactly.
        """
        p = as_path(path)
        if p.is_root:
            raise ValidationError("the root path cannot be removed")
        if p not in self.nodes:
            raise UnknownPathError(f"no node at {p}")
        doomed = [q for q in self.nodes if q == p or p.is_ancestor_of(q)]
        for q in doomed:
            del self.nodes[q]
        ancestor = p.parent()
        while not ancestor.is_root:
            node = self.nodes.get(ancestor)
            if node is None or node.kind != "placeholder" or self.children(ancestor):
                break
            del self.nodes[ancestor]
            doomed.append(ancestor)
            ancestor = ancestor.parent()
        return sorted(doomed)

    def children(self, path: "ScenePath | str") -> list[SceneNode]:
        """Direct children in lexicographic path order."""
        p = as_path(path)
        n = len(p.segments)
        out = [
            node
            for q, node in self.nodes.items()
            if len(q.segments) == n + 1 and q.segments[:n] == p.segments
        ]
        out.sort(key=lambda node: node.path)
        return out

    def world_transform(self, path: "ScenePath | str") -> Pose:
        """Composition of local poses from the root down to `path`."""
        p = as_path(path)
        if p not in self.nodes:
            raise UnknownPathError(f"no node at {p}")
        pose = self.nodes[ROOT].local_pose
        for i in range(1, len(p.segments) + 1):
            ancestor = ScenePath(p.segments[:i])
            pose = pose.compose(self.nodes[ancestor].local_pose)
        return pose

    def effective_visibility(self, path: "ScenePath | str") -> bool:
        """AND of `visible` flags from the root down to `path`."""
        p = as_path(path)
        if p not in self.nodes:
            raise UnknownPathError(f"no node at {p}")
        if not self.nodes[ROOT].visible:
            return False
        for i in range(1, len(p.segments) + 1):
            if not self.nodes[ScenePath(p.segments[:i])].visible:
                return False
        return True

    def paths(self) -> list[ScenePath]:
        return sorted(self.nodes)
