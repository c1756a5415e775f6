"""Registry of 2D GUI elements: containers, server/client value updates with
validation, and callback bookkeeping.

Like the scene graph, this is a pure state machine shared verbatim between
the server (authoritative copy) and every client mirror.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable, Optional

from .errors import (
    IllTypedValueError,
    RejectedValueError,
    UnknownUidError,
    ValidationError,
)
from .messages import BOOL, FLOAT, INT, ListOf, OptionalOf, STRING, TupleOf
from .scenegraph import PropSpec

ROOT_PANEL_UID = 0
CONTAINER_KINDS = ("folder", "tab_group", "tab")

RGB = TupleOf(INT, 3)
VEC3 = TupleOf(FLOAT, 3)


def _finite(value, where):
    v = float(value)
    if not math.isfinite(v):
        raise ValidationError(f"{where}: must be finite, got {value!r}")
    return v


def _positive(value, where):
    v = _finite(value, where)
    if v <= 0:
        raise ValidationError(f"{where}: must be > 0, got {value!r}")
    return v


def _rgb_strict(value, where):
    r, g, b = value
    for c in (r, g, b):
        if isinstance(c, bool) or not isinstance(c, int) or not 0 <= c <= 255:
            raise ValidationError(f"{where}: channels must be ints in [0, 255], got {value!r}")
    return (r, g, b)


def _options(value, where):
    if not value:
        raise ValidationError(f"{where}: options must be non-empty")
    return [str(v) for v in value]


# Ordered prop tables per GUI kind; wire types are reused by the protocol's
# gui_add_* message definitions. `value` wire types live in GUI_VALUE_TYPES.
GUI_KINDS: dict[str, dict[str, PropSpec]] = {
    "button": {
        "label": PropSpec(STRING, ""),
        "color": PropSpec(OptionalOf(RGB), None, lambda v, w: None if v is None else _rgb_strict(v, w)),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "checkbox": {
        "label": PropSpec(STRING, ""),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "slider": {
        "label": PropSpec(STRING, ""),
        "min": PropSpec(FLOAT, check=_finite),
        "max": PropSpec(FLOAT, check=_finite),
        "step": PropSpec(FLOAT, 1, _positive),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "number": {
        "label": PropSpec(STRING, ""),
        "min": PropSpec(OptionalOf(FLOAT), None, lambda v, w: None if v is None else _finite(v, w)),
        "max": PropSpec(OptionalOf(FLOAT), None, lambda v, w: None if v is None else _finite(v, w)),
        "step": PropSpec(FLOAT, 0.1, _positive),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "text": {
        "label": PropSpec(STRING, ""),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "dropdown": {
        "label": PropSpec(STRING, ""),
        "options": PropSpec(ListOf(STRING), check=_options),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "rgb": {
        "label": PropSpec(STRING, ""),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "vector3": {
        "label": PropSpec(STRING, ""),
        "step": PropSpec(FLOAT, 0.1, _positive),
        "disabled": PropSpec(BOOL, False),
        "visible": PropSpec(BOOL, True),
    },
    "folder": {
        "label": PropSpec(STRING, ""),
        "expanded": PropSpec(BOOL, True),
        "visible": PropSpec(BOOL, True),
    },
    "tab_group": {
        "visible": PropSpec(BOOL, True),
    },
    "tab": {
        "label": PropSpec(STRING, ""),
    },
    "markdown": {
        "content": PropSpec(STRING, ""),
        "visible": PropSpec(BOOL, True),
    },
}

# Wire type of each kind's `value` field; kinds absent here carry no value.
GUI_VALUE_TYPES = {
    "button": INT,  # click counter, so polling reads work uniformly
    "checkbox": BOOL,
    "slider": FLOAT,
    "number": FLOAT,
    "text": STRING,
    "dropdown": STRING,
    "rgb": RGB,
    "vector3": VEC3,
}


@dataclass
class GuiElement:
    uid: int
    kind: str
    container_uid: int
    order: int
    props: dict[str, Any]
    value: Any


@dataclass(frozen=True)
class GuiEvent:
    """A client-originated change to one element."""

    uid: int
    client_id: int
    new_value: Any
    timestamp_ms: int


def _is_integral(x: Optional[float]) -> bool:
    if x is None:
        return True
    return isinstance(x, int) or (isinstance(x, float) and x.is_integer())


def _numeric_bounds(element: GuiElement) -> tuple[Optional[float], Optional[float], float, bool]:
    props = element.props
    lo = props.get("min")
    hi = props.get("max")
    step = props.get("step", 1)
    integral = _is_integral(lo) and _is_integral(hi) and _is_integral(step)
    return lo, hi, float(step), integral


def _coerce_numeric(element: GuiElement, value: float, *, mode: str, snap: bool = False) -> "int | float":
    """Shared slider/number value normalization. Modes: "strict" errors on
    out-of-range (server writes), "clamp" pulls into range (client input),
    "trust" skips bounds entirely (mirror replay, where a later bound update
    in the same stream restores the invariant). Values become ints when
    min/max/step are all integral, which keeps e.g. `str(slider.value * 2)`
    free of trailing '.0'."""
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise IllTypedValueError(f"expected a number for {element.kind} uid={element.uid}")
    v = float(value)
    if not math.isfinite(v):
        raise IllTypedValueError(f"non-finite value for {element.kind} uid={element.uid}")
    if mode == "trust":
        # No bounds, no integral coercion: the element's props at replay
        # time may postdate this value in buffer order. Canonical rendering
        # prints 5 and 5.0 identically, so representation does not matter.
        return v
    lo, hi, step, integral = _numeric_bounds(element)
    if snap and lo is not None:
        v = lo + round((v - lo) / step) * step
    if lo is not None and v < lo:
        if mode == "strict":
            raise ValidationError(f"value {value!r} below min {lo} for uid={element.uid}")
        v = float(lo)
    if hi is not None and v > hi:
        if mode == "strict":
            raise ValidationError(f"value {value!r} above max {hi} for uid={element.uid}")
        v = float(hi)
    return int(round(v)) if integral else v


def validate_value(element: GuiElement, value: Any, *, mode: str, snap: bool = False) -> Any:
    """Validate/normalize a value for an element. Mode "strict" is the
    server write path, "clamp" the client input path, "trust" the mirror
    replay path (type checks only)."""
    kind = element.kind
    if kind not in GUI_VALUE_TYPES:
        raise ValidationError(f"{kind} elements carry no value")
    if kind == "button":
        if isinstance(value, bool) or not isinstance(value, int) or value < 0:
            raise IllTypedValueError(f"button counter must be a non-negative int, got {value!r}")
        return value
    if kind == "checkbox":
        if not isinstance(value, bool):
            raise IllTypedValueError(f"expected bool for checkbox uid={element.uid}")
        return value
    if kind in ("slider", "number"):
        return _coerce_numeric(element, value, mode=mode, snap=snap)
    if kind == "text":
        if not isinstance(value, str):
            raise IllTypedValueError(f"expected str for text uid={element.uid}")
        return value
    if kind == "dropdown":
        if not isinstance(value, str):
            raise IllTypedValueError(f"expected str for dropdown uid={element.uid}")
        if mode != "trust" and value not in element.props["options"]:
            raise RejectedValueError(
                f"dropdown uid={element.uid}: {value!r} not in options {element.props['options']}"
            )
        return value
    if kind == "rgb":
        try:
            r, g, b = value
        except (TypeError, ValueError):
            raise IllTypedValueError(f"expected (r, g, b) for rgb uid={element.uid}") from None
        channels = []
        for c in (r, g, b):
            if isinstance(c, bool) or not isinstance(c, int):
                raise IllTypedValueError(f"rgb channels must be ints, got {value!r}")
            channels.append(min(255, max(0, c)) if mode == "clamp" else c)
        if mode == "strict":
            _rgb_strict(tuple(channels), f"rgb uid={element.uid}")
        return tuple(channels)
    if kind == "vector3":
        try:
            x, y, z = value
        except (TypeError, ValueError):
            raise IllTypedValueError(f"expected (x, y, z) for vector3 uid={element.uid}") from None
        out = []
        for c in (x, y, z):
            if isinstance(c, bool) or not isinstance(c, (int, float)) or not math.isfinite(c):
                raise IllTypedValueError(f"vector3 components must be finite numbers, got {value!r}")
            out.append(float(c))
        return tuple(out)
    raise AssertionError(kind)


def default_value(kind: str, props: dict[str, Any]) -> Any:
    if kind == "button":
        return 0
    if kind == "checkbox":
        return False
    if kind in ("slider", "number"):
        return props.get("min") if props.get("min") is not None else 0
    if kind == "text":
        return ""
    if kind == "dropdown":
        return props["options"][0]
    if kind == "rgb":
        return (128, 128, 128)
    if kind == "vector3":
        return (0.0, 0.0, 0.0)
    return None


class GuiRegistry:
    """Ordered element store with uid assignment and callback bookkeeping."""

    def __init__(self):
        self.elements: dict[int, GuiElement] = {}
        self._callbacks: dict[int, list[Callable]] = {}
        self._next_uid = 1
        self._next_order = 0

    # -- element lifecycle

    def add(
        self,
        kind: str,
        props: dict[str, Any],
        value: Any = None,
        container_uid: int = ROOT_PANEL_UID,
    ) -> GuiElement:
        """Validate and append a new element; uid and order are assigned
        monotonically."""
        validated = self._validate_props_full(kind, props)
        self._check_container(kind, container_uid)
        if kind == "slider" and validated["min"] > validated["max"]:
            raise ValidationError(f"slider min {validated['min']} > max {validated['max']}")
        if kind == "number":
            lo, hi = validated["min"], validated["max"]
            if lo is not None and hi is not None and lo > hi:
                raise ValidationError(f"number min {lo} > max {hi}")
        element = GuiElement(
            uid=self._next_uid,
            kind=kind,
            container_uid=container_uid,
            order=self._next_order,
            props=validated,
            value=None,
        )
        if kind in GUI_VALUE_TYPES:
            raw = value if value is not None else default_value(kind, validated)
            element.value = validate_value(element, raw, mode="strict")
        self._next_uid += 1
        self._next_order += 1
        self.elements[element.uid] = element
        return element

    def insert(self, element: GuiElement) -> GuiElement:
        """Insert an element with a preassigned uid (mirror-side apply)."""
        self.elements[element.uid] = element
        self._next_uid = max(self._next_uid, element.uid + 1)
        self._next_order = max(self._next_order, element.order + 1)
        return element

    def get(self, uid: int) -> GuiElement:
        try:
            return self.elements[uid]
        except KeyError:
            raise UnknownUidError(f"no GUI element with uid {uid}") from None

    def __contains__(self, uid: int) -> bool:
        return uid in self.elements

    def remove(self, uid: int) -> list[int]:
        """Remove an element and, for containers, everything inside it.
        Returns all removed uids in ascending order."""
        if uid not in self.elements:
            raise UnknownUidError(f"no GUI element with uid {uid}")
        doomed = {uid}
        changed = True
        while changed:
            changed = False
            for el in self.elements.values():
                if el.uid not in doomed and el.container_uid in doomed:
                    doomed.add(el.uid)
                    changed = True
        for u in sorted(doomed):
            del self.elements[u]
            self._callbacks.pop(u, None)
        return sorted(doomed)

    # -- property and value updates

    def set_prop(self, uid: int, name: str, value: Any) -> tuple[GuiElement, Any]:
        """Update one prop. If the change tightens numeric bounds (or drops
        the current dropdown option), the value is pulled back into range;
        the second return is the corrected value, or None if untouched."""
        element = self.get(uid)
        schema = GUI_KINDS[element.kind]
        if name not in schema:
            raise ValidationError(f"{element.kind} has no prop {name!r}")
        spec = schema[name]
        value = spec.wire_type.validate(value, f"{element.kind}.{name}")
        if spec.check is not None:
            value = spec.check(value, f"{element.kind}.{name}")
        if name == "min" and element.props.get("max") is not None and value is not None:
            if value > element.props["max"]:
                raise ValidationError(f"min {value} > max {element.props['max']}")
        if name == "max" and element.props.get("min") is not None and value is not None:
            if value < element.props["min"]:
                raise ValidationError(f"max {value} < min {element.props['min']}")
        element.props[name] = value

        corrected = None
        if element.kind in ("slider", "number") and name in ("min", "max", "step"):
            new_value = _coerce_numeric(element, element.value, mode="clamp")
            if new_value != element.value or type(new_value) is not type(element.value):
                element.value = new_value
                corrected = new_value
        elif element.kind == "dropdown" and name == "options":
            if element.value not in value:
                element.value = value[0]
                corrected = element.value
        return element, corrected

    def set_prop_trusted(self, uid: int, name: str, value: Any) -> GuiElement:
        """Mirror-side prop apply: single-field validation only. No value
        correction (the server broadcasts corrected values itself) and no
        min/max cross-check, because buffer replay may deliver one bound
        ahead of the other; the stream restores the invariant by its end."""
        element = self.get(uid)
        schema = GUI_KINDS[element.kind]
        if name not in schema:
            raise ValidationError(f"{element.kind} has no prop {name!r}")
        spec = schema[name]
        value = spec.wire_type.validate(value, f"{element.kind}.{name}")
        if spec.check is not None:
            value = spec.check(value, f"{element.kind}.{name}")
        element.props[name] = value
        return element

    def set_value(self, uid: int, value: Any) -> GuiElement:
        """Server-initiated value write: strict validation, no callbacks."""
        element = self.get(uid)
        element.value = validate_value(element, value, mode="strict")
        return element

    def set_value_trusted(self, uid: int, value: Any) -> GuiElement:
        """Mirror-side value apply: type checks and integral coercion only.
        Bounds are not enforced because buffer replay may order a value
        before the bound change that made it legal; the stream itself
        restores the invariant by its end."""
        element = self.get(uid)
        element.value = validate_value(element, value, mode="trust")
        return element

    def apply_client_update(self, event: GuiEvent) -> tuple[GuiElement, Any, list[Callable]]:
        """Apply a client-originated update: numeric values clamp and snap,
        dropdowns reject unknown options, button clicks bump the counter.
        Returns the element, the normalized value, and the callbacks to fire
        in registration order."""
        element = self.get(event.uid)
        if element.kind == "button":
            element.value = element.value + 1
            normalized = element.value
        else:
            normalized = validate_value(element, event.new_value, mode="clamp", snap=True)
            element.value = normalized
        return element, normalized, list(self._callbacks.get(event.uid, ()))

    # -- callbacks

    def add_callback(self, uid: int, fn: Callable) -> Callable:
        self.get(uid)
        self._callbacks.setdefault(uid, []).append(fn)
        return fn

    def remove_callback(self, uid: int, fn: Callable) -> None:
        callbacks = self._callbacks.get(uid)
        if callbacks and fn in callbacks:
            callbacks.remove(fn)

    # -- helpers

    def _validate_props_full(self, kind: str, props: dict[str, Any]) -> dict[str, Any]:
        try:
            schema = GUI_KINDS[kind]
        except KeyError:
            raise ValidationError(f"unknown GUI kind {kind!r}") from None
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
        return out

    def _check_container(self, kind: str, container_uid: int) -> None:
        if container_uid == ROOT_PANEL_UID:
            container_kind = "root"
        else:
            container = self.get(container_uid)
            container_kind = container.kind
            if container_kind not in CONTAINER_KINDS:
                raise ValidationError(f"uid {container_uid} ({container_kind}) is not a container")
        if kind == "tab" and container_kind != "tab_group":
            raise ValidationError("tabs can only be added to tab groups")
        if kind != "tab" and container_kind == "tab_group":
            raise ValidationError("tab groups can only contain tabs")
