"""Scene and GUI facades plus the handles they return.

Handles are the user's grip on a created element: property reads are local,
property writes validate synchronously, update the authoritative state, and
enqueue a broadcast, all without waiting on the network.
"""

from __future__ import annotations

import threading
from typing import TYPE_CHECKING, Any, Callable, Optional, Sequence

import numpy as np

from .errors import RemovedHandleError, ValidationError
from .guicore import GUI_KINDS, GUI_VALUE_TYPES
from .scenegraph import NODE_KINDS, Pose, ScenePath, as_path

if TYPE_CHECKING:
    from .api import ServerCore, Subscription


def _as_f32_bytes(value) -> bytes:
    if isinstance(value, (bytes, bytearray, memoryview)):
        return bytes(value)
    arr = np.asarray(value, dtype="<f4")
    return arr.tobytes()


def _as_u8_bytes(value) -> bytes:
    if isinstance(value, (bytes, bytearray, memoryview)):
        return bytes(value)
    arr = np.asarray(value)
    if np.issubdtype(arr.dtype, np.floating):
        raise ValidationError("expected integer data for a uint8 buffer; scale to [0, 255] first")
    return arr.astype(np.uint8).tobytes()


def _as_u32_bytes(value) -> bytes:
    if isinstance(value, (bytes, bytearray, memoryview)):
        return bytes(value)
    return np.asarray(value, dtype="<u4").tobytes()


# Array-valued scene props accept numpy input; everything else passes through.
_PROP_COERCERS: dict[str, Callable[[Any], bytes]] = {
    "positions": _as_f32_bytes,
    "vertices": _as_f32_bytes,
    "colors": _as_u8_bytes,
    "data": _as_u8_bytes,
    "faces": _as_u32_bytes,
}


def _coerce_prop(name: str, value: Any) -> Any:
    coercer = _PROP_COERCERS.get(name)
    return coercer(value) if coercer else value


class SceneApi:
    """Imperative scene facade; one `add_*` method per node kind."""

    def __init__(self, core: "ServerCore", scope: Optional[int]):
        self._core = core
        self._scope = scope

    def _add(self, path, kind, props, wxyz, position, visible, clickable) -> "NodeHandle":
        pose = Pose.make(wxyz, position)
        props = {k: _coerce_prop(k, v) for k, v in props.items()}
        self._core.upsert_node(path, kind, props, pose, visible, clickable, self._scope)
        return NodeHandle(self._core, self._scope, as_path(path), kind)

    def add_frame(
        self, path, *, show_axes=True, axes_length=0.5, axes_radius=0.025,
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "frame",
            dict(show_axes=show_axes, axes_length=axes_length, axes_radius=axes_radius),
            wxyz, position, visible, clickable,
        )

    def add_grid(
        self, path, *, width=10.0, height=10.0, cell_size=0.5, plane="xy",
        color=(200, 200, 200), wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
        visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "grid",
            dict(width=width, height=height, cell_size=cell_size, plane=plane, color=color),
            wxyz, position, visible, clickable,
        )

    def add_point_cloud(
        self, path, positions, colors, *, point_size=0.01,
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "point_cloud",
            dict(positions=positions, colors=colors, point_size=point_size),
            wxyz, position, visible, clickable,
        )

    def add_line_segments(
        self, path, positions, *, color=(255, 255, 255), line_width=1.0,
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "line_segments",
            dict(positions=positions, color=color, line_width=line_width),
            wxyz, position, visible, clickable,
        )

    def add_mesh(
        self, path, vertices, faces, *, color=(160, 160, 160), wireframe=False,
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "mesh",
            dict(vertices=vertices, faces=faces, color=color, wireframe=wireframe),
            wxyz, position, visible, clickable,
        )

    def add_box(
        self, path, *, dimensions=(1.0, 1.0, 1.0), color=(90, 120, 255),
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "box", dict(dimensions=dimensions, color=color),
            wxyz, position, visible, clickable,
        )

    def add_icosphere(
        self, path, *, radius=0.5, subdivisions=2, color=(90, 120, 255),
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "icosphere", dict(radius=radius, subdivisions=subdivisions, color=color),
            wxyz, position, visible, clickable,
        )

    def add_camera_frustum(
        self, path, *, fov, aspect=16.0 / 9.0, scale=0.3, color=(255, 180, 60),
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(
            path, "camera_frustum", dict(fov=fov, aspect=aspect, scale=scale, color=color),
            wxyz, position, visible, clickable,
        )

    def add_label(
        self, path, text, *, wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0),
        visible=True, clickable=False,
    ) -> "NodeHandle":
        return self._add(path, "label", dict(text=text), wxyz, position, visible, clickable)

    def add_image(
        self, path, image, *, width=None, height=None, render_width=1.0, render_height=1.0,
        wxyz=(1.0, 0.0, 0.0, 0.0), position=(0.0, 0.0, 0.0), visible=True, clickable=False,
    ) -> "NodeHandle":
        """`image` is an (H, W, 3) uint8 array, or raw rgb bytes plus
        explicit width/height."""
        if isinstance(image, (bytes, bytearray, memoryview)):
            if width is None or height is None:
                raise ValidationError("raw image bytes require explicit width and height")
            data = bytes(image)
        else:
            arr = np.asarray(image)
            if arr.ndim != 3 or arr.shape[2] != 3:
                raise ValidationError(f"image array must be (H, W, 3), got {arr.shape}")
            height, width = int(arr.shape[0]), int(arr.shape[1])
            data = arr.astype(np.uint8).tobytes()
        return self._add(
            path, "image",
            dict(width=int(width), height=int(height), data=data,
                 render_width=render_width, render_height=render_height),
            wxyz, position, visible, clickable,
        )


class NodeHandle:
    """Handle to one scene node. Kind-specific props are plain attributes:
    `box.color = (255, 0, 0)` validates, applies, and broadcasts."""

    def __init__(self, core: "ServerCore", scope: Optional[int], path: ScenePath, kind: str):
        object.__setattr__(self, "_core", core)
        object.__setattr__(self, "_scope", scope)
        object.__setattr__(self, "_path", path)
        object.__setattr__(self, "_kind", kind)

    @property
    def path(self) -> str:
        return str(self._path)

    @property
    def kind(self) -> str:
        return self._kind

    def _node(self):
        node = self._core.get_node(self._path, self._scope)
        if node is None:
            raise RemovedHandleError(f"node {self._path} was removed")
        return node

    def __getattr__(self, name: str):
        if name.startswith("_"):
            raise AttributeError(name)
        node = self._node()
        if name == "position":
            return node.local_pose.position
        if name == "wxyz":
            return node.local_pose.wxyz
        if name == "pose":
            return node.local_pose
        if name == "visible":
            return node.visible
        if name == "clickable":
            return node.clickable
        if name in NODE_KINDS[node.kind]:
            return node.props[name]
        raise AttributeError(f"{node.kind} node has no property {name!r}")

    def __setattr__(self, name: str, value) -> None:
        if name.startswith("_"):
            object.__setattr__(self, name, value)
            return
        core, scope, path = self._core, self._scope, self._path
        if name == "position":
            node = self._node()
            core.set_node_pose(path, Pose.make(node.local_pose.wxyz, value), scope)
        elif name == "wxyz":
            node = self._node()
            core.set_node_pose(path, Pose.make(value, node.local_pose.position), scope)
        elif name == "pose":
            core.set_node_pose(path, value, scope)
        elif name == "visible":
            core.set_node_visible(path, bool(value), scope)
        elif name == "clickable":
            core.set_node_clickable(path, bool(value), scope)
        else:
            node = self._node()
            if name not in NODE_KINDS[node.kind]:
                raise AttributeError(f"{node.kind} node has no property {name!r}")
            core.set_node_prop(path, name, _coerce_prop(name, value), scope)

    def on_click(self, fn: Callable) -> "Subscription":
        """Register a click callback; implicitly marks the node clickable."""
        return self._core.add_click_callback(self._path, fn, self._scope)

    def remove(self) -> None:
        self._node()
        self._core.remove_node(self._path, self._scope)

    def __repr__(self) -> str:
        return f"NodeHandle({self._path}, kind={self._kind})"


_local = threading.local()


def _container_stack() -> list:
    stack = getattr(_local, "gui_containers", None)
    if stack is None:
        stack = []
        _local.gui_containers = stack
    return stack


class GuiApi:
    """Imperative GUI facade."""

    def __init__(self, core: "ServerCore", scope: Optional[int]):
        self._core = core
        self._scope = scope

    def _resolve_container(self, container) -> int:
        if container is not None:
            return container.uid
        stack = _container_stack()
        return stack[-1] if stack else 0

    def _add(self, kind, props, value=None, container=None) -> "GuiHandle":
        uid = self._core.gui_add(kind, props, value, self._resolve_container(container), self._scope)
        cls = _HANDLE_CLASSES.get(kind, GuiHandle)
        return cls(self._core, self._scope, uid, kind)

    def add_button(self, label, *, color=None, disabled=False, visible=True, container=None) -> "GuiHandle":
        return self._add(
            "button", dict(label=label, color=color, disabled=disabled, visible=visible),
            container=container,
        )

    def add_checkbox(self, label, initial=False, *, disabled=False, visible=True, container=None) -> "GuiHandle":
        return self._add(
            "checkbox", dict(label=label, disabled=disabled, visible=visible),
            value=initial, container=container,
        )

    def add_slider(
        self, label, min, max, *, step=1, initial=None, disabled=False, visible=True, container=None,
    ) -> "GuiHandle":
        return self._add(
            "slider",
            dict(label=label, min=min, max=max, step=step, disabled=disabled, visible=visible),
            value=initial if initial is not None else min,
            container=container,
        )

    def add_number(
        self, label, initial=0, *, min=None, max=None, step=0.1, disabled=False, visible=True, container=None,
    ) -> "GuiHandle":
        return self._add(
            "number",
            dict(label=label, min=min, max=max, step=step, disabled=disabled, visible=visible),
            value=initial, container=container,
        )

    def add_text(self, initial="", *, label="", disabled=False, visible=True, container=None) -> "GuiHandle":
        return self._add(
            "text", dict(label=label, disabled=disabled, visible=visible),
            value=initial, container=container,
        )

    def add_dropdown(
        self, label, options: Sequence[str], initial=None, *, disabled=False, visible=True, container=None,
    ) -> "GuiHandle":
        return self._add(
            "dropdown", dict(label=label, options=list(options), disabled=disabled, visible=visible),
            value=initial, container=container,
        )

    def add_rgb(self, label, initial=(128, 128, 128), *, disabled=False, visible=True, container=None) -> "GuiHandle":
        return self._add(
            "rgb", dict(label=label, disabled=disabled, visible=visible),
            value=tuple(initial), container=container,
        )

    def add_vector3(
        self, label, initial=(0.0, 0.0, 0.0), *, step=0.1, disabled=False, visible=True, container=None,
    ) -> "GuiHandle":
        return self._add(
            "vector3", dict(label=label, step=step, disabled=disabled, visible=visible),
            value=tuple(initial), container=container,
        )

    def add_folder(self, label, *, expanded=True, visible=True, container=None) -> "ContainerHandle":
        return self._add("folder", dict(label=label, expanded=expanded, visible=visible), container=container)

    def add_tab_group(self, *, visible=True, container=None) -> "TabGroupHandle":
        return self._add("tab_group", dict(visible=visible), container=container)

    def add_markdown(self, content, *, visible=True, container=None) -> "GuiHandle":
        return self._add("markdown", dict(content=content, visible=visible), container=container)


class GuiHandle:
    """Handle to one GUI element: `.value` for polling reads and server
    writes, attributes for props, `.on_update`/`.on_click` for callbacks."""

    _SPECIAL = ("uid", "kind", "value")

    def __init__(self, core: "ServerCore", scope: Optional[int], uid: int, kind: str):
        object.__setattr__(self, "_core", core)
        object.__setattr__(self, "_scope", scope)
        object.__setattr__(self, "_uid", uid)
        object.__setattr__(self, "_kind", kind)

    @property
    def uid(self) -> int:
        return self._uid

    @property
    def kind(self) -> str:
        return self._kind

    def _element(self):
        element = self._core.get_gui_element(self._uid)
        if element is None:
            raise RemovedHandleError(f"GUI element uid={self._uid} was removed")
        return element

    @property
    def value(self):
        return self._element().value

    @value.setter
    def value(self, new_value) -> None:
        self._element()
        self._core.gui_set_value(self._uid, new_value)

    def __getattr__(self, name: str):
        if name.startswith("_"):
            raise AttributeError(name)
        element = self._element()
        if name in GUI_KINDS[element.kind]:
            return element.props[name]
        raise AttributeError(f"{element.kind} element has no prop {name!r}")

    def __setattr__(self, name: str, value) -> None:
        if name.startswith("_"):
            object.__setattr__(self, name, value)
            return
        if name == "value":
            # route through the property setter
            GuiHandle.value.fset(self, value)  # type: ignore[attr-defined]
            return
        element = self._element()
        if name not in GUI_KINDS[element.kind]:
            raise AttributeError(f"{element.kind} element has no prop {name!r}")
        self._core.gui_set_prop(self._uid, name, value)

    def on_update(self, fn: Callable) -> "Subscription":
        """Fires on client-originated changes; server writes never echo."""
        return self._core.add_gui_callback(self._uid, fn)

    def on_click(self, fn: Callable) -> "Subscription":
        if self._kind != "button":
            raise ValidationError("on_click is only available on buttons")
        return self._core.add_gui_callback(self._uid, fn)

    def remove(self) -> None:
        self._element()
        self._core.gui_remove(self._uid)

    def __repr__(self) -> str:
        return f"GuiHandle(uid={self._uid}, kind={self._kind})"


class ContainerHandle(GuiHandle):
    """Folder/tab handle; usable as a context manager that makes it the
    default container for nested `add_*` calls."""

    def __enter__(self) -> "ContainerHandle":
        _container_stack().append(self._uid)
        return self

    def __exit__(self, *exc) -> None:
        stack = _container_stack()
        if stack and stack[-1] == self._uid:
            stack.pop()


class TabGroupHandle(ContainerHandle):
    def add_tab(self, label) -> "ContainerHandle":
        uid = self._core.gui_add("tab", dict(label=label), None, self._uid, self._scope)
        return ContainerHandle(self._core, self._scope, uid, "tab")


_HANDLE_CLASSES = {
    "folder": ContainerHandle,
    "tab": ContainerHandle,
    "tab_group": TabGroupHandle,
}


class CameraHandle:
    """Read the latest client-reported viewpoint; push a new one."""

    def __init__(self, core: "ServerCore", client_id: int):
        self._core = core
        self._client_id = client_id

    def get(self):
        return self._core.get_camera(self._client_id)

    def set(self, state) -> None:
        self._core.set_camera(self._client_id, state)

    @property
    def fov(self) -> float:
        return self.get().fov

    @property
    def aspect(self) -> float:
        return self.get().aspect

    @property
    def position(self):
        return self.get().pose.position

    @property
    def wxyz(self):
        return self.get().pose.wxyz

    @property
    def look_at(self):
        return self.get().look_at


class ClientHandle:
    """One connected client: camera access plus per-client scene/gui facades
    whose writes are invisible to every other client."""

    def __init__(self, core: "ServerCore", client_id: int):
        self.client_id = client_id
        self.scene = SceneApi(core, client_id)
        self.gui = GuiApi(core, client_id)
        self.camera = CameraHandle(core, client_id)
        self._core = core

    @property
    def connected(self) -> bool:
        return self._core.is_connected(self.client_id)

    def __repr__(self) -> str:
        return f"ClientHandle(client_id={self.client_id})"
