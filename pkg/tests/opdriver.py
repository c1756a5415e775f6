"""Shared test machinery: a seeded random operation driver that exercises a
ServerCore through its public mutation API, and a deliberately naive
message-level state oracle used to cross-check buffer replay independently
of the real scene/GUI state machines."""

import random
import struct

from scenesync.errors import ValidationError
from scenesync.scenegraph import Pose

_NODE_COMMON = ("path", "wxyz", "position", "visible", "clickable")
_GUI_COMMON = ("uid", "container_uid", "order", "value")


class RandomOpDriver:
    """Applies random valid operations to a ServerCore, tracking liveness so
    op choices stay meaningful. Deterministic given the seed."""

    def __init__(self, core, seed, namespace=14):
        self.core = core
        self.rng = random.Random(seed)
        self.node_kinds: dict[str, str] = {}
        self.gui_kinds: dict[int, str] = {}
        self.gui_container: dict[int, int] = {}
        self._names = [f"n{i}" for i in range(namespace)]

    # -- random values

    def _random_path(self) -> str:
        depth = self.rng.randrange(1, 4)
        return "/" + "/".join(self.rng.choice(self._names) for _ in range(depth))

    def _random_pose(self) -> Pose:
        return Pose.make(
            [self.rng.gauss(0, 1) + 0.1 for _ in range(4)],
            [self.rng.uniform(-4, 4) for _ in range(3)],
        )

    def _rgb(self):
        return tuple(self.rng.randrange(256) for _ in range(3))

    def _node_props(self, kind: str) -> dict:
        rng = self.rng
        if kind == "box":
            return dict(dimensions=tuple(rng.uniform(0.1, 2) for _ in range(3)), color=self._rgb())
        if kind == "frame":
            return dict(show_axes=rng.random() < 0.8, axes_length=rng.uniform(0.1, 1))
        if kind == "label":
            return dict(text=rng.choice(["hello", "joint", "θ=1.5", ""]))
        if kind == "icosphere":
            return dict(radius=rng.uniform(0.05, 1.0), subdivisions=rng.randrange(4), color=self._rgb())
        if kind == "grid":
            return dict(cell_size=rng.uniform(0.1, 1.0), plane=rng.choice(["xy", "yz", "xz"]))
        if kind == "camera_frustum":
            return dict(fov=rng.uniform(0.2, 3.0), aspect=rng.uniform(0.3, 3.0), scale=rng.uniform(0.1, 1))
        if kind == "point_cloud":
            n = rng.randrange(1, 6)
            return dict(
                positions=struct.pack(f"<{3 * n}f", *(rng.uniform(-1, 1) for _ in range(3 * n))),
                colors=bytes(rng.randrange(256) for _ in range(3 * n)),
                point_size=rng.uniform(0.001, 0.05),
            )
        raise AssertionError(kind)

    _NODE_PROP_CHOICES = {
        "box": ("color", "dimensions"),
        "frame": ("show_axes", "axes_length"),
        "label": ("text",),
        "icosphere": ("radius", "color", "subdivisions"),
        "grid": ("cell_size", "plane", "color"),
        "camera_frustum": ("fov", "scale", "color"),
        "point_cloud": ("point_size",),
    }

    def _prop_value(self, prop: str):
        rng = self.rng
        if prop == "color":
            return self._rgb()
        if prop == "dimensions":
            return tuple(rng.uniform(0.1, 2) for _ in range(3))
        if prop == "show_axes":
            return rng.random() < 0.5
        if prop in ("axes_length", "radius", "cell_size", "scale", "point_size"):
            return rng.uniform(0.05, 1.5)
        if prop == "text":
            return rng.choice(["hello", "updated", ""])
        if prop == "subdivisions":
            return rng.randrange(4)
        if prop == "plane":
            return rng.choice(["xy", "yz", "xz"])
        if prop == "fov":
            return rng.uniform(0.2, 3.0)
        raise AssertionError(prop)

    # -- op application

    def step(self) -> None:
        rng = self.rng
        roll = rng.random()
        live = [p for p, k in self.node_kinds.items() if k != "placeholder"]
        # add/remove rates are tuned so state size stays bounded over long runs
        if roll < 0.26 or not live:
            self._op_upsert()
        elif roll < 0.40:
            self._op_set_node_prop(rng.choice(live))
        elif roll < 0.48:
            self.core.set_node_pose(rng.choice(live), self._random_pose())
        elif roll < 0.53:
            self.core.set_node_visible(rng.choice(live), rng.random() < 0.5)
        elif roll < 0.62:
            self._op_remove_node(rng.choice(list(self.node_kinds)))
        elif roll < 0.71 or not self.gui_kinds:
            self._op_gui_add()
        elif roll < 0.81:
            self._op_gui_set_value()
        elif roll < 0.89:
            self._op_gui_set_prop()
        else:
            self._op_gui_remove()

    def run(self, n: int) -> None:
        for _ in range(n):
            self.step()

    def _op_upsert(self) -> None:
        rng = self.rng
        kind = rng.choice(("box", "frame", "label", "icosphere", "grid", "camera_frustum", "point_cloud"))
        path = self._random_path()
        self.core.upsert_node(
            path, kind, self._node_props(kind), self._random_pose(),
            visible=rng.random() < 0.9, clickable=rng.random() < 0.1,
        )
        parts = path.strip("/").split("/")
        for i in range(1, len(parts)):
            self.node_kinds.setdefault("/" + "/".join(parts[:i]), "placeholder")
        self.node_kinds[path] = kind

    def _op_set_node_prop(self, path: str) -> None:
        kind = self.node_kinds[path]
        prop = self.rng.choice(self._NODE_PROP_CHOICES[kind])
        self.core.set_node_prop(path, prop, self._prop_value(prop))

    def _op_remove_node(self, path: str) -> None:
        # removal also reports pruned placeholder ancestors
        for p in self.core.remove_node(path):
            self.node_kinds.pop(p, None)

    def _op_gui_add(self) -> None:
        rng = self.rng
        kind = rng.choice(
            ("slider", "text", "checkbox", "dropdown", "button", "rgb", "vector3", "number",
             "folder", "markdown")
        )
        folders = [u for u, k in self.gui_kinds.items() if k == "folder"]
        container = rng.choice(folders) if folders and rng.random() < 0.3 else 0
        props: dict = dict(label=rng.choice(["a", "b", "control"]))
        value = None
        if kind == "slider":
            lo = rng.choice([0, -10, 2.5])
            props.update(min=lo, max=lo + rng.choice([10, 100]), step=rng.choice([1, 0.5]))
            value = lo
        elif kind == "number":
            props.update(min=None, max=rng.choice([None, 50]), step=0.1)
            value = rng.uniform(0, 40)
        elif kind == "dropdown":
            props.update(options=rng.sample(["a", "b", "c", "d"], 3))
        elif kind == "markdown":
            props = dict(content=rng.choice(["# hi", "text *here*"]))
        elif kind == "checkbox":
            value = rng.random() < 0.5
        elif kind == "rgb":
            value = self._rgb()
        elif kind == "vector3":
            value = tuple(rng.uniform(-1, 1) for _ in range(3))
        elif kind == "text":
            value = rng.choice(["", "state", "42"])
        uid = self.core.gui_add(kind, props, value, container)
        self.gui_kinds[uid] = kind
        self.gui_container[uid] = container

    def _pick_gui(self, kinds=None):
        candidates = [u for u, k in self.gui_kinds.items() if kinds is None or k in kinds]
        return self.rng.choice(candidates) if candidates else None

    def _op_gui_set_value(self) -> None:
        rng = self.rng
        uid = self._pick_gui(("slider", "number", "text", "checkbox", "dropdown", "rgb", "vector3"))
        if uid is None:
            return
        kind = self.gui_kinds[uid]
        element = self.core.get_gui_element(uid)
        if kind in ("slider", "number"):
            lo = element.props.get("min")
            hi = element.props.get("max")
            lo = lo if lo is not None else -100
            hi = hi if hi is not None else 100
            value = rng.uniform(lo, hi)
        elif kind == "text":
            value = rng.choice(["x", "y", "longer text"])
        elif kind == "checkbox":
            value = rng.random() < 0.5
        elif kind == "dropdown":
            value = rng.choice(element.props["options"])
        elif kind == "rgb":
            value = self._rgb()
        else:
            value = tuple(rng.uniform(-2, 2) for _ in range(3))
        try:
            self.core.gui_set_value(uid, value)
        except ValidationError:
            pass

    def _op_gui_set_prop(self) -> None:
        rng = self.rng
        uid = self._pick_gui()
        if uid is None:
            return
        kind = self.gui_kinds[uid]
        try:
            if kind in ("slider", "number") and rng.random() < 0.7:
                element = self.core.get_gui_element(uid)
                which = rng.choice(["min", "max"])
                current = element.props.get(which)
                base = current if current is not None else 0
                # shifts that sometimes clamp the value (exercises the
                # corrected-value broadcast)
                self.core.gui_set_prop(uid, which, base + rng.uniform(-5, 5))
            elif kind == "dropdown" and rng.random() < 0.5:
                self.core.gui_set_prop(uid, "options", rng.sample(["a", "b", "c", "d", "e"], 3))
            elif kind == "markdown":
                self.core.gui_set_prop(uid, "content", rng.choice(["# new", "updated"]))
            else:
                self.core.gui_set_prop(uid, "label", rng.choice(["L1", "L2", "L3"]))
        except ValidationError:
            pass

    def _op_gui_remove(self) -> None:
        uid = self._pick_gui()
        if uid is None:
            return
        self.core.gui_remove(uid)
        doomed = {uid}
        changed = True
        while changed:
            changed = False
            for u, c in self.gui_container.items():
                if u not in doomed and c in doomed:
                    doomed.add(u)
                    changed = True
        for u in doomed:
            self.gui_kinds.pop(u, None)
            self.gui_container.pop(u, None)


# ---------------------------------------------------------------------------
# naive message-level oracle: plain dicts, no validation, no shared code with
# the real state machines


def naive_initial_state() -> dict:
    return {
        "scene": {"/": dict(kind="placeholder", props={}, pose=None, visible=True, clickable=False)},
        "gui": {},
    }


def naive_apply(state: dict, msg) -> None:
    t = msg.type
    p = msg.payload
    scene = state["scene"]
    gui = state["gui"]
    if t.startswith("scene_upsert_"):
        path = p["path"]
        parts = [s for s in path.split("/") if s]
        for i in range(1, len(parts)):
            ancestor = "/" + "/".join(parts[:i])
            scene.setdefault(
                ancestor,
                dict(kind="placeholder", props={}, pose=None, visible=True, clickable=False),
            )
        scene[path] = dict(
            kind=t[len("scene_upsert_"):],
            props={k: v for k, v in p.items() if k not in _NODE_COMMON},
            pose=(tuple(p["wxyz"]), tuple(p["position"])),
            visible=p["visible"],
            clickable=p["clickable"],
        )
    elif t == "scene_set_pose":
        if p["path"] in scene:
            scene[p["path"]]["pose"] = (tuple(p["wxyz"]), tuple(p["position"]))
    elif t == "scene_set_visible":
        if p["path"] in scene:
            scene[p["path"]]["visible"] = p["visible"]
    elif t == "scene_set_clickable":
        if p["path"] in scene:
            scene[p["path"]]["clickable"] = p["clickable"]
    elif t.startswith("scene_set_") and t.endswith("_prop"):
        if p["path"] in scene:
            scene[p["path"]]["props"][p["name"]] = p["value"]
    elif t == "scene_remove":
        prefix = p["path"] + "/"
        for path in [q for q in scene if q == p["path"] or q.startswith(prefix)]:
            del scene[path]
        # prune childless placeholder ancestors, mirroring removal semantics
        parts = [s for s in p["path"].split("/") if s]
        for i in range(len(parts) - 1, 0, -1):
            ancestor = "/" + "/".join(parts[:i])
            entry = scene.get(ancestor)
            if entry is None or entry["kind"] != "placeholder":
                break
            if any(q.startswith(ancestor + "/") for q in scene):
                break
            del scene[ancestor]
    elif t.startswith("gui_add_"):
        gui[p["uid"]] = dict(
            kind=t[len("gui_add_"):],
            container=p["container_uid"],
            order=p["order"],
            props={k: v for k, v in p.items() if k not in _GUI_COMMON},
            value=p.get("value"),
        )
    elif t.startswith("gui_set_") and t.endswith("_prop"):
        if p["uid"] in gui:
            gui[p["uid"]]["props"][p["name"]] = p["value"]
    elif t.startswith("gui_set_") and t.endswith("_value"):
        if p["uid"] in gui:
            gui[p["uid"]]["value"] = p["value"]
    elif t == "gui_remove":
        for uid in [p["uid"], *p["subtree_uids"]]:
            gui.pop(uid, None)
    elif t == "camera_set":
        state["camera"] = dict(p)
    else:
        raise AssertionError(f"oracle cannot apply {t}")


def naive_replay(messages) -> dict:
    state = naive_initial_state()
    for msg in messages:
        naive_apply(state, msg)
    return state
