"""Runnable demo scenes, sized for a desk: a synthetic point cloud with
camera frustums, two small GUI wiring patterns, and an animated kinematic
chain that exercises hierarchical transforms under streaming."""

from __future__ import annotations

import math
import threading
import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from .api import ViewerServer
from .errors import ValidationError

DEMO_NAMES = ("pointcloud_frustums", "slider_double", "counter", "kinematic_chain")

_POINT_SEED = 7


@dataclass
class DemoConfig:
    name: str
    host: str = "127.0.0.1"
    port: int = 8080

    def __post_init__(self):
        if self.name not in DEMO_NAMES:
            raise ValidationError(f"unknown demo {self.name!r}; choose from {DEMO_NAMES}")
        if not 0 <= self.port <= 65535:
            raise ValidationError(f"port {self.port} out of range")


@dataclass
class DemoInstance:
    """A running demo: the server plus any handles tests need to poke at."""

    server: ViewerServer
    handles: dict[str, Any] = field(default_factory=dict)
    _stop_event: threading.Event = field(default_factory=threading.Event)
    _animator: Optional[threading.Thread] = None

    def stop(self) -> None:
        self._stop_event.set()
        if self._animator is not None:
            self._animator.join(timeout=5)
        self.server.stop()

    def stop_animation(self) -> None:
        self._stop_event.set()
        if self._animator is not None:
            self._animator.join(timeout=5)


def _setup_pointcloud_frustums(server: ViewerServer, instance: DemoInstance) -> None:
    rng = np.random.default_rng(_POINT_SEED)
    n = 10_000
    # spiral galaxy-ish cloud: angle-correlated positions and colors
    theta = rng.uniform(0, 6 * math.pi, n).astype(np.float32)
    radius = rng.uniform(0.2, 2.0, n).astype(np.float32)
    points = np.stack(
        [radius * np.cos(theta), radius * np.sin(theta), 0.2 * rng.standard_normal(n).astype(np.float32)],
        axis=1,
    )
    colors = np.stack(
        [
            (127 + 120 * np.cos(theta)).astype(np.uint8),
            (127 + 120 * np.sin(theta)).astype(np.uint8),
            np.full(n, 200, dtype=np.uint8),
        ],
        axis=1,
    )
    instance.handles["points"] = server.scene.add_point_cloud(
        "/points", points, colors, point_size=0.01
    )
    server.scene.add_grid("/grid", width=6.0, height=6.0, cell_size=0.5)
    for i in range(5):
        angle = 2 * math.pi * i / 5
        instance.handles[f"camera_{i}"] = server.scene.add_camera_frustum(
            f"/cameras/{i}",
            fov=math.pi / 2.0,
            aspect=4.0 / 3.0,
            scale=0.25,
            position=(3.0 * math.cos(angle), 3.0 * math.sin(angle), 1.5),
            wxyz=(math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2)),
        )


def _setup_slider_double(server: ViewerServer, instance: DemoInstance) -> None:
    slider = server.gui.add_slider("Value", 0, 100)
    out = server.gui.add_text("0")

    @slider.on_update
    def _(_event):
        out.value = str(slider.value * 2)

    box = server.scene.add_box("/box", color=(90, 120, 255))
    clicks = server.gui.add_text("clicks: 0", label="Box clicks")

    @box.on_click
    def _(_event):
        n = int(clicks.value.split()[-1]) + 1
        clicks.value = f"clicks: {n}"

    instance.handles.update(slider=slider, out=out, box=box, clicks=clicks)


def _setup_counter(server: ViewerServer, instance: DemoInstance) -> None:
    counter = 0
    label = server.gui.add_text(f"Count: {counter}")
    button = server.gui.add_button("Increment")

    @button.on_click
    def _(_event):
        nonlocal counter
        counter += 1
        label.value = f"Count: {counter}"

    instance.handles.update(label=label, button=button)


_CHAIN_LINKS = 6


def _setup_kinematic_chain(server: ViewerServer, instance: DemoInstance) -> None:
    server.scene.add_grid("/grid", width=4.0, height=4.0, cell_size=0.25)
    links = []
    path = "/chain"
    for i in range(_CHAIN_LINKS):
        path = f"{path}/link{i}"
        links.append(
            server.scene.add_frame(
                path, axes_length=0.3, axes_radius=0.01,
                position=(0.4, 0.0, 0.0) if i else (0.0, 0.0, 0.4),
            )
        )
    instance.handles["links"] = links

    def animate() -> None:
        t0 = time.monotonic()
        while not instance._stop_event.is_set():
            t = time.monotonic() - t0
            for i, link in enumerate(links):
                angle = 0.8 * math.sin(t * 1.5 + 0.7 * i)
                link.wxyz = (math.cos(angle / 2), 0.0, 0.0, math.sin(angle / 2))
            time.sleep(1.0 / 30.0)

    instance._animator = threading.Thread(target=animate, name="chain-animator", daemon=True)
    instance._animator.start()


_SETUPS: dict[str, Callable[[ViewerServer, DemoInstance], None]] = {
    "pointcloud_frustums": _setup_pointcloud_frustums,
    "slider_double": _setup_slider_double,
    "counter": _setup_counter,
    "kinematic_chain": _setup_kinematic_chain,
}


def run_demo(config: DemoConfig, block: bool = True) -> DemoInstance:
    """Start a demo server. With block=True, runs until interrupted."""
    server = ViewerServer(config.host, config.port)
    instance = DemoInstance(server=server)
    try:
        _SETUPS[config.name](server, instance)
    except Exception:
        server.stop()
        raise
    if not block:
        return instance
    try:
        while True:
            time.sleep(1.0)
    except KeyboardInterrupt:
        pass
    finally:
        instance.stop()
    return instance
