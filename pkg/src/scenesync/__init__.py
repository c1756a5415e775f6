"""scenesync: an imperative 3D scene + GUI visualization server whose state
is mirrored to any number of web or headless clients over WebSockets."""

from .api import ClickEvent, ServerCore, Subscription, ViewerServer, create_server
from .buffering import CameraState
from .errors import SceneSyncError
from .guicore import GuiEvent
from .headless import HeadlessSession, connect
from .protocol import SCHEMA, SCHEMA_HASH
from .scenegraph import Pose, parse_path

__version__ = "0.1.0"

__all__ = [
    "CameraState",
    "ClickEvent",
    "GuiEvent",
    "HeadlessSession",
    "Pose",
    "SCHEMA",
    "SCHEMA_HASH",
    "SceneSyncError",
    "ServerCore",
    "Subscription",
    "ViewerServer",
    "connect",
    "create_server",
    "parse_path",
    "__version__",
]
