"""Exception types shared across the library."""

from __future__ import annotations


class SceneSyncError(Exception):
    """Base class for all library errors."""


class ValidationError(SceneSyncError):
    """A value failed validation against a schema or invariant."""


class RejectedValueError(ValidationError):
    """A client-supplied value was rejected (e.g. dropdown option not in the
    option list). Non-fatal: the update is dropped with a warning."""


class IllTypedValueError(ValidationError):
    """A client-supplied value has the wrong wire type. Fatal for the
    connection that sent it."""


class PathError(ValidationError):
    """A scene path string is not in canonical form."""


class UnknownPathError(SceneSyncError):
    """Operation addressed a scene path that does not exist."""


class UnknownUidError(SceneSyncError):
    """Operation addressed a GUI element uid that does not exist."""


class SchemaError(SceneSyncError):
    """A message type is unknown or a registry constraint was violated."""


class DecodeError(SceneSyncError):
    """A wire frame could not be decoded. Carries the byte offset at which
    decoding failed."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte {offset})")
        self.offset = offset


class ProtocolError(SceneSyncError):
    """A peer violated the framing or sequencing rules."""


class HandshakeRejectedError(SceneSyncError):
    """The server rejected this client's handshake."""

    def __init__(self, reason: str, server_hash: str = "", client_hash: str = ""):
        super().__init__(reason)
        self.reason = reason
        self.server_hash = server_hash
        self.client_hash = client_hash


class RemovedHandleError(SceneSyncError):
    """A handle was used after the element it refers to was removed."""


class StaleClientError(SceneSyncError):
    """A client handle was used after the client disconnected."""


class ServerStartupError(SceneSyncError):
    """The server could not start (e.g. the port is already bound)."""


class CodegenError(SceneSyncError):
    """A schema field type has no mapping in the declaration generator."""
