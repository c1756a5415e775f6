"""MessagePack encoding for wire frames.

Self-contained implementation of the MessagePack subset the protocol uses:
nil, bool, int, float64, str, bin, array, and string-keyed map. Encoding is
canonical (smallest representation, floats always 64-bit) so that equal
values always produce identical bytes. Decoding is fail-closed: any
malformed input raises :class:`DecodeError` with the byte offset, and
trailing bytes after the top-level value are an error.
"""

from __future__ import annotations

import struct
from typing import Any

from .errors import DecodeError

# Nesting bound for decoding; deeper input is treated as malformed rather
# than risking interpreter recursion limits on hostile frames.
_MAX_DEPTH = 64

_INT64_MIN = -(1 << 63)
_UINT64_MAX = (1 << 64) - 1


def encode(value: Any) -> bytes:
    """Encode a value into MessagePack bytes."""
    out = bytearray()
    _encode_into(out, value)
    return bytes(out)


def _encode_into(out: bytearray, value: Any) -> None:
    if value is None:
        out.append(0xC0)
    elif value is True:
        out.append(0xC3)
    elif value is False:
        out.append(0xC2)
    elif isinstance(value, int):
        _encode_int(out, value)
    elif isinstance(value, float):
        out.append(0xCB)
        out += struct.pack(">d", value)
    elif isinstance(value, str):
        data = value.encode("utf-8")
        n = len(data)
        if n <= 31:
            out.append(0xA0 | n)
        elif n <= 0xFF:
            out += struct.pack(">BB", 0xD9, n)
        elif n <= 0xFFFF:
            out += struct.pack(">BH", 0xDA, n)
        else:
            out += struct.pack(">BI", 0xDB, n)
        out += data
    elif isinstance(value, (bytes, bytearray, memoryview)):
        data = bytes(value)
        n = len(data)
        if n <= 0xFF:
            out += struct.pack(">BB", 0xC4, n)
        elif n <= 0xFFFF:
            out += struct.pack(">BH", 0xC5, n)
        else:
            out += struct.pack(">BI", 0xC6, n)
        out += data
    elif isinstance(value, (list, tuple)):
        n = len(value)
        if n <= 15:
            out.append(0x90 | n)
        elif n <= 0xFFFF:
            out += struct.pack(">BH", 0xDC, n)
        else:
            out += struct.pack(">BI", 0xDD, n)
        for item in value:
            _encode_into(out, item)
    elif isinstance(value, dict):
        n = len(value)
        if n <= 15:
            out.append(0x80 | n)
        elif n <= 0xFFFF:
            out += struct.pack(">BH", 0xDE, n)
        else:
            out += struct.pack(">BI", 0xDF, n)
        for key, item in value.items():
            if not isinstance(key, str):
                raise TypeError(f"map keys must be str, got {type(key).__name__}")
            _encode_into(out, key)
            _encode_into(out, item)
    else:
        raise TypeError(f"cannot encode value of type {type(value).__name__}")


def _encode_int(out: bytearray, value: int) -> None:
    if value < _INT64_MIN or value > _UINT64_MAX:
        raise TypeError(f"integer out of 64-bit range: {value}")
    if 0 <= value <= 0x7F:
        out.append(value)
    elif -32 <= value < 0:
        out.append(value & 0xFF)
    elif value > 0:
        if value <= 0xFF:
            out += struct.pack(">BB", 0xCC, value)
        elif value <= 0xFFFF:
            out += struct.pack(">BH", 0xCD, value)
        elif value <= 0xFFFFFFFF:
            out += struct.pack(">BI", 0xCE, value)
        else:
            out += struct.pack(">BQ", 0xCF, value)
    else:
        if value >= -0x80:
            out += struct.pack(">Bb", 0xD0, value)
        elif value >= -0x8000:
            out += struct.pack(">Bh", 0xD1, value)
        elif value >= -0x80000000:
            out += struct.pack(">Bi", 0xD2, value)
        else:
            out += struct.pack(">Bq", 0xD3, value)


def decode(data: bytes) -> Any:
    """Decode a single MessagePack value; trailing bytes are an error."""
    decoder = _Decoder(data)
    value = decoder.read_value(0)
    if decoder.pos != len(data):
        raise DecodeError("trailing bytes after value", decoder.pos)
    return value


class _Decoder:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _take(self, n: int) -> bytes:
        end = self.pos + n
        if end > len(self.data):
            raise DecodeError("unexpected end of frame", self.pos)
        chunk = self.data[self.pos : end]
        self.pos = end
        return chunk

    def _unpack(self, fmt: str, size: int):
        return struct.unpack(fmt, self._take(size))[0]

    def read_value(self, depth: int) -> Any:
        if depth > _MAX_DEPTH:
            raise DecodeError("nesting too deep", self.pos)
        start = self.pos
        tag = self._take(1)[0]

        if tag <= 0x7F:  # positive fixint
            return tag
        if tag >= 0xE0:  # negative fixint
            return tag - 0x100
        if 0x80 <= tag <= 0x8F:
            return self._read_map(tag & 0x0F, depth)
        if 0x90 <= tag <= 0x9F:
            return self._read_array(tag & 0x0F, depth)
        if 0xA0 <= tag <= 0xBF:
            return self._read_str(tag & 0x1F, start)

        if tag == 0xC0:
            return None
        if tag == 0xC2:
            return False
        if tag == 0xC3:
            return True
        if tag == 0xC4:
            return self._take(self._unpack(">B", 1))
        if tag == 0xC5:
            return self._take(self._unpack(">H", 2))
        if tag == 0xC6:
            return self._take(self._unpack(">I", 4))
        if tag == 0xCA:
            return self._unpack(">f", 4)
        if tag == 0xCB:
            return self._unpack(">d", 8)
        if tag == 0xCC:
            return self._unpack(">B", 1)
        if tag == 0xCD:
            return self._unpack(">H", 2)
        if tag == 0xCE:
            return self._unpack(">I", 4)
        if tag == 0xCF:
            return self._unpack(">Q", 8)
        if tag == 0xD0:
            return self._unpack(">b", 1)
        if tag == 0xD1:
            return self._unpack(">h", 2)
        if tag == 0xD2:
            return self._unpack(">i", 4)
        if tag == 0xD3:
            return self._unpack(">q", 8)
        if tag == 0xD9:
            return self._read_str(self._unpack(">B", 1), start)
        if tag == 0xDA:
            return self._read_str(self._unpack(">H", 2), start)
        if tag == 0xDB:
            return self._read_str(self._unpack(">I", 4), start)
        if tag == 0xDC:
            return self._read_array(self._unpack(">H", 2), depth)
        if tag == 0xDD:
            return self._read_array(self._unpack(">I", 4), depth)
        if tag == 0xDE:
            return self._read_map(self._unpack(">H", 2), depth)
        if tag == 0xDF:
            return self._read_map(self._unpack(">I", 4), depth)

        raise DecodeError(f"unsupported type byte 0x{tag:02x}", start)

    def _read_str(self, n: int, start: int) -> str:
        raw = self._take(n)
        try:
            return raw.decode("utf-8")
        except UnicodeDecodeError:
            raise DecodeError("invalid utf-8 in string", start) from None

    def _read_array(self, n: int, depth: int) -> list:
        return [self.read_value(depth + 1) for _ in range(n)]

    def _read_map(self, n: int, depth: int) -> dict:
        out = {}
        for _ in range(n):
            key_pos = self.pos
            key = self.read_value(depth + 1)
            if not isinstance(key, str):
                raise DecodeError("map key is not a string", key_pos)
            out[key] = self.read_value(depth + 1)
        return out
