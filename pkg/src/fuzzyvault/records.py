"""Binary layout shared by the vault record formats.

Every record starts with ``b"FVLT"``, a format version byte and a kind byte.
All integers are big-endian; lengths and angles are fixed-point 1/100.
"""
from __future__ import annotations

import struct

from .errors import VaultFormatError
from .field import DIGEST_SIZE

MAGIC = b"FVLT"
VERSION = 1
KIND_CLASSIC = 1
KIND_DESCRIPTOR = 2
KIND_GRID = 3

_HEAD = struct.Struct(">4sBB")


def fixed(v: float) -> int:
    return int(round(v * 100))


def unfixed(v: int) -> float:
    return v / 100.0


def header(kind: int) -> bytes:
    return _HEAD.pack(MAGIC, VERSION, kind)


def read_kind(data: bytes) -> int:
    """Kind byte of a record, after checking magic and version."""
    if len(data) < _HEAD.size:
        raise VaultFormatError("truncated vault record")
    magic, version, kind = _HEAD.unpack_from(data)
    if magic != MAGIC:
        raise VaultFormatError("not a vault record")
    if version != VERSION:
        raise VaultFormatError(f"unsupported record version {version}")
    return kind


class Reader:
    """Cursor over a record buffer that raises VaultFormatError on any overrun."""

    def __init__(self, data: bytes, kind: int):
        self.data = bytes(data)
        self.pos = 0
        magic, version, got = self.unpack(_HEAD)
        if magic != MAGIC:
            raise VaultFormatError("not a vault record")
        if version != VERSION:
            raise VaultFormatError(f"unsupported record version {version}")
        if got != kind:
            raise VaultFormatError(f"record kind {got}, expected {kind}")

    def unpack(self, st: struct.Struct):
        end = self.pos + st.size
        if end > len(self.data):
            raise VaultFormatError("truncated vault record")
        out = st.unpack_from(self.data, self.pos)
        self.pos = end
        return out

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise VaultFormatError("truncated vault record")
        out = self.data[self.pos:self.pos + n]
        self.pos += n
        return out

    def digest(self) -> bytes:
        return self.take(DIGEST_SIZE)

    def finish(self):
        if self.pos != len(self.data):
            raise VaultFormatError(f"{len(self.data) - self.pos} trailing bytes after record")
