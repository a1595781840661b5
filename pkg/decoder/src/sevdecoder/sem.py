"""Reader for the SEM soft-edge-map interchange format.

Layout: "SEM1" | width:u16 | height:u16 | k:u8 | effective_count:u8 |
palette (effective_count x 3 RGB bytes) | frame_count:u32 | per frame:
frame_index:u32, is_key:u8, width*height label bytes. Little-endian.
"""

import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAGIC = b"SEM1"


class SemFormatError(ValueError):
    pass


@dataclass(frozen=True)
class SemEntry:
    frame_index: int
    is_key: bool
    labels: np.ndarray  # (H, W) uint8


@dataclass(frozen=True)
class SemFile:
    width: int
    height: int
    k: int
    palette: np.ndarray  # (effective_count, 3) uint8
    entries: tuple

    @property
    def key_entries(self):
        return tuple(e for e in self.entries if e.is_key)

    @property
    def g_entries(self):
        return tuple(e for e in self.entries if not e.is_key)


def load_sem(path) -> SemFile:
    data = Path(path).read_bytes()
    if data[:4] != MAGIC:
        raise SemFormatError(f"bad magic {data[:4]!r}, expected {MAGIC!r}")
    try:
        width, height, k, eff = struct.unpack_from("<HHBB", data, 4)
    except struct.error:
        raise SemFormatError("truncated SEM header") from None
    pos = 4 + struct.calcsize("<HHBB")
    if len(data) - pos < eff * 3:
        raise SemFormatError("truncated palette")
    palette = np.frombuffer(data, np.uint8, eff * 3, pos).reshape(-1, 3).copy()
    pos += eff * 3
    try:
        (count,) = struct.unpack_from("<I", data, pos)
    except struct.error:
        raise SemFormatError("truncated frame count") from None
    pos += 4
    plane = width * height
    entries = []
    for i in range(count):
        try:
            idx, is_key = struct.unpack_from("<IB", data, pos)
        except struct.error:
            raise SemFormatError(f"truncated entry header {i}") from None
        pos += 5
        if len(data) - pos < plane:
            raise SemFormatError(f"truncated labels for entry {i}")
        labels = np.frombuffer(data, np.uint8, plane, pos)
        if labels.size and int(labels.max()) > eff:
            raise SemFormatError(f"entry {i} references centroid beyond palette")
        entries.append(
            SemEntry(
                frame_index=idx,
                is_key=bool(is_key),
                labels=labels.reshape(height, width).copy(),
            )
        )
        pos += plane
    if pos != len(data):
        raise SemFormatError(f"{len(data) - pos} trailing bytes")
    return SemFile(width=width, height=height, k=k, palette=palette, entries=tuple(entries))


def save_sem(path, width, height, k, palette, entries) -> None:
    """Writer mirroring load_sem; used for synthetic corpora and tests."""
    palette = np.asarray(palette, np.uint8).reshape(-1, 3)
    out = bytearray()
    out += MAGIC
    out += struct.pack("<HHBB", width, height, k, palette.shape[0])
    out += palette.tobytes()
    out += struct.pack("<I", len(entries))
    for entry in entries:
        out += struct.pack("<IB", entry.frame_index, 1 if entry.is_key else 0)
        out += np.asarray(entry.labels, np.uint8).tobytes()
    Path(path).write_bytes(bytes(out))


def render_condition(labels: np.ndarray, palette: np.ndarray) -> np.ndarray:
    """Render a label map to RGB: label 0 black, label l to palette[l-1]."""
    lut = np.zeros((palette.shape[0] + 1, 3), np.uint8)
    lut[1:] = palette
    return lut[labels]
