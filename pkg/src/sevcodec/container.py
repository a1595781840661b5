"""SEV bitstream container and end-to-end encode/decode orchestration."""

import io
import shlex
import struct
import subprocess
import tempfile
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image

from .downsample import downsample
from .entropy import CompressedChunk, CorruptStreamError, compress_chunk, decompress_chunk
from .softedge import Codebook, SoftEdgeMap, detect_edges, fit_codebook, quantize_soft_edges
from .video import Frame, VideoSequence, partition_frames, rgb_to_luma

MAGIC = b"SEVC"
VERSION = 1

KEY_CODEC_RAW = 0
KEY_CODEC_EXT = 1

SEM_MAGIC = b"SEM1"


class ContainerError(ValueError):
    pass


def _write_varint(out: bytearray, value: int):
    while True:
        byte = value & 0x7F
        value >>= 7
        if value:
            out.append(byte | 0x80)
        else:
            out.append(byte)
            return


def _read_varint(data: bytes, pos: int):
    value = 0
    shift = 0
    while True:
        if pos >= len(data):
            raise ContainerError("truncated varint")
        byte = data[pos]
        pos += 1
        value |= (byte & 0x7F) << shift
        if not byte & 0x80:
            return value, pos
        shift += 7


@dataclass(frozen=True)
class SevHeader:
    width: int
    height: int
    fps: Fraction
    frame_count: int
    scale: int
    k: int
    kmeans_seed: int
    canny_low: int
    canny_high: int
    key_codec_id: int
    key_indices: tuple
    palette: np.ndarray  # (effective_count, 3) uint8

    def __post_init__(self):
        if not self.key_indices or self.key_indices[0] != 0:
            raise ContainerError("first key index must be 0")
        if any(b >= a for a, b in zip(self.key_indices[1:], self.key_indices)):
            raise ContainerError("key indices must be strictly increasing")

    @property
    def effective_count(self) -> int:
        return self.palette.shape[0]

    @property
    def map_width(self) -> int:
        return -(-self.width // self.scale)

    @property
    def map_height(self) -> int:
        return -(-self.height // self.scale)

    def codebook(self) -> Codebook:
        return Codebook(k=self.k, centroids=self.palette)

    def to_bytes(self) -> bytes:
        out = bytearray()
        out += MAGIC
        out.append(VERSION)
        out += struct.pack(
            "<HHIIIBBBQBBBI",
            self.width,
            self.height,
            self.fps.numerator,
            self.fps.denominator,
            self.frame_count,
            self.scale,
            self.k,
            self.effective_count,
            self.kmeans_seed,
            self.canny_low,
            self.canny_high,
            self.key_codec_id,
            len(self.key_indices),
        )
        prev = 0
        for idx in self.key_indices:
            _write_varint(out, idx - prev)
            prev = idx
        out += self.palette.tobytes()
        return bytes(out)

    @classmethod
    def from_bytes(cls, data: bytes, offset: int = 0):
        pos = offset
        if data[pos : pos + 4] != MAGIC:
            raise ContainerError(
                f"bad magic {data[pos : pos + 4]!r}, expected {MAGIC!r}"
            )
        pos += 4
        if pos >= len(data):
            raise ContainerError("truncated header")
        version = data[pos]
        pos += 1
        if version != VERSION:
            raise ContainerError(f"unsupported version {version}")
        try:
            (
                width,
                height,
                fps_num,
                fps_den,
                frame_count,
                scale,
                k,
                effective_count,
                kmeans_seed,
                canny_low,
                canny_high,
                key_codec_id,
                key_frame_count,
            ) = struct.unpack_from("<HHIIIBBBQBBBI", data, pos)
        except struct.error:
            raise ContainerError("truncated header") from None
        pos += struct.calcsize("<HHIIIBBBQBBBI")
        indices = []
        prev = 0
        for i in range(key_frame_count):
            delta, pos = _read_varint(data, pos)
            if i > 0 and delta == 0:
                raise ContainerError("key indices not strictly increasing")
            prev += delta
            indices.append(prev)
        pal_len = effective_count * 3
        palette = np.frombuffer(data, np.uint8, pal_len, pos).reshape(-1, 3).copy()
        if palette.shape[0] != effective_count:
            raise ContainerError("truncated palette")
        pos += pal_len
        header = cls(
            width=width,
            height=height,
            fps=Fraction(fps_num, fps_den),
            frame_count=frame_count,
            scale=scale,
            k=k,
            kmeans_seed=kmeans_seed,
            canny_low=canny_low,
            canny_high=canny_high,
            key_codec_id=key_codec_id,
            key_indices=tuple(indices),
            palette=palette,
        )
        return header, pos - offset


@dataclass(frozen=True)
class SevFile:
    header: SevHeader
    key_payload: bytes
    chunks: tuple  # CompressedChunk per nonempty GOP, in key-frame order

    def __eq__(self, other):
        if not isinstance(other, SevFile):
            return NotImplemented
        return serialize_container(self) == serialize_container(other)

    def section_sizes(self) -> dict:
        return {
            "header": len(self.header.to_bytes()),
            "key_payload": 8 + len(self.key_payload),
            "chunks": 4 + sum(c.size_bytes for c in self.chunks),
        }


def serialize_container(file: SevFile) -> bytes:
    out = bytearray()
    out += file.header.to_bytes()
    out += struct.pack("<Q", len(file.key_payload))
    out += file.key_payload
    out += struct.pack("<I", len(file.chunks))
    for chunk in file.chunks:
        out += chunk.to_bytes()
    return bytes(out)


def parse_container(data: bytes) -> SevFile:
    header, pos = SevHeader.from_bytes(data)
    try:
        (payload_len,) = struct.unpack_from("<Q", data, pos)
    except struct.error:
        raise ContainerError("truncated key payload length") from None
    pos += 8
    key_payload = bytes(data[pos : pos + payload_len])
    if len(key_payload) != payload_len:
        raise ContainerError("truncated key payload")
    pos += payload_len
    try:
        (chunk_count,) = struct.unpack_from("<I", data, pos)
    except struct.error:
        raise ContainerError("truncated chunk count") from None
    pos += 4
    chunks = []
    for i in range(chunk_count):
        try:
            chunk, used = CompressedChunk.from_bytes(
                data, header.map_width, header.map_height, pos
            )
        except CorruptStreamError as exc:
            raise CorruptStreamError(f"chunk {i}: {exc}") from exc
        chunks.append(chunk)
        pos += used
    if pos != len(data):
        raise ContainerError(f"{len(data) - pos} trailing bytes after last chunk")
    return SevFile(header=header, key_payload=key_payload, chunks=tuple(chunks))


class RawPngCodec:
    """Lossless key-frame codec storing PNG-compressed frames.

    Deterministic and dependency-free; the test suite's E1/D1.
    """

    codec_id = KEY_CODEC_RAW

    def encode(self, frames, quality=None, fps=None) -> bytes:
        out = bytearray(struct.pack("<I", len(frames)))
        for frame in frames:
            buf = io.BytesIO()
            Image.fromarray(frame.pixels).save(buf, format="PNG")
            blob = buf.getvalue()
            out += struct.pack("<I", len(blob))
            out += blob
        return bytes(out)

    def decode(self, blob, width=None, height=None, count=None, fps=None):
        try:
            (n,) = struct.unpack_from("<I", blob, 0)
            pos = 4
            frames = []
            for _ in range(n):
                (size,) = struct.unpack_from("<I", blob, pos)
                pos += 4
                img = Image.open(io.BytesIO(blob[pos : pos + size])).convert("RGB")
                frames.append(Frame(pixels=np.asarray(img, dtype=np.uint8)))
                pos += size
            return frames
        except (struct.error, OSError) as exc:
            raise ContainerError(f"key payload decode failed: {exc}") from exc


class ExternalCodec:
    """E1/D1 adapter spawning an external encoder/decoder command.

    Command templates take {w} {h} {fps} {quality} {in} {out} placeholders;
    frames cross the boundary as raw RGB24.
    """

    codec_id = KEY_CODEC_EXT

    def __init__(self, encode_cmd: str, decode_cmd: str):
        self.encode_cmd = encode_cmd
        self.decode_cmd = decode_cmd

    def _run(self, template, w, h, fps, quality, in_path, out_path):
        cmd = [
            part.format(
                w=w, h=h, fps=fps, quality=quality, **{"in": in_path, "out": out_path}
            )
            for part in shlex.split(template)
        ]
        proc = subprocess.run(cmd, capture_output=True)
        if proc.returncode != 0:
            raise ContainerError(
                f"external codec failed ({proc.returncode}): "
                f"{' '.join(cmd)}\n{proc.stderr.decode(errors='replace')}"
            )

    def encode(self, frames, quality=None, fps=None) -> bytes:
        w, h = frames[0].width, frames[0].height
        with tempfile.TemporaryDirectory() as tmp:
            in_path = str(Path(tmp) / "in.rgb")
            out_path = str(Path(tmp) / "out.bin")
            with open(in_path, "wb") as fh:
                for frame in frames:
                    fh.write(frame.pixels.tobytes())
            self._run(self.encode_cmd, w, h, fps, quality, in_path, out_path)
            return Path(out_path).read_bytes()

    def decode(self, blob, width, height, count, fps=None):
        with tempfile.TemporaryDirectory() as tmp:
            in_path = str(Path(tmp) / "in.bin")
            out_path = str(Path(tmp) / "out.rgb")
            Path(in_path).write_bytes(blob)
            self._run(self.decode_cmd, width, height, fps, None, in_path, out_path)
            raw = Path(out_path).read_bytes()
        expect = width * height * 3 * count
        if len(raw) != expect:
            raise ContainerError(
                f"external decoder produced {len(raw)} bytes, expected {expect}"
            )
        frames = np.frombuffer(raw, np.uint8).reshape(count, height, width, 3)
        return [Frame(pixels=f.copy()) for f in frames]


@dataclass
class EncodeConfig:
    alpha: float = 0.01
    scale: int = 8
    k: int = 8
    canny_low: int = 50
    canny_high: int = 150
    kmeans_seed: int = 0
    quality: int = 23
    key_codec: object = field(default_factory=RawPngCodec)


@dataclass(frozen=True)
class EncodeResult:
    sev: SevFile
    key_maps: tuple  # encoder-side regenerable maps, kept as a test tap
    g_maps: dict  # frame index -> SoftEdgeMap


def _soft_edge_map(frame, scale, low, high, book):
    small = downsample(frame, scale)
    edges = detect_edges(rgb_to_luma(small), low, high)
    return quantize_soft_edges(small, edges, book)


def _gop_slices(key_indices, frame_count):
    """G-frame index ranges between consecutive key frames."""
    keys = list(key_indices)
    gops = []
    for i, start in enumerate(keys):
        end = keys[i + 1] if i + 1 < len(keys) else frame_count
        gops.append([t for t in range(start + 1, end)])
    return gops


def encode_video(video: VideoSequence, config: EncodeConfig) -> EncodeResult:
    """Two-stage encode: E1 on key frames, soft-edge chunks for G-frames.

    The codebook is fitted on the E1-decoded key frames so the receiver can
    regenerate the key-frame maps from the transmitted palette alone.
    """
    codec = config.key_codec
    part = partition_frames(len(video), config.alpha)
    key_frames = [video.frames[i] for i in part.key_indices]
    key_payload = codec.encode(key_frames, quality=config.quality, fps=video.fps)
    decoded_keys = codec.decode(
        key_payload, video.width, video.height, len(key_frames), fps=video.fps
    )

    edge_colors = []
    small_keys = []
    key_edges = []
    for frame in decoded_keys:
        small = downsample(frame, config.scale)
        edges = detect_edges(rgb_to_luma(small), config.canny_low, config.canny_high)
        small_keys.append(small)
        key_edges.append(edges)
        edge_colors.append(small.pixels[edges.mask.astype(bool)])
    pooled = (
        np.concatenate(edge_colors) if edge_colors else np.zeros((0, 3), np.uint8)
    )
    book = fit_codebook(pooled, config.k, config.kmeans_seed)

    key_maps = tuple(
        quantize_soft_edges(small, edges, book)
        for small, edges in zip(small_keys, key_edges)
    )

    g_maps = {}
    for t in part.g_indices:
        g_maps[t] = _soft_edge_map(
            video.frames[t], config.scale, config.canny_low, config.canny_high, book
        )

    chunks = []
    for gop in _gop_slices(part.key_indices, len(video)):
        if gop:
            chunks.append(compress_chunk([g_maps[t] for t in gop]))

    header = SevHeader(
        width=video.width,
        height=video.height,
        fps=video.fps,
        frame_count=len(video),
        scale=config.scale,
        k=config.k,
        kmeans_seed=config.kmeans_seed,
        canny_low=config.canny_low,
        canny_high=config.canny_high,
        key_codec_id=codec.codec_id,
        key_indices=part.key_indices,
        palette=book.centroids,
    )
    sev = SevFile(header=header, key_payload=key_payload, chunks=tuple(chunks))
    return EncodeResult(sev=sev, key_maps=key_maps, g_maps=g_maps)


@dataclass(frozen=True)
class DecodedVideo:
    header: SevHeader
    key_frames: tuple  # Frame per key index, in order
    key_maps: tuple  # regenerated SoftEdgeMap per key index
    g_maps: dict  # frame index -> SoftEdgeMap
    palette: Codebook


def decode_sev(file: SevFile, key_codec=None) -> DecodedVideo:
    """D1-decode key frames, regenerate their maps, expand G-frame chunks."""
    header = file.header
    if key_codec is None:
        if header.key_codec_id == KEY_CODEC_RAW:
            key_codec = RawPngCodec()
        else:
            raise ContainerError(
                "external key codec requires an explicit decoder configuration"
            )
    key_frames = key_codec.decode(
        file.key_payload,
        header.width,
        header.height,
        len(header.key_indices),
        fps=header.fps,
    )
    book = header.codebook()
    key_maps = tuple(
        _soft_edge_map(f, header.scale, header.canny_low, header.canny_high, book)
        for f in key_frames
    )

    gops = [g for g in _gop_slices(header.key_indices, header.frame_count) if g]
    if len(gops) != len(file.chunks):
        raise ContainerError(
            f"{len(file.chunks)} chunks but {len(gops)} nonempty GOPs"
        )
    g_maps = {}
    for gop_idx, (gop, chunk) in enumerate(zip(gops, file.chunks)):
        if chunk.frame_count != len(gop):
            raise CorruptStreamError(
                f"GOP {gop_idx}: chunk holds {chunk.frame_count} frames, "
                f"expected {len(gop)}"
            )
        try:
            maps = decompress_chunk(chunk)
        except CorruptStreamError as exc:
            raise CorruptStreamError(f"GOP {gop_idx}: {exc}") from exc
        for t, m in zip(gop, maps):
            g_maps[t] = m
    return DecodedVideo(
        header=header,
        key_frames=tuple(key_frames),
        key_maps=key_maps,
        g_maps=g_maps,
        palette=book,
    )


@dataclass(frozen=True)
class BitrateReport:
    total_kbps: float
    key_kbps: float
    g_kbps: float
    header_kbps: float
    total_bits: int
    key_bits: int
    g_bits: int
    header_bits: int


def bitrate_kbps(file: SevFile) -> BitrateReport:
    """Overall Kbps of the serialized stream plus the key/G/header split."""
    sizes = file.section_sizes()
    total_bits = 8 * sum(sizes.values())
    key_bits = 8 * sizes["key_payload"]
    g_bits = 8 * sum(c.size_bytes for c in file.chunks)
    # structural framing (header + chunk count) goes to the header share
    header_bits = total_bits - key_bits - g_bits
    header = file.header
    seconds_inv = header.fps / header.frame_count  # 1 / duration
    scale = float(seconds_inv) / 1000.0
    return BitrateReport(
        total_kbps=total_bits * scale,
        key_kbps=key_bits * scale,
        g_kbps=g_bits * scale,
        header_kbps=header_bits * scale,
        total_bits=total_bits,
        key_bits=key_bits,
        g_bits=g_bits,
        header_bits=header_bits,
    )


def write_sem(path, decoded: DecodedVideo) -> None:
    """Emit the uncompressed SEM interchange file for the neural decoder."""
    header = decoded.header
    entries = [(i, 1, m) for i, m in zip(header.key_indices, decoded.key_maps)]
    entries += [(i, 0, m) for i, m in sorted(decoded.g_maps.items())]
    entries.sort()
    out = bytearray()
    out += SEM_MAGIC
    out += struct.pack(
        "<HHBB", header.map_width, header.map_height, header.k, header.effective_count
    )
    out += header.palette.tobytes()
    out += struct.pack("<I", len(entries))
    for idx, is_key, m in entries:
        out += struct.pack("<IB", idx, is_key)
        out += m.labels.tobytes()
    Path(path).write_bytes(bytes(out))


@dataclass(frozen=True)
class SemFile:
    width: int
    height: int
    k: int
    palette: np.ndarray
    entries: tuple  # (frame_index, is_key, SoftEdgeMap)


def read_sem(path) -> SemFile:
    data = Path(path).read_bytes()
    if data[:4] != SEM_MAGIC:
        raise ContainerError(f"bad SEM magic {data[:4]!r}")
    width, height, k, eff = struct.unpack_from("<HHBB", data, 4)
    pos = 4 + struct.calcsize("<HHBB")
    palette = np.frombuffer(data, np.uint8, eff * 3, pos).reshape(-1, 3).copy()
    pos += eff * 3
    (count,) = struct.unpack_from("<I", data, pos)
    pos += 4
    plane = width * height
    entries = []
    for _ in range(count):
        idx, is_key = struct.unpack_from("<IB", data, pos)
        pos += 5
        labels = np.frombuffer(data, np.uint8, plane, pos).reshape(height, width)
        pos += plane
        entries.append((idx, is_key, SoftEdgeMap(labels=labels.copy(), k=k)))
    if pos != len(data):
        raise ContainerError("trailing bytes in SEM file")
    return SemFile(width=width, height=height, k=k, palette=palette, entries=tuple(entries))
