"""Core raster types, video ingestion and key/G-frame partitioning."""

import re
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np
from PIL import Image


class VideoIOError(RuntimeError):
    pass


# BT.601 luma weights scaled by 1000 so the conversion is pure integer math.
_LUMA_WEIGHTS = np.array([299, 587, 114], dtype=np.int64)


@dataclass(frozen=True)
class Frame:
    """A single 8-bit RGB frame, stored as an (H, W, 3) uint8 array."""

    pixels: np.ndarray

    def __post_init__(self):
        p = self.pixels
        if p.ndim != 3 or p.shape[2] != 3 or p.dtype != np.uint8:
            raise ValueError(f"expected (H, W, 3) uint8 array, got {p.shape} {p.dtype}")

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]


@dataclass(frozen=True)
class LumaPlane:
    """Single-channel 8-bit luminance plane, (H, W) uint8."""

    values: np.ndarray

    def __post_init__(self):
        v = self.values
        if v.ndim != 2 or v.dtype != np.uint8:
            raise ValueError(f"expected (H, W) uint8 array, got {v.shape} {v.dtype}")

    @property
    def width(self) -> int:
        return self.values.shape[1]

    @property
    def height(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class VideoSequence:
    frames: tuple
    fps: Fraction

    def __post_init__(self):
        if len(self.frames) < 1:
            raise ValueError("a video needs at least one frame")
        if self.fps <= 0:
            raise ValueError("fps must be positive")
        w, h = self.frames[0].width, self.frames[0].height
        for i, f in enumerate(self.frames):
            if f.width != w or f.height != h:
                raise ValueError(
                    f"frame {i} is {f.width}x{f.height}, expected {w}x{h}"
                )

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    def __len__(self) -> int:
        return len(self.frames)


@dataclass(frozen=True)
class FramePartition:
    """Split of frame indices into key frames and G-frames."""

    key_indices: tuple
    g_indices: tuple
    alpha: float

    def __post_init__(self):
        if not self.key_indices or self.key_indices[0] != 0:
            raise ValueError("frame 0 must be a key frame")
        if set(self.key_indices) & set(self.g_indices):
            raise ValueError("key and G index sets overlap")

    @property
    def n_frames(self) -> int:
        return len(self.key_indices) + len(self.g_indices)


def partition_frames(n_frames: int, alpha: float) -> FramePartition:
    """Deterministic uniform key-frame placement anchored at frame 0.

    The key-frame count is max(1, round(alpha * n_frames)) with round-half-up;
    keys sit at i * floor(N / N_I).
    """
    if n_frames < 1:
        raise ValueError("n_frames must be >= 1")
    if not 0 < alpha <= 1:
        raise ValueError(f"alpha must be in (0, 1], got {alpha}")
    n_key = max(1, int(np.floor(alpha * n_frames + 0.5)))
    step = n_frames // n_key
    keys = tuple(i * step for i in range(n_key))
    key_set = set(keys)
    gs = tuple(i for i in range(n_frames) if i not in key_set)
    return FramePartition(key_indices=keys, g_indices=gs, alpha=alpha)


def rgb_to_luma(frame: Frame) -> LumaPlane:
    """BT.601 luma, round-half-up, in integer arithmetic."""
    acc = frame.pixels.astype(np.int64) @ _LUMA_WEIGHTS
    y = (acc + 500) // 1000
    return LumaPlane(values=np.clip(y, 0, 255).astype(np.uint8))


_NUMBERED_PNG = re.compile(r"^(\d+)\.png$")


def load_video(path, fps=Fraction(25)) -> VideoSequence:
    """Load a directory of numbered PNGs or a single Y4M file.

    For Y4M input the fps argument is ignored in favour of the stream header.
    """
    path = Path(path)
    fps = Fraction(fps)
    if path.is_dir():
        return _load_png_dir(path, fps)
    if path.is_file() and path.suffix.lower() == ".y4m":
        return _load_y4m(path)
    raise VideoIOError(f"not a frame directory or .y4m file: {path}")


def _load_png_dir(path: Path, fps: Fraction) -> VideoSequence:
    entries = []
    for p in path.iterdir():
        m = _NUMBERED_PNG.match(p.name)
        if m:
            entries.append((int(m.group(1)), p))
    if not entries:
        raise VideoIOError(f"no numbered .png frames in {path}")
    entries.sort()
    frames = []
    shape = None
    for _, p in entries:
        try:
            arr = np.asarray(Image.open(p).convert("RGB"), dtype=np.uint8)
        except Exception as exc:
            raise VideoIOError(f"cannot decode {p}: {exc}") from exc
        if shape is None:
            shape = arr.shape
        elif arr.shape != shape:
            raise VideoIOError(
                f"{p} is {arr.shape[1]}x{arr.shape[0]}, expected "
                f"{shape[1]}x{shape[0]}"
            )
        frames.append(Frame(pixels=arr))
    return VideoSequence(frames=tuple(frames), fps=fps)


def save_frames(video_or_frames, out_dir, indices=None) -> None:
    """Re-emit frames as zero-padded numbered PNGs."""
    frames = getattr(video_or_frames, "frames", video_or_frames)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    if indices is None:
        indices = range(len(frames))
    pad = max(3, len(str(max(indices, default=0))))
    for idx, frame in zip(indices, frames):
        Image.fromarray(frame.pixels).save(out_dir / f"{idx:0{pad}d}.png")


def _load_y4m(path: Path) -> VideoSequence:
    data = path.read_bytes()
    nl = data.find(b"\n")
    if nl < 0 or not data.startswith(b"YUV4MPEG2"):
        raise VideoIOError(f"{path}: not a Y4M stream")
    width = height = None
    fps = None
    colorspace = "420"
    for token in data[:nl].split(b" ")[1:]:
        if not token:
            continue
        tag, val = chr(token[0]), token[1:].decode("ascii", "replace")
        if tag == "W":
            width = int(val)
        elif tag == "H":
            height = int(val)
        elif tag == "F":
            num, den = val.split(":")
            fps = Fraction(int(num), int(den))
        elif tag == "C":
            colorspace = val
    if width is None or height is None or fps is None:
        raise VideoIOError(f"{path}: Y4M header missing W/H/F")
    if not colorspace.startswith("420"):
        raise VideoIOError(f"{path}: only C420 supported, got C{colorspace}")
    if width % 2 or height % 2:
        raise VideoIOError(f"{path}: C420 needs even dimensions")

    y_size = width * height
    c_size = (width // 2) * (height // 2)
    frames = []
    pos = nl + 1
    while pos < len(data):
        fnl = data.find(b"\n", pos)
        if fnl < 0 or not data[pos:fnl].startswith(b"FRAME"):
            raise VideoIOError(f"{path}: malformed FRAME marker at byte {pos}")
        pos = fnl + 1
        end = pos + y_size + 2 * c_size
        if end > len(data):
            raise VideoIOError(f"{path}: truncated frame payload at byte {pos}")
        y = np.frombuffer(data, np.uint8, y_size, pos).reshape(height, width)
        cb = np.frombuffer(data, np.uint8, c_size, pos + y_size).reshape(
            height // 2, width // 2
        )
        cr = np.frombuffer(data, np.uint8, c_size, pos + y_size + c_size).reshape(
            height // 2, width // 2
        )
        frames.append(Frame(pixels=_yuv420_to_rgb(y, cb, cr)))
        pos = end
    if not frames:
        raise VideoIOError(f"{path}: no frames in stream")
    return VideoSequence(frames=tuple(frames), fps=fps)


def _bilinear_2x(plane: np.ndarray) -> np.ndarray:
    """Separable 2x bilinear upsample with centre-aligned samples.

    Each output pair around source sample i mixes 3/4 of c[i] with 1/4 of the
    adjacent sample, clamped at the edges.
    """
    out = plane.astype(np.float64)
    for axis in (0, 1):
        c = np.moveaxis(out, axis, 0)
        prev = np.concatenate([c[:1], c[:-1]], axis=0)
        nxt = np.concatenate([c[1:], c[-1:]], axis=0)
        up = np.empty((2 * c.shape[0],) + c.shape[1:], dtype=np.float64)
        up[0::2] = 0.75 * c + 0.25 * prev
        up[1::2] = 0.75 * c + 0.25 * nxt
        out = np.moveaxis(up, 0, axis)
    return out


def _yuv420_to_rgb(y: np.ndarray, cb: np.ndarray, cr: np.ndarray) -> np.ndarray:
    """BT.601 full-range YCbCr to RGB with bilinear chroma upsampling."""
    yf = y.astype(np.float64)
    cbf = _bilinear_2x(cb) - 128.0
    crf = _bilinear_2x(cr) - 128.0
    r = yf + 1.402 * crf
    g = yf - 0.344136 * cbf - 0.714136 * crf
    b = yf + 1.772 * cbf
    rgb = np.stack([r, g, b], axis=-1)
    return np.clip(np.floor(rgb + 0.5), 0, 255).astype(np.uint8)
