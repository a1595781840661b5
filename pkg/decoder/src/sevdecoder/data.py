"""Training pairs: (rendered soft edge condition, key frame target)."""

import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from .sem import SemFile, render_condition


class DataError(ValueError):
    pass


@dataclass(frozen=True)
class TrainingPair:
    frame_index: int
    condition: np.ndarray  # (res, res, 3) uint8, black or palette colors
    target: np.ndarray  # (res, res, 3) uint8


def nearest_upsample(img: np.ndarray, size: int) -> np.ndarray:
    """Nearest-neighbor resize to size x size (PIL semantics)."""
    return np.asarray(
        Image.fromarray(img).resize((size, size), Image.NEAREST), dtype=np.uint8
    )


def stretch_resize(img: np.ndarray, width: int, height: int) -> np.ndarray:
    return np.asarray(
        Image.fromarray(img).resize((width, height), Image.BILINEAR), dtype=np.uint8
    )


_NUMBERED_PNG = re.compile(r"^(\d+)\.png$")


def _keyframe_index(directory) -> dict:
    frames = {}
    for p in Path(directory).iterdir():
        m = _NUMBERED_PNG.match(p.name)
        if m:
            frames[int(m.group(1))] = p
    return frames


def build_training_pairs(sem: SemFile, keyframe_dir, resolution: int) -> list:
    """One pair per key-frame entry, matched to key frame PNGs by index."""
    if resolution & (resolution - 1):
        raise DataError(f"resolution {resolution} is not a power of two")
    keys = sem.key_entries
    if not keys:
        raise DataError("SEM file holds no key-frame entries: nothing to train on")
    available = _keyframe_index(keyframe_dir)
    pairs = []
    for entry in keys:
        if entry.frame_index not in available:
            raise DataError(
                f"key frame {entry.frame_index} missing from {keyframe_dir}"
            )
        rgb = render_condition(entry.labels, sem.palette)
        condition = nearest_upsample(rgb, resolution)
        target_img = Image.open(available[entry.frame_index]).convert("RGB")
        target = np.asarray(
            target_img.resize((resolution, resolution), Image.BILINEAR), dtype=np.uint8
        )
        pairs.append(
            TrainingPair(
                frame_index=entry.frame_index, condition=condition, target=target
            )
        )
    return pairs
