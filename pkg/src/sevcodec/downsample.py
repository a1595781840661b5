"""Spatial box downsampling in exact integer arithmetic."""

import numpy as np

from .video import Frame


def downsample(frame: Frame, scale: int) -> Frame:
    """Per-channel box average over scale x scale blocks, round-half-up.

    Frames whose dimensions are not multiples of the scale are edge-replicated
    up to the next multiple first, so the output is ceil(W/s) x ceil(H/s).
    """
    if scale < 1:
        raise ValueError(f"scale must be >= 1, got {scale}")
    if scale == 1:
        return frame
    px = frame.pixels
    h, w = px.shape[:2]
    pad_h = (-h) % scale
    pad_w = (-w) % scale
    if pad_h or pad_w:
        px = np.pad(px, ((0, pad_h), (0, pad_w), (0, 0)), mode="edge")
    oh, ow = px.shape[0] // scale, px.shape[1] // scale
    blocks = px.reshape(oh, scale, ow, scale, 3).astype(np.int64)
    sums = blocks.sum(axis=(1, 3))
    area = scale * scale
    means = (sums + area // 2) // area
    return Frame(pixels=means.astype(np.uint8))
