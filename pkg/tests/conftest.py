from fractions import Fraction

import numpy as np
import pytest

from sevcodec import Frame, SoftEdgeMap, VideoSequence


def make_rect_video(n_frames=16, width=64, height=48, step=1):
    """Synthetic moving-rectangle video with strong, stable edges."""
    frames = []
    for t in range(n_frames):
        px = np.zeros((height, width, 3), np.uint8)
        px[:, :] = (30, 60, 90)
        x = (5 + step * t) % (width - 20)
        px[height // 4 : 3 * height // 4, x : x + 15] = (200, 50, 50)
        px[height // 4 + 2 : 3 * height // 4 - 2, x + 3 : x + 12] = (60, 180, 220)
        frames.append(Frame(pixels=px))
    return VideoSequence(frames=tuple(frames), fps=Fraction(25))


def random_maps(rng, n_frames, width, height, k, zero_density):
    """Seeded random soft edge maps with the requested share of zeros."""
    maps = []
    for _ in range(n_frames):
        labels = rng.integers(1, k, size=(height, width), dtype=np.uint8)
        zero = rng.random((height, width)) < zero_density
        labels[zero] = 0
        maps.append(SoftEdgeMap(labels=labels, k=k))
    return maps


def run_structured_maps(rng, n_frames, width, height, k, mean_run=20):
    """Sparse maps whose nonzero content comes in long horizontal runs."""
    maps = []
    for _ in range(n_frames):
        labels = np.zeros(height * width, dtype=np.uint8)
        n_runs = max(1, (height * width) // (mean_run * 100))
        for _ in range(n_runs):
            start = int(rng.integers(0, height * width - mean_run))
            length = int(rng.integers(mean_run // 2, mean_run * 2))
            labels[start : start + length] = int(rng.integers(1, k))
        maps.append(SoftEdgeMap(labels=labels.reshape(height, width), k=k))
    return maps


@pytest.fixture
def rect_video():
    return make_rect_video()
