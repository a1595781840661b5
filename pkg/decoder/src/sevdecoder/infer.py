"""Saving, loading, and running a trained decoder."""

from dataclasses import dataclass
from pathlib import Path

import numpy as np
import torch
from PIL import Image

from .model import Generator, to_image, to_tensor
from .sem import SemFile, render_condition


class MetadataMismatchError(ValueError):
    pass


@dataclass
class TrainedDecoder:
    resolution: int
    base_channels: int
    state_dict: dict
    # SEM provenance the model was trained against; None when trained on
    # hand-built pairs (inference then skips the compatibility check).
    k: int | None = None
    palette: np.ndarray | None = None
    map_width: int | None = None
    map_height: int | None = None

    def build_generator(self) -> Generator:
        gen = Generator(self.resolution, base_channels=self.base_channels)
        gen.load_state_dict(self.state_dict)
        gen.eval()
        return gen

    def save(self, path) -> None:
        torch.save(
            {
                "resolution": self.resolution,
                "base_channels": self.base_channels,
                "state_dict": self.state_dict,
                "k": self.k,
                "palette": None if self.palette is None else np.asarray(self.palette, np.uint8),
                "map_width": self.map_width,
                "map_height": self.map_height,
            },
            path,
        )

    @classmethod
    def load(cls, path) -> "TrainedDecoder":
        blob = torch.load(path, map_location="cpu", weights_only=False)
        return cls(**blob)

    def check_compatible(self, sem: SemFile) -> None:
        if self.k is None:
            return
        problems = []
        if sem.k != self.k:
            problems.append(f"k={sem.k} vs trained k={self.k}")
        if self.palette is not None and not np.array_equal(
            np.asarray(sem.palette, np.uint8), np.asarray(self.palette, np.uint8)
        ):
            problems.append("palette differs from training palette")
        if (sem.width, sem.height) != (self.map_width, self.map_height):
            problems.append(
                f"map size {sem.width}x{sem.height} vs trained "
                f"{self.map_width}x{self.map_height}"
            )
        if problems:
            raise MetadataMismatchError("; ".join(problems))


def reconstruct_frames(
    decoder: TrainedDecoder,
    sem: SemFile,
    out_dir,
    output_width: int,
    output_height: int,
) -> list:
    """Run the generator on every SEM entry and write numbered PNGs.

    Returns the written file paths in entry order. Output frames are
    stretch-resized from the generator resolution to output_width x
    output_height.
    """
    decoder.check_compatible(sem)
    gen = decoder.build_generator()
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    with torch.no_grad():
        for entry in sem.entries:
            rgb = render_condition(entry.labels, sem.palette)
            cond_img = Image.fromarray(rgb).resize(
                (decoder.resolution, decoder.resolution), Image.NEAREST
            )
            cond = to_tensor(np.asarray(cond_img, dtype=np.uint8))
            frame = to_image(gen(cond))
            resized = Image.fromarray(frame).resize(
                (output_width, output_height), Image.BILINEAR
            )
            path = out_dir / f"{entry.frame_index:06d}.png"
            resized.save(path)
            written.append(path)
    return written
