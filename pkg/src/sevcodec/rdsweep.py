"""Rate-distortion sweeps over (alpha, scale, k, quality) grids."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import metrics as m
from .container import EncodeConfig, bitrate_kbps, decode_sev, encode_video, parse_container, serialize_container
from .video import VideoSequence, load_video

CSV_COLUMNS = [
    "alpha",
    "scale",
    "k",
    "quality",
    "kbps_total",
    "kbps_key",
    "kbps_g",
    "psnr",
    "ssim",
    "msssim",
    "vmaf",
    "error",
]


@dataclass
class SweepConfig:
    input_path: object  # path or a preloaded VideoSequence
    alphas: list
    scales: list
    ks: list
    qualities: list = field(default_factory=lambda: [23])
    out_csv: object = None
    recon_root: object = None  # dir of per-point reconstruction subdirs
    fps: int = 25


def _point_label(alpha, scale, k, quality) -> str:
    return f"a{alpha}_s{scale}_k{k}_q{quality}"


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return str(value)


def run_sweep(config: SweepConfig) -> list:
    """One CSV row per grid point, in lexicographic grid order.

    Metric columns are filled only when a reconstruction directory exists for
    the grid point; per-point failures land in the error column and the sweep
    continues.
    """
    if isinstance(config.input_path, VideoSequence):
        video = config.input_path
    else:
        video = load_video(config.input_path, config.fps)

    rows = []
    for alpha in config.alphas:
        for scale in config.scales:
            for k in config.ks:
                for quality in config.qualities:
                    row = dict.fromkeys(CSV_COLUMNS)
                    row.update(alpha=alpha, scale=scale, k=k, quality=quality)
                    try:
                        _run_point(video, row, config)
                    except Exception as exc:
                        row["error"] = f"{type(exc).__name__}: {exc}"
                    rows.append(row)

    if config.out_csv is not None:
        with open(config.out_csv, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(CSV_COLUMNS)
            for row in rows:
                writer.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return rows


def _run_point(video, row, config):
    cfg = EncodeConfig(
        alpha=row["alpha"],
        scale=row["scale"],
        k=row["k"],
        quality=row["quality"],
    )
    result = encode_video(video, cfg)
    data = serialize_container(result.sev)
    report = bitrate_kbps(parse_container(data))
    row["kbps_total"] = report.total_kbps
    row["kbps_key"] = report.key_kbps
    row["kbps_g"] = report.g_kbps

    decoded = decode_sev(parse_container(data))
    for enc_map, dec_map in zip(result.key_maps, decoded.key_maps):
        if not np.array_equal(enc_map.labels, dec_map.labels):
            raise AssertionError("decoder-side key map differs from encoder side")
    for t, enc_map in result.g_maps.items():
        if not np.array_equal(enc_map.labels, decoded.g_maps[t].labels):
            raise AssertionError(f"G-frame map {t} corrupted in transit")

    if config.recon_root is not None:
        recon_dir = Path(config.recon_root) / _point_label(
            row["alpha"], row["scale"], row["k"], row["quality"]
        )
        if recon_dir.is_dir():
            recon = load_video(recon_dir, video.fps)
            row["psnr"] = m.sequence_metric(video.frames, recon.frames, m.psnr).mean
            row["ssim"] = m.sequence_metric(video.frames, recon.frames, m.ssim).mean
            if min(video.width, video.height) >= 176:
                row["msssim"] = m.sequence_metric(
                    video.frames, recon.frames, m.ms_ssim
                ).mean
