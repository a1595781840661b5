"""Command-line interface for the soft-edge video codec."""

import json
import sys
from fractions import Fraction
from pathlib import Path

import click

from . import metrics as metrics_mod
from .container import (
    EncodeConfig,
    ExternalCodec,
    RawPngCodec,
    bitrate_kbps,
    decode_sev,
    encode_video,
    parse_container,
    serialize_container,
    write_sem,
)
from .rdsweep import SweepConfig, run_sweep
from .video import load_video, save_frames


@click.group()
def main():
    """Two-stage soft-edge video codec toolkit."""


def _int_list(text):
    return [int(v) for v in text.split(",") if v]


def _float_list(text):
    return [float(v) for v in text.split(",") if v]


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--output", "output_path", required=True, type=click.Path())
@click.option("--alpha", default=0.01, show_default=True, type=float)
@click.option("--scale", default=8, show_default=True, type=int)
@click.option("--k", default=8, show_default=True, type=click.IntRange(2, 256))
@click.option("--canny-low", default=50, show_default=True, type=click.IntRange(0, 255))
@click.option("--canny-high", default=150, show_default=True, type=click.IntRange(0, 255))
@click.option("--kmeans-seed", default=0, show_default=True, type=int)
@click.option("--keyframe-codec", type=click.Choice(["raw", "ext"]), default="raw")
@click.option("--ext-cmd", default=None, help="external encoder command template")
@click.option("--ext-decode-cmd", default=None, help="external decoder command template")
@click.option("--quality", default=23, show_default=True, type=int)
@click.option("--fps", default=25, show_default=True, type=int)
def encode(
    input_path,
    output_path,
    alpha,
    scale,
    k,
    canny_low,
    canny_high,
    kmeans_seed,
    keyframe_codec,
    ext_cmd,
    ext_decode_cmd,
    quality,
    fps,
):
    """Encode a PNG directory or Y4M file into a .sev container."""
    if keyframe_codec == "ext":
        if not ext_cmd or not ext_decode_cmd:
            raise click.UsageError("--keyframe-codec ext needs --ext-cmd and --ext-decode-cmd")
        codec = ExternalCodec(ext_cmd, ext_decode_cmd)
    else:
        codec = RawPngCodec()
    video = load_video(input_path, Fraction(fps))
    config = EncodeConfig(
        alpha=alpha,
        scale=scale,
        k=k,
        canny_low=canny_low,
        canny_high=canny_high,
        kmeans_seed=kmeans_seed,
        quality=quality,
        key_codec=codec,
    )
    result = encode_video(video, config)
    data = serialize_container(result.sev)
    Path(output_path).write_bytes(data)
    report = bitrate_kbps(result.sev)
    click.echo(
        f"wrote {len(data)} bytes ({report.total_kbps:.3f} Kbps, "
        f"key {report.key_kbps:.3f} / G {report.g_kbps:.3f})"
    )


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--emit-keyframes", "keyframe_dir", default=None, type=click.Path())
@click.option("--emit-sem", "sem_path", default=None, type=click.Path())
@click.option("--ext-decode-cmd", default=None, help="decoder template for ext key codec")
def decode(input_path, keyframe_dir, sem_path, ext_decode_cmd):
    """Decode a .sev container to key frames and a SEM map file."""
    sev = parse_container(Path(input_path).read_bytes())
    key_codec = None
    if ext_decode_cmd:
        key_codec = ExternalCodec(encode_cmd="", decode_cmd=ext_decode_cmd)
    decoded = decode_sev(sev, key_codec=key_codec)
    if keyframe_dir:
        save_frames(decoded.key_frames, keyframe_dir, indices=decoded.header.key_indices)
        click.echo(f"wrote {len(decoded.key_frames)} key frames to {keyframe_dir}")
    if sem_path:
        write_sem(sem_path, decoded)
        n_maps = len(decoded.key_maps) + len(decoded.g_maps)
        click.echo(f"wrote {n_maps} soft edge maps to {sem_path}")


@main.command()
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
def inspect(input_path):
    """Print the .sev header as JSON."""
    sev = parse_container(Path(input_path).read_bytes())
    h = sev.header
    report = bitrate_kbps(sev)
    click.echo(
        json.dumps(
            {
                "width": h.width,
                "height": h.height,
                "fps": [h.fps.numerator, h.fps.denominator],
                "frame_count": h.frame_count,
                "scale": h.scale,
                "k": h.k,
                "effective_count": h.effective_count,
                "kmeans_seed": h.kmeans_seed,
                "canny_low": h.canny_low,
                "canny_high": h.canny_high,
                "key_codec_id": h.key_codec_id,
                "key_frame_count": len(h.key_indices),
                "key_indices": list(h.key_indices),
                "palette": h.palette.tolist(),
                "chunk_count": len(sev.chunks),
                "kbps_total": report.total_kbps,
                "kbps_key": report.key_kbps,
                "kbps_g": report.g_kbps,
            },
            indent=2,
        )
    )


@main.command()
@click.option("--ref", "ref_dir", required=True, type=click.Path(exists=True))
@click.option("--dist", "dist_dir", required=True, type=click.Path(exists=True))
@click.option("--metrics", "which", default="psnr,ssim,msssim", show_default=True)
@click.option("--out", "out_csv", default=None, type=click.Path())
@click.option("--fps", default=25, show_default=True, type=int)
def metrics(ref_dir, dist_dir, which, out_csv, fps):
    """Full-reference metrics between two frame directories, as CSV."""
    import csv as csv_mod

    ref = load_video(ref_dir, Fraction(fps))
    dist = load_video(dist_dir, Fraction(fps))
    if len(ref) != len(dist):
        raise click.ClickException("reference and distorted frame counts differ")
    wanted = [w.strip() for w in which.split(",") if w.strip()]
    fns = {"psnr": metrics_mod.psnr, "ssim": metrics_mod.ssim, "msssim": metrics_mod.ms_ssim}
    for w in wanted:
        if w not in fns:
            raise click.ClickException(f"unknown metric {w}")

    results = {w: metrics_mod.sequence_metric(ref.frames, dist.frames, fns[w]) for w in wanted}
    out = open(out_csv, "w", newline="") if out_csv else sys.stdout
    writer = csv_mod.writer(out)
    writer.writerow(["frame_index", "psnr_db", "ssim", "msssim", "vmaf"])
    for i in range(len(ref)):
        writer.writerow(
            [i]
            + [
                f"{results[w].per_frame[i]:.6f}" if w in results else ""
                for w in ("psnr", "ssim", "msssim")
            ]
            + [""]
        )
    writer.writerow(
        ["mean"]
        + [f"{results[w].mean:.6f}" if w in results else "" for w in ("psnr", "ssim", "msssim")]
        + [""]
    )
    if out_csv:
        out.close()


@main.command("rd-sweep")
@click.option("--input", "input_path", required=True, type=click.Path(exists=True))
@click.option("--alphas", default="0.01", show_default=True)
@click.option("--scales", default="8", show_default=True)
@click.option("--ks", default="8", show_default=True)
@click.option("--qualities", default="23", show_default=True)
@click.option("--out", "out_csv", required=True, type=click.Path())
@click.option("--recon-root", default=None, type=click.Path())
@click.option("--fps", default=25, show_default=True, type=int)
def rd_sweep(input_path, alphas, scales, ks, qualities, out_csv, recon_root, fps):
    """Sweep the (alpha, scale, k, quality) grid and emit a CSV."""
    config = SweepConfig(
        input_path=input_path,
        alphas=_float_list(alphas),
        scales=_int_list(scales),
        ks=_int_list(ks),
        qualities=_int_list(qualities),
        out_csv=out_csv,
        recon_root=recon_root,
        fps=fps,
    )
    rows = run_sweep(config)
    failures = sum(1 for r in rows if r["error"])
    click.echo(f"{len(rows)} grid points, {failures} failed; CSV at {out_csv}")


if __name__ == "__main__":
    main()
