"""Command-line entry points: train and reconstruct."""

from pathlib import Path

import click

from .data import build_training_pairs
from .infer import TrainedDecoder, reconstruct_frames
from .sem import load_sem
from .train import TrainConfig, train_decoder


@click.group()
def main():
    """Generative decoder: train on key frames, reconstruct from edge maps."""


@main.command()
@click.argument("sem_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("keyframe_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("model_out", type=click.Path(dir_okay=False))
@click.option("--resolution", default=64, show_default=True,
              help="Generator resolution (power of two).")
@click.option("--epochs", default=1000, show_default=True)
@click.option("--batch-size", default=1, show_default=True)
@click.option("--adv-weight", default=1.0, show_default=True)
@click.option("--recon-weight", default=100.0, show_default=True)
@click.option("--learning-rate", default=2e-4, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--loss-csv", type=click.Path(dir_okay=False), default=None,
              help="Write per-step losses to this CSV file.")
def train(sem_path, keyframe_dir, model_out, resolution, epochs, batch_size,
          adv_weight, recon_weight, learning_rate, seed, loss_csv):
    """Train a decoder on SEM_PATH key entries paired with KEYFRAME_DIR PNGs."""
    sem = load_sem(sem_path)
    pairs = build_training_pairs(sem, keyframe_dir, resolution)
    config = TrainConfig(
        resolution=resolution,
        epochs=epochs,
        batch_size=batch_size,
        adv_weight=adv_weight,
        recon_weight=recon_weight,
        learning_rate=learning_rate,
        seed=seed,
        loss_csv=None if loss_csv is None else Path(loss_csv),
    )

    def report(epoch, rec):
        if (epoch + 1) % max(1, epochs // 20) == 0:
            click.echo(
                f"epoch {epoch + 1}/{epochs}  d={rec.d_loss:.4f} "
                f"adv={rec.g_adv:.4f} recon={rec.g_recon:.4f}"
            )

    result = train_decoder(
        pairs,
        config,
        sem_meta=(sem.k, sem.palette, sem.width, sem.height),
        progress=report,
    )
    result.decoder.save(model_out)
    click.echo(f"trained on {len(pairs)} pairs; model written to {model_out}")


@main.command()
@click.argument("model_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("sem_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("out_dir", type=click.Path(file_okay=False))
@click.option("--width", required=True, type=int,
              help="Output frame width in pixels.")
@click.option("--height", required=True, type=int,
              help="Output frame height in pixels.")
def reconstruct(model_path, sem_path, out_dir, width, height):
    """Reconstruct every frame in SEM_PATH with the model at MODEL_PATH."""
    decoder = TrainedDecoder.load(model_path)
    sem = load_sem(sem_path)
    written = reconstruct_frames(decoder, sem, out_dir, width, height)
    click.echo(f"wrote {len(written)} frames to {out_dir}")
