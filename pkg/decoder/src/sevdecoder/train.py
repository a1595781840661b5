"""Adversarial training loop for the generative decoder."""

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn

from .infer import TrainedDecoder
from .model import Generator, PatchDiscriminator, to_tensor


class TrainingError(RuntimeError):
    pass


@dataclass(frozen=True)
class TrainConfig:
    resolution: int = 64
    epochs: int = 1000
    batch_size: int = 1
    adv_weight: float = 1.0
    recon_weight: float = 100.0
    learning_rate: float = 2e-4
    beta1: float = 0.5
    seed: int = 0
    base_channels: int = 32
    loss_csv: Path | None = None

    def __post_init__(self):
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")
        if self.epochs < 1:
            raise ValueError(f"epochs must be >= 1, got {self.epochs}")


@dataclass
class LossRecord:
    step: int
    d_loss: float
    g_adv: float
    g_recon: float
    g_total: float


@dataclass
class TrainResult:
    decoder: TrainedDecoder
    losses: list = field(default_factory=list)


def _write_loss_csv(path, losses) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "d_loss", "g_adv", "g_recon", "g_total"])
        for rec in losses:
            writer.writerow(
                [rec.step, f"{rec.d_loss:.6f}", f"{rec.g_adv:.6f}",
                 f"{rec.g_recon:.6f}", f"{rec.g_total:.6f}"]
            )


def train_decoder(pairs, config: TrainConfig, *, sem_meta=None, progress=None) -> TrainResult:
    """Alternating least-squares-adversarial + L1 optimization over `pairs`.

    `sem_meta` is an optional (k, palette, map_width, map_height) tuple baked
    into the returned TrainedDecoder so inference can reject mismatched inputs.
    """
    if not pairs:
        raise ValueError("need at least one training pair")

    torch.manual_seed(config.seed)
    device = torch.device("cpu")

    gen = Generator(config.resolution, base_channels=config.base_channels).to(device)
    disc = PatchDiscriminator(base_channels=config.base_channels).to(device)
    opt_g = torch.optim.Adam(gen.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, 0.999))
    opt_d = torch.optim.Adam(disc.parameters(), lr=config.learning_rate,
                             betas=(config.beta1, 0.999))
    mse = nn.MSELoss()
    l1 = nn.L1Loss()

    conditions = torch.cat([to_tensor(p.condition) for p in pairs])
    targets = torch.cat([to_tensor(p.target) for p in pairs])
    n = len(pairs)

    losses = []
    step = 0
    for epoch in range(config.epochs):
        order = torch.randperm(n)
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            cond = conditions[idx]
            real = targets[idx]

            fake = gen(cond)

            # discriminator: real -> 1, fake -> 0
            opt_d.zero_grad()
            pred_real = disc(cond, real)
            pred_fake = disc(cond, fake.detach())
            d_loss = 0.5 * (
                mse(pred_real, torch.ones_like(pred_real))
                + mse(pred_fake, torch.zeros_like(pred_fake))
            )
            d_loss.backward()
            opt_d.step()

            # generator: fool the discriminator + stay close to the target
            opt_g.zero_grad()
            pred_fake = disc(cond, fake)
            g_adv = mse(pred_fake, torch.ones_like(pred_fake))
            g_recon = l1(fake, real)
            g_total = config.adv_weight * g_adv + config.recon_weight * g_recon
            g_total.backward()
            opt_g.step()

            rec = LossRecord(
                step=step,
                d_loss=d_loss.detach().item(),
                g_adv=g_adv.detach().item(),
                g_recon=g_recon.detach().item(),
                g_total=g_total.detach().item(),
            )
            if not all(
                np.isfinite(v) for v in (rec.d_loss, rec.g_adv, rec.g_recon)
            ):
                tail = losses[-5:]
                raise TrainingError(
                    f"non-finite loss at step {step} "
                    f"(d={rec.d_loss}, adv={rec.g_adv}, recon={rec.g_recon}); "
                    f"recent steps: {[(r.step, r.g_total) for r in tail]}"
                )
            losses.append(rec)
            step += 1
        if progress is not None:
            progress(epoch, losses[-1])

    if config.loss_csv is not None:
        _write_loss_csv(config.loss_csv, losses)

    k = palette = map_width = map_height = None
    if sem_meta is not None:
        k, palette, map_width, map_height = sem_meta
    decoder = TrainedDecoder(
        resolution=config.resolution,
        base_channels=config.base_channels,
        state_dict=gen.state_dict(),
        k=k,
        palette=palette,
        map_width=map_width,
        map_height=map_height,
    )
    return TrainResult(decoder=decoder, losses=losses)
