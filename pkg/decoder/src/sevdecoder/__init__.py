"""Generative second-stage decoder: reconstructs frames from soft edge maps."""

from .data import DataError, TrainingPair, build_training_pairs, nearest_upsample, stretch_resize
from .eval import ssim
from .infer import MetadataMismatchError, TrainedDecoder, reconstruct_frames
from .model import Generator, PatchDiscriminator, to_image, to_tensor
from .sem import SemEntry, SemFile, SemFormatError, load_sem, render_condition, save_sem
from .train import LossRecord, TrainConfig, TrainingError, TrainResult, train_decoder

__all__ = [
    "DataError",
    "Generator",
    "LossRecord",
    "MetadataMismatchError",
    "PatchDiscriminator",
    "SemEntry",
    "SemFile",
    "SemFormatError",
    "TrainConfig",
    "TrainResult",
    "TrainedDecoder",
    "TrainingError",
    "TrainingPair",
    "build_training_pairs",
    "load_sem",
    "nearest_upsample",
    "reconstruct_frames",
    "render_condition",
    "save_sem",
    "ssim",
    "stretch_resize",
    "to_image",
    "to_tensor",
    "train_decoder",
]
