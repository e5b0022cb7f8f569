"""cctrainer: desk-scale conditional GAN for color-cast removal.

Trains a small U-Net generator against a patch discriminator with an
L1 + angular objective on datasets emitted by `illumkit synth`, and
scores checkpoints through `illumkit eval`. All communication with the
toolkit goes through its file formats and CLI.
"""

from .data import PairDataset
from .evaluate import evaluate, write_predictions
from .losses import angular_loss, l1_loss
from .models import PatchDiscriminator, UnetGenerator, build_models
from .train import RunRecord, TrainConfig, load_generator, train

__version__ = "0.1.0"

__all__ = [
    "PairDataset",
    "PatchDiscriminator",
    "RunRecord",
    "TrainConfig",
    "UnetGenerator",
    "angular_loss",
    "build_models",
    "evaluate",
    "l1_loss",
    "load_generator",
    "train",
    "write_predictions",
]
