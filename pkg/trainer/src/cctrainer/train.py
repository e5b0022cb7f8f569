"""Conditional GAN training: least-squares adversarial + L1 + angular terms.

The generator maps tinted inputs to clean predictions; the total
generator objective is

    adv + lambda_l1 * L1(pred, target) + lambda_ang * angular(input, pred, gt)

where the angular term recomputes the predicted illuminant per pixel
(variant v1) or compares against the stored ground-truth map (v2, needs
gtmap/ in the dataset). Runs are reproducible at a fixed seed on one
platform: seeded shuffling, no worker processes, deterministic ops.
"""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field
from pathlib import Path

import torch

from .data import PairDataset, batches
from .losses import angular_loss, l1_loss
from .models import build_models

VARIANTS = ("v1", "v2")


@dataclass
class TrainConfig:
    dataset_dir: str
    out_dir: str
    image_size: int = 64
    epochs: int = 20
    batch_size: int = 16
    lr: float = 2e-4
    lambda_l1: float = 100.0
    lambda_ang: float = 1.0
    variant: str = "v1"
    seed: int = 0
    base_channels: int = 32

    def __post_init__(self):
        if self.lambda_l1 < 0 or self.lambda_ang < 0:
            raise ValueError("loss weights must be nonnegative")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}")
        if self.variant == "v2" and not (Path(self.dataset_dir) / "gtmap").is_dir():
            raise ValueError("variant v2 needs gtmap/ in the dataset")


@dataclass
class RunRecord:
    config: dict
    epochs: list[dict] = field(default_factory=list)
    checkpoint: str | None = None
    eval_report: str | None = None

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "RunRecord":
        d = json.loads(Path(path).read_text())
        return cls(**d)


def _to_net(img01: torch.Tensor) -> torch.Tensor:
    return img01 * 2.0 - 1.0


def _from_net(out: torch.Tensor) -> torch.Tensor:
    return (out + 1.0) / 2.0


def train(config: TrainConfig) -> RunRecord:
    torch.manual_seed(config.seed)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    dataset = PairDataset(config.dataset_dir, want_maps=config.variant == "v2")
    generator, discriminator = build_models(config.image_size, config.base_channels)
    opt_g = torch.optim.Adam(generator.parameters(), lr=config.lr, betas=(0.5, 0.999))
    opt_d = torch.optim.Adam(discriminator.parameters(), lr=config.lr, betas=(0.5, 0.999))
    mse = torch.nn.MSELoss()

    record = RunRecord(config=asdict(config))
    shuffler = torch.Generator().manual_seed(config.seed)

    for epoch in range(config.epochs):
        sums = {"adv": 0.0, "l1": 0.0, "angular": 0.0, "disc": 0.0}
        n_batches = 0
        start = time.perf_counter()
        for batch in batches(dataset, config.batch_size, shuffler):
            inp01, tgt01 = batch["input"], batch["target"]
            inp, tgt = _to_net(inp01), _to_net(tgt01)

            pred = generator(inp)
            pred01 = _from_net(pred)

            # discriminator: real pairs score 1, generated pairs 0
            opt_d.zero_grad(set_to_none=True)
            real_logits = discriminator(inp, tgt)
            fake_logits = discriminator(inp, pred.detach())
            loss_d = 0.5 * (
                mse(real_logits, torch.ones_like(real_logits))
                + mse(fake_logits, torch.zeros_like(fake_logits))
            )
            loss_d.backward()
            opt_d.step()

            # generator: fool the discriminator + weighted reconstruction terms
            opt_g.zero_grad(set_to_none=True)
            fake_logits = discriminator(inp, pred)
            adv = mse(fake_logits, torch.ones_like(fake_logits))
            loss_g = adv
            l1 = torch.zeros(())
            ang = torch.zeros(())
            if config.lambda_l1 > 0:
                l1 = l1_loss(pred01, tgt01)
                loss_g = loss_g + config.lambda_l1 * l1
            if config.lambda_ang > 0:
                if config.variant == "v2":
                    ang = angular_loss(inp01, pred01, gt_map=batch["gtmap"])
                else:
                    ang = angular_loss(inp01, pred01, target=tgt01)
                loss_g = loss_g + config.lambda_ang * ang
            loss_g.backward()
            opt_g.step()

            sums["adv"] += float(adv.detach())
            sums["l1"] += float(l1.detach())
            sums["angular"] += float(ang.detach())
            sums["disc"] += float(loss_d.detach())
            n_batches += 1

        row = {k: v / n_batches for k, v in sums.items()}
        row["epoch"] = epoch
        row["seconds"] = round(time.perf_counter() - start, 3)
        record.epochs.append(row)

    checkpoint = out_dir / "checkpoint.pt"
    torch.save(
        {"generator": generator.state_dict(), "config": asdict(config)},
        checkpoint,
    )
    record.checkpoint = str(checkpoint)
    record.save(out_dir / "run.json")
    return record


def load_generator(checkpoint_path):
    state = torch.load(checkpoint_path, map_location="cpu", weights_only=True)
    cfg = state["config"]
    generator, _ = build_models(cfg["image_size"], cfg["base_channels"])
    generator.load_state_dict(state["generator"])
    generator.eval()
    return generator, cfg
