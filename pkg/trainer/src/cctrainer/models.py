"""Generator/discriminator pair for conditional cast removal.

The generator is an encoder-decoder with skip connections sized to the
training resolution; the discriminator is a conditional convolutional
classifier that scores overlapping patches (its output is a spatial grid
of real/fake logits, not a scalar). Both are deliberately small: the
point is the loss mechanism, not capacity.
"""

from __future__ import annotations

import math

import torch
from torch import nn


def _down(cin, cout, norm=True):
    layers = [nn.Conv2d(cin, cout, 4, stride=2, padding=1, bias=not norm)]
    if norm:
        layers.append(nn.InstanceNorm2d(cout, affine=True))
    layers.append(nn.LeakyReLU(0.2, inplace=True))
    return nn.Sequential(*layers)


def _up(cin, cout, norm=True):
    layers = [nn.ConvTranspose2d(cin, cout, 4, stride=2, padding=1, bias=not norm)]
    if norm:
        layers.append(nn.InstanceNorm2d(cout, affine=True))
    layers.append(nn.ReLU(inplace=True))
    return nn.Sequential(*layers)


class UnetGenerator(nn.Module):
    """Skip-connected encoder-decoder; input and output are (N, 3, S, S) in [-1, 1]."""

    def __init__(self, image_size: int = 64, base_channels: int = 32):
        super().__init__()
        if image_size < 32 or (image_size & (image_size - 1)) != 0:
            raise ValueError(f"image_size must be a power of two >= 32, got {image_size}")
        depth = int(math.log2(image_size)) - 2  # bottleneck at 4x4
        chans = [min(base_channels * (2**i), 256) for i in range(depth)]

        self.downs = nn.ModuleList()
        cin = 3
        for i, cout in enumerate(chans):
            self.downs.append(_down(cin, cout, norm=i > 0))
            cin = cout

        self.ups = nn.ModuleList()
        for i in reversed(range(depth)):
            cout = chans[i - 1] if i > 0 else base_channels
            # after the first up, each stage consumes cout + the skip concat
            self.ups.append(_up(cin + (0 if i == depth - 1 else chans[i]), cout))
            cin = cout
        self.head = nn.Sequential(nn.Conv2d(base_channels, 3, 3, padding=1), nn.Tanh())

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        skips = []
        h = x
        for down in self.downs:
            h = down(h)
            skips.append(h)
        h = skips.pop()
        for up in self.ups:
            h = up(h)
            if skips:
                h = torch.cat([h, skips.pop()], dim=1)
        return self.head(h)


class PatchDiscriminator(nn.Module):
    """Conditional patch classifier: concat(input, candidate) -> logit grid."""

    def __init__(self, base_channels: int = 32):
        super().__init__()
        self.net = nn.Sequential(
            _down(6, base_channels, norm=False),
            _down(base_channels, base_channels * 2),
            _down(base_channels * 2, base_channels * 4),
            nn.Conv2d(base_channels * 4, 1, 4, stride=1, padding=1),
        )

    def forward(self, condition: torch.Tensor, candidate: torch.Tensor) -> torch.Tensor:
        return self.net(torch.cat([condition, candidate], dim=1))


def build_models(image_size: int = 64, base_channels: int = 32):
    """(generator, discriminator) sized for square inputs of image_size."""
    return UnetGenerator(image_size, base_channels), PatchDiscriminator(base_channels)
