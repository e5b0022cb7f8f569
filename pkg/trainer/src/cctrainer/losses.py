"""Training losses, matching the toolkit's masking and clamp semantics.

The angular term recovers the predicted illuminant per pixel,
e* = input / clamp(pred, 1e-4), and takes the mean angle in degrees
against the ground truth (recovered from the target, or a stored map)
over valid pixels: every channel of input and target strictly between
tau_black and tau_sat, and the ground-truth vector nonzero. The angle is
atan2(|u x v|, u . v); autograd differentiates it (a tiny epsilon inside
the norm keeps the gradient finite at exactly parallel pixels).
"""

from __future__ import annotations

import torch

TAU_BLACK = 1.0 / 255.0
TAU_SAT = 254.0 / 255.0
CLAMP_FLOOR = 1e-4

_RAD2DEG = 180.0 / torch.pi


def _inside(img: torch.Tensor) -> torch.Tensor:
    """(N, H, W) mask: every channel strictly between the rails."""
    return ((img > TAU_BLACK) & (img < TAU_SAT)).all(dim=1)


def angular_loss(
    input_img: torch.Tensor,
    pred: torch.Tensor,
    target: torch.Tensor | None = None,
    gt_map: torch.Tensor | None = None,
    map_valid: torch.Tensor | None = None,
) -> torch.Tensor:
    """Mean angular error in degrees, differentiable w.r.t. pred.

    All tensors are (N, 3, H, W) in [0, 1]. Supply ``target`` to recover
    the ground truth as input/target, or ``gt_map`` (with an optional
    validity mask) to use a stored map directly.
    """
    if (target is None) == (gt_map is None):
        raise ValueError("supply exactly one of target or gt_map")

    if gt_map is not None:
        u = gt_map
        valid = _inside(input_img) & (gt_map != 0).any(dim=1)
        if map_valid is not None:
            valid = valid & map_valid
    else:
        valid = _inside(input_img) & _inside(target)
        safe_t = torch.where(valid.unsqueeze(1), target, torch.ones_like(target))
        u = torch.where(valid.unsqueeze(1), input_img / safe_t, torch.zeros_like(target))
        valid = valid & (u != 0).any(dim=1)

    if not bool(valid.any()):
        raise ValueError("no valid pixels for the angular loss")

    v = input_img / pred.clamp(min=CLAMP_FLOOR)
    dot = (u * v).sum(dim=1)
    cross = torch.linalg.cross(u, v, dim=1)
    s = torch.sqrt((cross * cross).sum(dim=1) + 1e-24)
    angles = torch.atan2(s, dot) * _RAD2DEG
    return angles[valid].mean()


def l1_loss(pred: torch.Tensor, target: torch.Tensor) -> torch.Tensor:
    """Mean absolute difference over all entries (natural [0,1] units)."""
    return (pred - target).abs().mean()
