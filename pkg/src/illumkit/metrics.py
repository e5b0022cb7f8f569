"""Evaluation metrics: angular error, PSNR, SSIM, CIE dE76, and reports.

Angular error is the angle between illuminant vectors, computed as
``atan2(|u x v|, u . v)`` rather than ``acos`` of the normalized dot
product; the two agree to machine precision but the atan2 form stays
accurate (and differentiable) near 0 and 180 degrees. All angles are
reported in degrees.

Dataset evaluation pairs prediction/ground-truth directories by filename
stem and aggregates per-image values into `ErrorStats`; the resulting
`EvalReport` serializes to a fixed-key-order JSON document (floats at six
significant digits, so reports diff cleanly) and optionally a CSV of the
per-image rows.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy import ndimage

from .core import (
    DEFAULT_THRESHOLDS,
    EmptySampleError,
    IlluminationMap,
    MaskThresholds,
    ShapeMismatchError,
    as_image,
    load_image,
    load_map,
    recover_illumination_map,
    srgb_to_linear,
)

REPORT_SCHEMA_VERSION = 1

_PSNR_MSE_FLOOR = 1e-10  # caps PSNR at 100 dB

# Rec.601 luma weights, applied to the linear RGB values as stored.
_LUMA = np.array([0.299, 0.587, 0.114])

# sRGB -> XYZ (D65), IEC 61966-2-1 primaries.
_SRGB_TO_XYZ = np.array(
    [
        [0.4124564, 0.3575761, 0.1804375],
        [0.2126729, 0.7151522, 0.0721750],
        [0.0193339, 0.1191920, 0.9503041],
    ]
)
_D65_WHITE = np.array([0.95047, 1.0, 1.08883])


def angular_error(e1, e2) -> float:
    """Angle in degrees between two illuminant vectors (scale-free)."""
    x1, y1, z1 = (float(v) for v in np.asarray(e1, dtype=np.float64).reshape(3))
    x2, y2, z2 = (float(v) for v in np.asarray(e2, dtype=np.float64).reshape(3))
    if x1 == y1 == z1 == 0.0 or x2 == y2 == z2 == 0.0:
        raise ValueError("angular error is undefined for zero-norm vectors")
    cx = y1 * z2 - z1 * y2
    cy = z1 * x2 - x1 * z2
    cz = x1 * y2 - y1 * x2
    cross = math.sqrt(cx * cx + cy * cy + cz * cz)
    dot = x1 * x2 + y1 * y2 + z1 * z2
    return math.degrees(math.atan2(cross, dot))


def _field_angles(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Per-pixel angle in degrees between two (H, W, 3) vector fields."""
    cross = np.linalg.norm(np.cross(a, b), axis=2)
    dot = np.sum(a * b, axis=2)
    return np.degrees(np.arctan2(cross, dot))


@dataclass(frozen=True)
class ErrorStats:
    """Summary statistics of an error sample (degrees, dB, or metric units)."""

    mean: float
    median: float
    trimean: float
    std: float
    max: float
    count: int

    @classmethod
    def from_values(cls, values) -> "ErrorStats":
        v = np.asarray(values, dtype=np.float64).ravel()
        if v.size == 0:
            raise EmptySampleError("cannot compute statistics of an empty sample")
        q1, q2, q3 = np.percentile(v, [25.0, 50.0, 75.0])
        return cls(
            mean=float(v.mean()),
            median=float(q2),
            trimean=float((q1 + 2.0 * q2 + q3) / 4.0),
            std=float(v.std()),
            max=float(v.max()),
            count=int(v.size),
        )

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "median": self.median,
            "trimean": self.trimean,
            "std": self.std,
            "max": self.max,
            "count": self.count,
        }


def angular_error_map(gt: IlluminationMap, est: IlluminationMap) -> tuple[np.ndarray, ErrorStats]:
    """Per-pixel angular error between two maps, over jointly valid pixels.

    Returns ``(grid, stats)``: the grid holds degrees at valid pixels and
    NaN elsewhere; stats cover the valid pixels only (stats.count over
    grid size gives the valid fraction).
    """
    if gt.data.shape != est.data.shape:
        raise ShapeMismatchError(f"map shapes differ: {gt.data.shape} vs {est.data.shape}")
    both = (
        gt.valid
        & est.valid
        & (gt.data > 0).any(axis=2)
        & (est.data > 0).any(axis=2)
    )
    if not both.any():
        raise EmptySampleError("no jointly valid pixels to compare")
    angles = _field_angles(gt.data, est.data)
    grid = np.where(both, angles, np.nan)
    return grid, ErrorStats.from_values(angles[both])


def angular_error_from_images(
    input_img, gt, pred, thr: MaskThresholds = DEFAULT_THRESHOLDS
) -> ErrorStats:
    """Angular error via per-pixel illuminant recovery from an image triple.

    Ground-truth map e = input/gt and estimated map e* = input/pred are
    both recovered with the same thresholds; the error is evaluated on the
    intersection of their validity masks.
    """
    gt_map = recover_illumination_map(input_img, gt, thr)
    est_map = recover_illumination_map(input_img, pred, thr)
    _, stats = angular_error_map(gt_map, est_map)
    return stats


def pixel_angular_error(
    a, b, thr: MaskThresholds = DEFAULT_THRESHOLDS
) -> tuple[np.ndarray, ErrorStats]:
    """Per-pixel angle between the RGB colors of two images.

    The direct image-vs-image protocol (no input image involved): each
    pixel pair is compared as a pair of color vectors, skipping pixels at
    the rails in either image.
    """
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    valid = thr.inside(a) & thr.inside(b)
    if not valid.any():
        raise EmptySampleError("no jointly valid pixels to compare")
    angles = _field_angles(a, b)
    grid = np.where(valid, angles, np.nan)
    return grid, ErrorStats.from_values(angles[valid])


def psnr(a, b) -> float:
    """Peak signal-to-noise ratio in dB, peak 1.0, capped at 100 dB."""
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    mse = float(np.mean((a - b) ** 2))
    return 10.0 * math.log10(1.0 / max(mse, _PSNR_MSE_FLOOR))


def ssim(a, b) -> float:
    """Mean SSIM over luma: 11x11 Gaussian window (sigma 1.5), K1/K2 = 0.01/0.03, L = 1.

    Computed on the Rec.601 luma of the values as stored. Window
    statistics are evaluated with a symmetric-boundary filter and the
    5-pixel frame is cropped before averaging, so boundary handling does
    not influence the score.
    """
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    if min(a.shape[:2]) < 11:
        raise ValueError("ssim needs images of at least 11x11 pixels")

    ya = a @ _LUMA
    yb = b @ _LUMA

    sigma, radius = 1.5, 5
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    kernel = np.exp(-(x**2) / (2.0 * sigma * sigma))
    kernel /= kernel.sum()

    def smooth(im):
        out = ndimage.correlate1d(im, kernel, axis=0, mode="reflect")
        return ndimage.correlate1d(out, kernel, axis=1, mode="reflect")

    mu_a = smooth(ya)
    mu_b = smooth(yb)
    var_a = smooth(ya * ya) - mu_a * mu_a
    var_b = smooth(yb * yb) - mu_b * mu_b
    cov = smooth(ya * yb) - mu_a * mu_b

    c1 = 0.01**2
    c2 = 0.03**2
    score = ((2 * mu_a * mu_b + c1) * (2 * cov + c2)) / (
        (mu_a**2 + mu_b**2 + c1) * (var_a + var_b + c2)
    )
    return float(score[radius:-radius, radius:-radius].mean())


def _rgb_to_lab(img: np.ndarray) -> np.ndarray:
    """sRGB-encoded [0,1] -> CIE Lab (D65)."""
    xyz = srgb_to_linear(img) @ _SRGB_TO_XYZ.T
    t = xyz / _D65_WHITE
    delta = 6.0 / 29.0
    f = np.where(t > delta**3, np.cbrt(t), t / (3 * delta**2) + 4.0 / 29.0)
    lab = np.empty_like(f)
    lab[..., 0] = 116.0 * f[..., 1] - 16.0
    lab[..., 1] = 500.0 * (f[..., 0] - f[..., 1])
    lab[..., 2] = 200.0 * (f[..., 1] - f[..., 2])
    return lab


def delta_e76(a, b) -> ErrorStats:
    """Per-pixel CIE76 color difference, treating stored values as sRGB.

    This is the one metric that needs an absolute color interpretation,
    so the sRGB transfer curve is always decoded here regardless of how
    the rest of the pipeline treats the data.
    """
    a = as_image(a)
    b = as_image(b)
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")
    diff = _rgb_to_lab(a) - _rgb_to_lab(b)
    return ErrorStats.from_values(np.linalg.norm(diff, axis=2))


# ---------------------------------------------------------------------------
# Dataset-level evaluation


@dataclass(frozen=True)
class PerImageResult:
    id: str
    angular_mean: float
    psnr: float
    ssim: float
    delta_e: float | None = None


@dataclass
class EvalReport:
    """Aggregate statistics plus the per-image rows they derive from."""

    angular: ErrorStats
    psnr: ErrorStats
    ssim: ErrorStats
    delta_e: ErrorStats | None
    per_image: list[PerImageResult]

    @classmethod
    def from_rows(cls, rows: list[PerImageResult]) -> "EvalReport":
        if not rows:
            raise EmptySampleError("cannot build a report from zero images")
        rows = sorted(rows, key=lambda r: r.id)
        deltas = [r.delta_e for r in rows if r.delta_e is not None]
        return cls(
            angular=ErrorStats.from_values([r.angular_mean for r in rows]),
            psnr=ErrorStats.from_values([r.psnr for r in rows]),
            ssim=ErrorStats.from_values([r.ssim for r in rows]),
            delta_e=ErrorStats.from_values(deltas) if len(deltas) == len(rows) else None,
            per_image=rows,
        )

    def to_json_dict(self) -> dict:
        def row(r: PerImageResult) -> dict:
            d = {
                "id": r.id,
                "angular_mean": _sig6(r.angular_mean),
                "psnr": _sig6(r.psnr),
                "ssim": _sig6(r.ssim),
            }
            if r.delta_e is not None:
                d["delta_e"] = _sig6(r.delta_e)
            return d

        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "count": len(self.per_image),
            "angular": _sig6_stats(self.angular),
            "psnr": _sig6_stats(self.psnr),
            "ssim": _sig6_stats(self.ssim),
            "delta_e": _sig6_stats(self.delta_e) if self.delta_e is not None else None,
            "per_image": [row(r) for r in self.per_image],
        }

    def write_json(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    def write_csv(self, path) -> None:
        include_delta = self.delta_e is not None
        header = "id,angular_mean,psnr,ssim" + (",delta_e" if include_delta else "")
        lines = [header]
        for r in self.per_image:
            cells = [r.id, f"{_sig6(r.angular_mean)}", f"{_sig6(r.psnr)}", f"{_sig6(r.ssim)}"]
            if include_delta:
                cells.append(f"{_sig6(r.delta_e)}")
            lines.append(",".join(cells))
        Path(path).write_text("\n".join(lines) + "\n")


def _sig6(x: float) -> float:
    return float(f"{x:.6g}")


def _sig6_stats(stats: ErrorStats) -> dict:
    d = stats.to_dict()
    return {k: (_sig6(v) if isinstance(v, float) else v) for k, v in d.items()}


class DatasetMismatchError(ValueError):
    """Directories being compared do not contain the same image ids."""


def _png_ids(directory) -> dict[str, Path]:
    return {p.stem: p for p in sorted(Path(directory).glob("*.png"))}


def _paired_ids(dirs: dict[str, Path | str]) -> tuple[list[str], dict[str, dict[str, Path]]]:
    listings = {name: _png_ids(d) for name, d in dirs.items()}
    all_ids = sorted(set().union(*[set(l) for l in listings.values()]))
    missing = {
        name: [i for i in all_ids if i not in listing]
        for name, listing in listings.items()
    }
    problems = {k: v for k, v in missing.items() if v}
    if problems:
        detail = "; ".join(f"{name} missing {ids}" for name, ids in problems.items())
        raise DatasetMismatchError(f"directory ids do not match: {detail}")
    if not all_ids:
        raise EmptySampleError("no images found to evaluate")
    return all_ids, listings


def evaluate_directories(
    pred_dir,
    gt_dir,
    input_dir=None,
    gtmap_dir=None,
    thr: MaskThresholds = DEFAULT_THRESHOLDS,
    include_delta_e: bool = False,
) -> EvalReport:
    """Evaluate a prediction directory against ground truth, paired by stem.

    Angular-error protocol depends on what is supplied:

    - neither input nor gtmap: direct per-pixel color angle pred vs gt;
    - input dir: both illuminant maps recovered as input/gt and input/pred;
    - gtmap dir (requires input): recovered estimate input/pred compared
      against the stored ground-truth map.

    PSNR/SSIM (and optionally dE76) are always computed between pred and
    gt images. Missing ids in any directory are a hard error.
    """
    dirs: dict[str, Path | str] = {"pred": pred_dir, "gt": gt_dir}
    if input_dir is not None:
        dirs["input"] = input_dir
    if gtmap_dir is not None:
        if input_dir is None:
            raise ValueError("gtmap comparison needs the input directory to recover e*")
        dirs["gtmap"] = gtmap_dir
    ids, listings = _paired_ids(dirs)

    rows = []
    for image_id in ids:
        pred = load_image(listings["pred"][image_id])
        gt = load_image(listings["gt"][image_id])
        if gtmap_dir is not None:
            inp = load_image(listings["input"][image_id])
            gt_map = load_map(listings["gtmap"][image_id])
            est_map = recover_illumination_map(inp, pred, thr)
            _, ang = angular_error_map(gt_map, est_map)
        elif input_dir is not None:
            inp = load_image(listings["input"][image_id])
            ang = angular_error_from_images(inp, gt, pred, thr)
        else:
            _, ang = pixel_angular_error(pred, gt, thr)
        rows.append(
            PerImageResult(
                id=image_id,
                angular_mean=ang.mean,
                psnr=psnr(pred, gt),
                ssim=ssim(pred, gt),
                delta_e=delta_e76(pred, gt).mean if include_delta_e else None,
            )
        )
    return EvalReport.from_rows(rows)
