"""Image/illuminant types, diagonal (von Kries) transforms, and map recovery.

Conventions used across the toolkit:

- images are row-major ``(H, W, 3)`` float64 arrays, linear RGB, nominal
  range [0, 1]. 8-bit files are decoded as ``value / 255`` with no gamma
  decode (the diagonal model is applied to stored values directly); pass
  ``srgb_decode=True`` to :func:`load_image` when a colorimetric reading
  is required.
- illuminant vectors are nonnegative RGB 3-vectors, compared by angle
  only; the canonical illuminant is ``(1, 1, 1)``.
- illumination maps carry per-pixel illuminant vectors plus a validity
  mask. Pixels near the black/saturation rails make the per-pixel ratio
  ``e = I / I_ref`` unreliable, so they are masked out rather than
  propagated as garbage.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from . import pngio


class ShapeMismatchError(ValueError):
    """Operands whose dimensions were required to agree do not."""


class EmptySampleError(ValueError):
    """A statistic was requested over zero valid samples."""


def as_image(img) -> np.ndarray:
    """Validate and return an image as a float64 (H, W, 3) array."""
    arr = np.asarray(img, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ShapeMismatchError(f"expected (H, W, 3) image, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ShapeMismatchError("image has zero pixels")
    if not np.all(np.isfinite(arr)):
        raise ValueError("image contains NaN or Inf values")
    return arr


def _same_shape(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ShapeMismatchError(f"shape mismatch: {a.shape} vs {b.shape}")


def normalize_vector(e) -> np.ndarray:
    """Scale an illuminant vector to unit L2 length (idempotent)."""
    v = np.asarray(e, dtype=np.float64).reshape(3)
    n = float(np.linalg.norm(v))
    if n == 0.0 or not np.isfinite(n):
        raise ValueError("cannot normalize a zero or non-finite illuminant vector")
    return v / n


@dataclass(frozen=True)
class MaskThresholds:
    """Rails beyond which per-pixel illuminant recovery is untrusted.

    A pixel is invalid when any channel is <= tau_black or >= tau_sat.
    Defaults sit one 8-bit quantization step inside the rails.
    `NO_MASKING` keeps only exact 0.0 / 1.0 excluded, which is the
    weakest masking that still leaves every division well-defined.
    """

    tau_black: float = 1.0 / 255.0
    tau_sat: float = 254.0 / 255.0

    def __post_init__(self):
        if not (0.0 <= self.tau_black < 1.0):
            raise ValueError("tau_black must be in [0, 1)")
        if not (0.0 < self.tau_sat <= 1.0):
            raise ValueError("tau_sat must be in (0, 1]")
        if self.tau_black >= self.tau_sat:
            raise ValueError("tau_black must be below tau_sat")

    def inside(self, img: np.ndarray) -> np.ndarray:
        """(H, W) mask of pixels with every channel strictly between the rails."""
        ok = (img > self.tau_black) & (img < self.tau_sat)
        return ok.all(axis=2)


DEFAULT_THRESHOLDS = MaskThresholds()
NO_MASKING = MaskThresholds(0.0, 1.0)


@dataclass
class IlluminationMap:
    """Per-pixel illuminant field e(x, y) with a validity mask.

    ``data`` is (H, W, 3) nonnegative; ``valid`` is (H, W) bool. Where
    valid is True the stored vector is positive and finite. Producers
    differ in scaling (recovery emits unit-L2 vectors, tint-map synthesis
    emits max-channel-1 vectors); consumers compare by angle only.
    """

    data: np.ndarray
    valid: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=np.float64)
        if self.data.ndim != 3 or self.data.shape[2] != 3:
            raise ShapeMismatchError(f"map data must be (H, W, 3), got {self.data.shape}")
        if self.valid is None:
            self.valid = np.ones(self.data.shape[:2], dtype=bool)
        else:
            self.valid = np.asarray(self.valid, dtype=bool)
            if self.valid.shape != self.data.shape[:2]:
                raise ShapeMismatchError(
                    f"valid mask {self.valid.shape} does not match map {self.data.shape[:2]}"
                )

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @classmethod
    def uniform(cls, e, height: int, width: int) -> "IlluminationMap":
        """Constant map holding the same illuminant at every pixel."""
        v = np.asarray(e, dtype=np.float64).reshape(3)
        return cls(np.broadcast_to(v, (height, width, 3)).copy())

    def copy(self) -> "IlluminationMap":
        return dataclasses.replace(self, data=self.data.copy(), valid=self.valid.copy())


def von_kries_correct(img, e) -> np.ndarray:
    """Divide each channel by the illuminant component (diagonal transform).

    Maps an image taken under illuminant ``e`` to its appearance under the
    canonical illuminant (1, 1, 1).
    """
    img = as_image(img)
    v = np.asarray(e, dtype=np.float64).reshape(3)
    if np.any(v <= 0) or not np.all(np.isfinite(v)):
        raise ValueError(f"illuminant components must be positive, got {v}")
    return img / v


def apply_cast(img, e) -> np.ndarray:
    """Multiply each channel by the illuminant component (inverse transform).

    No clipping is performed; callers clip before 8-bit export.
    """
    img = as_image(img)
    v = np.asarray(e, dtype=np.float64).reshape(3)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ValueError(f"illuminant components must be nonnegative, got {v}")
    return img * v


def apply_cast_map(img, imap: IlluminationMap) -> np.ndarray:
    """Per-pixel channel-wise multiply by an illumination map."""
    img = as_image(img)
    if imap.data.shape != img.shape:
        raise ShapeMismatchError(f"map {imap.data.shape} does not match image {img.shape}")
    return img * imap.data


def correct_with_map(img, imap: IlluminationMap) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel von Kries correction using a map.

    Returns ``(corrected, valid)``. Invalid map pixels pass through
    unchanged and are reported via the returned mask; no NaN/Inf is ever
    produced.
    """
    img = as_image(img)
    if imap.data.shape != img.shape:
        raise ShapeMismatchError(f"map {imap.data.shape} does not match image {img.shape}")
    valid = imap.valid & (imap.data > 0).all(axis=2)
    safe = np.where(valid[..., None], imap.data, 1.0)
    return np.where(valid[..., None], img / safe, img), valid


def recover_illumination_map(input_img, reference, thr: MaskThresholds = DEFAULT_THRESHOLDS) -> IlluminationMap:
    """Per-pixel illuminant from an image pair: e = input / reference.

    Pixels where any channel of either image sits at or beyond the
    thresholds are marked invalid (the ratio is meaningless near black
    and saturation). Valid pixels are L2-normalized.
    """
    input_img = as_image(input_img)
    reference = as_image(reference)
    _same_shape(input_img, reference)

    valid = thr.inside(input_img) & thr.inside(reference)
    safe_ref = np.where(valid[..., None], reference, 1.0)
    ratio = np.where(valid[..., None], input_img / safe_ref, 0.0)
    norms = np.linalg.norm(ratio, axis=2)
    safe_norms = np.where(valid, norms, 1.0)
    data = ratio / safe_norms[..., None]
    return IlluminationMap(data, valid)


# ---------------------------------------------------------------------------
# sRGB transfer functions (IEC 61966-2-1). The pipeline treats stored values
# as linear by default; these are used by the optional decode flag and by the
# CIE Lab conversion in the metrics module.

def srgb_to_linear(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    return np.where(v <= 0.04045, v / 12.92, ((v + 0.055) / 1.055) ** 2.4)


def linear_to_srgb(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.float64)
    return np.where(v <= 0.0031308, v * 12.92, 1.055 * np.maximum(v, 0.0) ** (1 / 2.4) - 0.055)


# ---------------------------------------------------------------------------
# File I/O

def load_image(path, srgb_decode: bool = False) -> np.ndarray:
    """Load an 8- or 16-bit RGB PNG as floats in [0, 1].

    8-bit values map to value/255, 16-bit to value/65535. By default no
    gamma decode is applied; ``srgb_decode=True`` linearizes through the
    sRGB transfer curve.
    """
    raw = pngio.read_png(path)
    scale = 255.0 if raw.dtype == np.uint8 else 65535.0
    img = raw.astype(np.float64) / scale
    if srgb_decode:
        img = srgb_to_linear(img)
    return img


def quantize(img, bit_depth: int = 8) -> np.ndarray:
    """Clip to [0, 1] and round to the bit-depth grid, staying in float."""
    if bit_depth not in (8, 16):
        raise ValueError("bit_depth must be 8 or 16")
    peak = float(2**bit_depth - 1)
    return np.round(np.clip(as_image(img), 0.0, 1.0) * peak) / peak


def save_image(img, path, bit_depth: int = 8) -> None:
    """Save to PNG: clip to [0, 1], then quantize by round(v * peak)."""
    img = as_image(img)
    if bit_depth == 8:
        data = np.round(np.clip(img, 0.0, 1.0) * 255.0).astype(np.uint8)
    elif bit_depth == 16:
        data = np.round(np.clip(img, 0.0, 1.0) * 65535.0).astype(np.uint16)
    else:
        raise ValueError("bit_depth must be 8 or 16")
    pngio.write_png(path, data)


def save_map(imap: IlluminationMap, path) -> None:
    """Write a map as 16-bit PNG: channel = round(e * 65535), invalid = 0."""
    data = np.where(imap.valid[..., None], np.clip(imap.data, 0.0, 1.0), 0.0)
    pngio.write_png(path, np.round(data * 65535.0).astype(np.uint16))


def load_map(path) -> IlluminationMap:
    """Read a 16-bit map PNG; pixels stored as (0, 0, 0) come back invalid."""
    data = load_image(path)
    valid = (data > 0).any(axis=2)
    return IlluminationMap(data, valid)
