"""Illuminant estimators: the grey-based framework plus per-pixel maps.

The classical statistics-based estimators (Grey World, White Patch,
Shades of Gray, Grey Edge) are all instances of one formula

    e_c = ( mean over pixels of |D^n (G_sigma * I)_c|^p )^(1/p)

where ``G_sigma`` is Gaussian smoothing, ``D`` the spatial gradient
magnitude, ``n`` the derivative order, and ``p`` the Minkowski norm
(``p = inf`` means the channel-wise maximum). The result is reported
L2-normalized; illuminant estimates carry no brightness.

Operator definitions pinned here (the straight-loop test oracle mirrors
them):

- Gaussian kernel: samples of exp(-x^2 / (2 sigma^2)) at integer offsets
  with radius ``int(4 sigma + 0.5)``, normalized to sum 1; separable,
  rows then columns, symmetric boundary (edge sample repeated).
- Gradient: correlation with the Sobel kernels divided by 8 (a true
  central-difference derivative estimate), same boundary; magnitude is
  the per-channel hypot of the two components. ``D^2`` applies the same
  operator to the magnitude image.

Two spatially-varying estimators are provided: patch grids (estimate per
tile, interpolate between tile centers) and local space average color
(large-scale Gaussian blur, normalized per pixel).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .core import IlluminationMap, as_image

_ACHROMATIC = np.ones(3) / math.sqrt(3.0)

SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]], dtype=np.float64) / 8.0
SOBEL_Y = SOBEL_X.T


class DegenerateImageWarning(UserWarning):
    """The estimate was degenerate (all-zero); an achromatic fallback was used."""


@dataclass(frozen=True)
class GreyFrameworkParams:
    """(n, p, sigma) triple selecting a grey-based estimator."""

    deriv_order: int = 0
    minkowski_p: float = 1.0
    smoothing_sigma: float = 0.0

    def __post_init__(self):
        if self.deriv_order not in (0, 1, 2):
            raise ValueError("deriv_order must be 0, 1, or 2")
        if not self.minkowski_p >= 1.0:
            raise ValueError("minkowski_p must be >= 1 (math.inf allowed)")
        if self.smoothing_sigma < 0:
            raise ValueError("smoothing_sigma must be >= 0")


PRESETS: dict[str, GreyFrameworkParams] = {
    "gw": GreyFrameworkParams(0, 1.0, 0.0),
    "wp": GreyFrameworkParams(0, math.inf, 0.0),
    "sog": GreyFrameworkParams(0, 6.0, 0.0),
    "ge1": GreyFrameworkParams(1, 1.0, 1.0),
    "ge2": GreyFrameworkParams(2, 1.0, 1.0),
}


@dataclass(frozen=True)
class GridParams:
    """Patch-grid estimation: a local method per tile plus interpolation."""

    patch_size: int = 32
    local_method: GreyFrameworkParams = field(default_factory=GreyFrameworkParams)
    interpolation: str = "bilinear"

    def __post_init__(self):
        if self.patch_size < 1:
            raise ValueError("patch_size must be >= 1")
        if self.interpolation not in ("nearest", "bilinear"):
            raise ValueError("interpolation must be 'nearest' or 'bilinear'")


@dataclass(frozen=True)
class LsacParams:
    """Local space average color: Gaussian averaging scale in pixels."""

    sigma: float

    def __post_init__(self):
        if not self.sigma > 0:
            raise ValueError("sigma must be > 0")


def default_lsac_params(height: int, width: int) -> LsacParams:
    return LsacParams(sigma=min(height, width) / 4.0)


def gaussian_kernel1d(sigma: float) -> np.ndarray:
    """Normalized FIR Gaussian, radius int(4*sigma + 0.5)."""
    radius = int(4.0 * sigma + 0.5)
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-(x**2) / (2.0 * sigma * sigma))
    return k / k.sum()


def gaussian_smooth(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian blur, symmetric boundary, per channel."""
    if sigma <= 0:
        return img
    kernel = gaussian_kernel1d(sigma)
    out = ndimage.correlate1d(img, kernel, axis=0, mode="reflect")
    return ndimage.correlate1d(out, kernel, axis=1, mode="reflect")


def gradient_magnitude(img: np.ndarray) -> np.ndarray:
    """Per-channel spatial gradient L2 magnitude (Sobel/8, symmetric boundary)."""
    out = np.empty_like(img)
    for c in range(img.shape[2]):
        gx = ndimage.correlate(img[:, :, c], SOBEL_X, mode="reflect")
        gy = ndimage.correlate(img[:, :, c], SOBEL_Y, mode="reflect")
        out[:, :, c] = np.hypot(gx, gy)
    return out


def estimate_uniform(img, params: GreyFrameworkParams = PRESETS["gw"]) -> np.ndarray:
    """Single illuminant estimate via the grey-based framework (unit L2).

    An all-zero estimate (e.g. an all-black image) falls back to the
    achromatic vector and emits `DegenerateImageWarning`.
    """
    img = as_image(img)
    if params.deriv_order > 0 and min(img.shape[:2]) < 3:
        raise ValueError("derivative-based estimation needs an image of at least 3x3")

    work = gaussian_smooth(img, params.smoothing_sigma)
    for _ in range(params.deriv_order):
        work = gradient_magnitude(work)
    mag = np.abs(work)

    if math.isinf(params.minkowski_p):
        e = mag.max(axis=(0, 1))
    else:
        e = np.mean(mag**params.minkowski_p, axis=(0, 1)) ** (1.0 / params.minkowski_p)

    norm = float(np.linalg.norm(e))
    if norm == 0.0:
        warnings.warn(
            "degenerate image: framework estimate is zero, using achromatic fallback",
            DegenerateImageWarning,
            stacklevel=2,
        )
        return _ACHROMATIC.copy()
    return e / norm


def _patch_edges(extent: int, patch: int) -> np.ndarray:
    edges = np.arange(0, extent, patch)
    return np.append(edges, extent)


def estimate_map_grid(img, params: GridParams) -> IlluminationMap:
    """Per-pixel map from patch-wise uniform estimates.

    The image is tiled into patch_size squares (trailing patches may be
    smaller), each patch is estimated independently, and per-pixel values
    are interpolated between patch centers. Every output pixel is valid
    and unit length.
    """
    img = as_image(img)
    height, width = img.shape[:2]
    if params.patch_size > min(height, width):
        raise ValueError(
            f"patch_size {params.patch_size} exceeds image extent {min(height, width)}"
        )

    row_edges = _patch_edges(height, params.patch_size)
    col_edges = _patch_edges(width, params.patch_size)
    n_rows = len(row_edges) - 1
    n_cols = len(col_edges) - 1

    estimates = np.empty((n_rows, n_cols, 3))
    for i in range(n_rows):
        for j in range(n_cols):
            patch = img[row_edges[i] : row_edges[i + 1], col_edges[j] : col_edges[j + 1]]
            estimates[i, j] = estimate_uniform(patch, params.local_method)

    centers_r = (row_edges[:-1] + row_edges[1:] - 1) / 2.0
    centers_c = (col_edges[:-1] + col_edges[1:] - 1) / 2.0

    if params.interpolation == "nearest":
        ri = np.abs(np.arange(height)[:, None] - centers_r[None, :]).argmin(axis=1)
        ci = np.abs(np.arange(width)[:, None] - centers_c[None, :]).argmin(axis=1)
        data = estimates[ri][:, ci]
    else:
        data = _interp_axis(estimates, centers_r, height, axis=0)
        data = _interp_axis(data, centers_c, width, axis=1)

    norms = np.linalg.norm(data, axis=2, keepdims=True)
    data = data / norms
    return IlluminationMap(data)


def _interp_axis(values: np.ndarray, centers: np.ndarray, size: int, axis: int) -> np.ndarray:
    """Linear interpolation from patch centers to pixel positions along one axis."""
    if len(centers) == 1:
        return np.repeat(values, size, axis=axis)
    coords = np.clip(np.arange(size, dtype=np.float64), centers[0], centers[-1])
    seg = np.clip(np.searchsorted(centers, coords, side="right") - 1, 0, len(centers) - 2)
    t = (coords - centers[seg]) / (centers[seg + 1] - centers[seg])
    lo = np.take(values, seg, axis=axis)
    hi = np.take(values, seg + 1, axis=axis)
    shape = [1, 1, 1]
    shape[axis] = size
    t = t.reshape(shape)
    return lo * (1.0 - t) + hi * t


def estimate_map_lsac(img, params: LsacParams) -> IlluminationMap:
    """Local space average color: per-pixel normalized large-scale blur.

    Pixels whose blurred color is exactly zero (possible on mostly-black
    images, since the kernel has finite support) are marked invalid.
    """
    img = as_image(img)
    blurred = gaussian_smooth(img, params.sigma)
    norms = np.linalg.norm(blurred, axis=2)
    valid = norms > 0.0
    safe = np.where(valid, norms, 1.0)
    data = np.where(valid[..., None], blurred / safe[..., None], 0.0)
    return IlluminationMap(data, valid)
