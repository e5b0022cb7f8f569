"""Seeded synthesis of multi-illuminant datasets.

Tint maps are Gaussian mixtures of randomly colored illuminants: each of
K illuminants gets a chromaticity (random hue/saturation at full value),
a random center on the image plane, and a random spatial scale; per-pixel
the illuminants are blended by their Gaussian weights. Maps are rescaled
per pixel so the largest channel is exactly 1 (tinting never amplifies,
so in-range inputs never clip) and clamped below at a floor that keeps
the inverse transform well-conditioned. A `uniform` mode emits constant
single-illuminant casts and a `shadow` mode emits achromatic dimming
blobs.

Tinted inputs are produced by the inverse von Kries transform, i.e.
multiplying the clean image by the map. Every emitted pair/record is a
pure function of ``(seed, image index, spec)``: each index owns its own
`CounterStream` substreams, so regenerating any subset (or generating in
parallel) reproduces identical bytes.

Clean sources are either PNGs from a directory or procedural multi-scale
value-noise textures (each channel spans the full [0, 1] range, so
quantization stress near the rails is represented).
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .core import IlluminationMap, apply_cast_map, as_image, load_image, save_image, save_map
from .rng import CounterStream

MANIFEST_SCHEMA_VERSION = 1

MODES = ("multi", "uniform", "shadow")


@dataclass(frozen=True)
class TintSpec:
    """Sampling parameters for synthetic tint maps."""

    num_illuminants: int = 3
    hue_range: tuple[float, float] = (0.0, 360.0)
    saturation_range: tuple[float, float] = (0.2, 0.8)
    sigma_range: tuple[float, float] = (0.2, 0.6)  # fraction of max(H, W)
    min_channel_floor: float = 0.2
    mode: str = "multi"

    def __post_init__(self):
        if not 1 <= self.num_illuminants <= 3:
            raise ValueError("num_illuminants must be in [1, 3]")
        for name in ("hue_range", "saturation_range", "sigma_range"):
            lo, hi = getattr(self, name)
            if hi < lo:
                raise ValueError(f"{name} is empty: {(lo, hi)}")
        if not 0.0 < self.min_channel_floor < 1.0:
            raise ValueError("min_channel_floor must be in (0, 1)")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    def to_dict(self) -> dict:
        return {
            "num_illuminants": self.num_illuminants,
            "hue_range": list(self.hue_range),
            "saturation_range": list(self.saturation_range),
            "sigma_range": list(self.sigma_range),
            "min_channel_floor": self.min_channel_floor,
            "mode": self.mode,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "TintSpec":
        return cls(
            num_illuminants=int(d["num_illuminants"]),
            hue_range=tuple(d["hue_range"]),
            saturation_range=tuple(d["saturation_range"]),
            sigma_range=tuple(d["sigma_range"]),
            min_channel_floor=float(d["min_channel_floor"]),
            mode=str(d["mode"]),
        )


def hsv_to_rgb(hue_deg: float, saturation: float) -> np.ndarray:
    """Hue (degrees) and saturation at full value -> RGB with max channel 1."""
    h = (hue_deg % 360.0) / 60.0
    i = int(h) % 6
    f = h - int(h)
    p = 1.0 - saturation
    q = 1.0 - saturation * f
    t = 1.0 - saturation * (1.0 - f)
    rgb = [
        (1.0, t, p),
        (q, 1.0, p),
        (p, 1.0, t),
        (p, q, 1.0),
        (t, p, 1.0),
        (1.0, p, q),
    ][i]
    return np.array(rgb, dtype=np.float64)


def _gaussian_responses(width, height, centers, sigmas):
    """Stabilized per-pixel Gaussian weights, one layer per center."""
    ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
    layers = np.empty((len(centers), height, width))
    for k, ((cx, cy), sig) in enumerate(zip(centers, sigmas)):
        layers[k] = -((xs - cx) ** 2 + (ys - cy) ** 2) / (2.0 * sig * sig)
    return layers


def gen_tint_map(width: int, height: int, spec: TintSpec, rng: CounterStream) -> tuple[IlluminationMap, dict]:
    """Sample one tint map and its provenance record.

    Draw order (fixed, part of the reproducibility contract): hues,
    saturations, center xs, center ys, sigmas, then the shadow strength
    for shadow mode.
    """
    if width < 1 or height < 1:
        raise ValueError("map dimensions must be positive")

    record: dict = {"mode": spec.mode, "width": width, "height": height}
    scale = float(max(width, height))

    if spec.mode == "uniform":
        hue = rng.uniform(*spec.hue_range)
        sat = rng.uniform(*spec.saturation_range)
        color = np.clip(hsv_to_rgb(hue, sat), spec.min_channel_floor, 1.0)
        data = np.broadcast_to(color, (height, width, 3)).copy()
        record.update(illuminants=[color.tolist()], centers=[], sigmas=[])
        return IlluminationMap(data), record

    k = spec.num_illuminants
    if spec.mode == "multi":
        hues = rng.uniform(spec.hue_range[0], spec.hue_range[1], k)
        sats = rng.uniform(spec.saturation_range[0], spec.saturation_range[1], k)
        colors = np.stack([hsv_to_rgb(h, s) for h, s in zip(hues, sats)])
    else:
        colors = np.ones((0, 3))
    cxs = rng.uniform(0.0, float(width), k)
    cys = rng.uniform(0.0, float(height), k)
    sigmas = rng.uniform(spec.sigma_range[0], spec.sigma_range[1], k) * scale
    # records go through JSON, so keep them list-based from the start
    centers = [[float(x), float(y)] for x, y in zip(cxs, cys)]

    log_w = _gaussian_responses(width, height, centers, sigmas)

    if spec.mode == "shadow":
        strength = rng.uniform(0.3, 0.7)
        mask = np.clip(np.exp(log_w).sum(axis=0), 0.0, 1.0)
        data = np.repeat((1.0 - strength * mask)[..., None], 3, axis=2)
        record.update(
            illuminants=[], centers=centers, sigmas=sigmas.tolist(), shadow_strength=strength
        )
        return IlluminationMap(data), record

    # Blend illuminants by normalized weights; subtracting the per-pixel max
    # exponent keeps the denominator >= 1 however far a pixel is from every center.
    w = np.exp(log_w - log_w.max(axis=0, keepdims=True))
    blended = np.tensordot(w / w.sum(axis=0, keepdims=True), colors, axes=(0, 0))
    blended /= blended.max(axis=2, keepdims=True)
    data = np.clip(blended, spec.min_channel_floor, 1.0)
    record.update(
        illuminants=colors.tolist(), centers=centers, sigmas=sigmas.tolist()
    )
    return IlluminationMap(data), record


def synthesize_pair(clean, imap: IlluminationMap) -> np.ndarray:
    """Tint a clean image with a map (per-pixel inverse von Kries)."""
    return apply_cast_map(clean, imap)


_NOISE_CELLS = (4, 8, 16, 32)
_NOISE_OVERSHOOT = 0.08


def value_noise_texture(height: int, width: int, rng: CounterStream) -> np.ndarray:
    """Multi-scale value-noise RGB texture spanning the full [0, 1] range.

    After min-max normalization each channel is stretched slightly past
    the rails and clipped, like real exposures: a few percent of pixels
    end up black or saturated and a continuum sits just inside the rails,
    so quantization and mask behavior near the rails is actually
    exercised by synthetic data.
    """
    total = np.zeros((height, width, 3))
    amplitude = 1.0
    for cells in _NOISE_CELLS:
        grid = rng.random(cells + 1, cells + 1, 3)
        total += amplitude * _bilinear_upsample(grid, height, width, cells)
        amplitude *= 0.5
    lo = total.min(axis=(0, 1), keepdims=True)
    hi = total.max(axis=(0, 1), keepdims=True)
    span = np.where(hi > lo, hi - lo, 1.0)
    unit = np.where(hi > lo, (total - lo) / span, 0.5)
    stretched = unit * (1.0 + 2.0 * _NOISE_OVERSHOOT) - _NOISE_OVERSHOOT
    return np.clip(stretched, 0.0, 1.0)


def _bilinear_upsample(grid: np.ndarray, height: int, width: int, cells: int) -> np.ndarray:
    def axis_coords(size):
        pos = np.arange(size, dtype=np.float64) * (cells / size)
        i0 = np.minimum(pos.astype(int), cells - 1)
        return i0, pos - i0

    r0, fr = axis_coords(height)
    c0, fc = axis_coords(width)
    fr = fr[:, None, None]
    fc = fc[None, :, None]
    g00 = grid[np.ix_(r0, c0)]
    g01 = grid[np.ix_(r0, c0 + 1)]
    g10 = grid[np.ix_(r0 + 1, c0)]
    g11 = grid[np.ix_(r0 + 1, c0 + 1)]
    top = g00 * (1 - fc) + g01 * fc
    bottom = g10 * (1 - fc) + g11 * fc
    return top * (1 - fr) + bottom * fr


def generate_pair(
    seed: int,
    index: int,
    spec: TintSpec,
    height: int,
    width: int,
    clean=None,
) -> tuple[np.ndarray, IlluminationMap, np.ndarray, dict]:
    """Build pair ``index`` of a dataset entirely in memory (the float path).

    Returns ``(clean, map, tinted, record)``. Streams 2i (tint map) and
    2i+1 (texture) of the seed belong to this index, so the result does
    not depend on how many other pairs exist or the order of generation.
    """
    map_rng = CounterStream(seed, 2 * index)
    if clean is None:
        clean = value_noise_texture(height, width, CounterStream(seed, 2 * index + 1))
    else:
        clean = as_image(clean)
        height, width = clean.shape[:2]
    imap, record = gen_tint_map(width, height, spec, map_rng)
    record["id"] = f"{index:05d}"
    return clean, imap, synthesize_pair(clean, imap), record


@dataclass
class DatasetManifest:
    """Provenance of an emitted dataset; (seed, spec) regenerate the records."""

    seed: int
    count: int
    width: int | None
    height: int | None
    spec: TintSpec
    records: list[dict] = field(default_factory=list)

    def to_json_dict(self) -> dict:
        return {
            "schema_version": MANIFEST_SCHEMA_VERSION,
            "seed": self.seed,
            "count": self.count,
            "width": self.width,
            "height": self.height,
            "spec": self.spec.to_dict(),
            "records": self.records,
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), indent=2) + "\n")

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        d = json.loads(Path(path).read_text())
        if d.get("schema_version") != MANIFEST_SCHEMA_VERSION:
            raise ValueError(f"unsupported manifest schema: {d.get('schema_version')}")
        return cls(
            seed=int(d["seed"]),
            count=int(d["count"]),
            width=d["width"],
            height=d["height"],
            spec=TintSpec.from_dict(d["spec"]),
            records=list(d["records"]),
        )


def emit_dataset(
    out_dir,
    count: int,
    spec: TintSpec,
    seed: int,
    size: tuple[int, int] = (128, 128),
    source_dir=None,
    jobs: int = 1,
) -> DatasetManifest:
    """Write a paired dataset: input/ (tinted), target/ (clean), gtmap/, manifest.

    Images are 8-bit PNG; ground-truth maps are 16-bit PNG encoded as
    round(e * 65535). With a source directory, clean images cycle through
    its PNGs at native size; otherwise procedural textures of ``size``
    (height, width) are used. ``jobs`` > 1 emits pairs concurrently;
    output is byte-identical to serial emission.
    """
    out = Path(out_dir)
    for sub in ("input", "target", "gtmap"):
        (out / sub).mkdir(parents=True, exist_ok=True)

    sources = None
    if source_dir is not None:
        sources = sorted(Path(source_dir).glob("*.png"))
        if not sources:
            raise FileNotFoundError(f"no PNG sources found in {source_dir}")

    height, width = size

    def emit_one(index: int) -> dict:
        clean = load_image(sources[index % len(sources)]) if sources else None
        clean, imap, tinted, record = generate_pair(seed, index, spec, height, width, clean)
        name = f"{record['id']}.png"
        save_image(tinted, out / "input" / name, bit_depth=8)
        save_image(clean, out / "target" / name, bit_depth=8)
        save_map(imap, out / "gtmap" / name)
        return record

    if jobs > 1 and count > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(emit_one, range(count)))
    else:
        records = [emit_one(i) for i in range(count)]

    manifest = DatasetManifest(
        seed=seed,
        count=count,
        width=None if sources else width,
        height=None if sources else height,
        spec=spec,
        records=records,
    )
    manifest.save(out / "manifest.json")
    return manifest
