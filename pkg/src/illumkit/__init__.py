"""illumkit: color constancy toolkit.

Von Kries correction and casting, per-pixel illumination recovery,
grey-framework and spatially-varying illuminant estimators, angular/PSNR/
SSIM/dE76 metrics, differentiable L1 + angular losses, and seeded
synthetic multi-illuminant dataset generation. See the `illumkit` CLI for
the batch workflows.
"""

from .core import (
    DEFAULT_THRESHOLDS,
    NO_MASKING,
    EmptySampleError,
    IlluminationMap,
    MaskThresholds,
    ShapeMismatchError,
    apply_cast,
    apply_cast_map,
    correct_with_map,
    load_image,
    load_map,
    normalize_vector,
    quantize,
    recover_illumination_map,
    save_image,
    save_map,
    von_kries_correct,
)
from .estimators import (
    PRESETS,
    GreyFrameworkParams,
    GridParams,
    LsacParams,
    estimate_map_grid,
    estimate_map_lsac,
    estimate_uniform,
)
from .losses import LossResult, LossWeights, angular_loss, combined_loss, l1_loss
from .metrics import (
    ErrorStats,
    EvalReport,
    angular_error,
    angular_error_from_images,
    angular_error_map,
    delta_e76,
    evaluate_directories,
    pixel_angular_error,
    psnr,
    ssim,
)
from .rng import CounterStream
from .synth import DatasetManifest, TintSpec, emit_dataset, gen_tint_map, generate_pair, synthesize_pair

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_THRESHOLDS",
    "NO_MASKING",
    "CounterStream",
    "DatasetManifest",
    "EmptySampleError",
    "ErrorStats",
    "EvalReport",
    "GreyFrameworkParams",
    "GridParams",
    "IlluminationMap",
    "LossResult",
    "LossWeights",
    "LsacParams",
    "MaskThresholds",
    "PRESETS",
    "ShapeMismatchError",
    "TintSpec",
    "angular_error",
    "angular_error_from_images",
    "angular_error_map",
    "angular_loss",
    "apply_cast",
    "apply_cast_map",
    "combined_loss",
    "correct_with_map",
    "delta_e76",
    "emit_dataset",
    "estimate_map_grid",
    "estimate_map_lsac",
    "estimate_uniform",
    "evaluate_directories",
    "gen_tint_map",
    "generate_pair",
    "l1_loss",
    "load_image",
    "load_map",
    "normalize_vector",
    "pixel_angular_error",
    "psnr",
    "quantize",
    "recover_illumination_map",
    "save_image",
    "save_map",
    "ssim",
    "synthesize_pair",
    "von_kries_correct",
]
