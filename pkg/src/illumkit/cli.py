"""Command-line front end: synth, estimate, correct, eval, losscheck.

Exit codes are a stable scripting contract: 0 success, 1 runtime/data
error, 2 usage error. All subcommands are deterministic given identical
inputs and seeds, including JSON field order.

Config file: optional, via --config PATH or the ILLUMKIT_CONFIG
environment variable. Plain ``key = value`` lines (# comments allowed);
keys are ``<subcommand>.<option>`` for any option that has a default,
e.g. ``synth.seed = 7``. Precedence: command-line flags, then config
file, then built-in defaults. Unknown keys are rejected.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import estimators, losses, metrics, synth
from .core import (
    DEFAULT_THRESHOLDS,
    IlluminationMap,
    correct_with_map,
    load_image,
    load_map,
    save_image,
    save_map,
    von_kries_correct,
)

_SENTINEL = object()


class UsageError(ValueError):
    """Bad arguments or config; maps to exit code 2."""


def _parse_float_or_inf(text: str) -> float:
    if text.strip().lower() in ("inf", "infinity"):
        return math.inf
    return float(text)


def _parse_bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise UsageError(f"expected a boolean, got {text!r}")


def _parse_wxh(text: str) -> tuple[int, int]:
    """'WxH' -> (height, width)."""
    try:
        w, h = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"expected WxH, got {text!r}") from None
    return h, w


def _parse_hxw(text: str) -> tuple[int, int]:
    """'HxW' -> (height, width)."""
    try:
        h, w = (int(p) for p in text.lower().split("x"))
    except ValueError:
        raise UsageError(f"expected HxW, got {text!r}") from None
    return h, w


# Options that may come from a config file: name -> (parser, default).
_CONFIGURABLE = {
    "synth": {
        "count": (int, 10),
        "seed": (int, 0),
        "mode": (str, "multi"),
        "illuminants": (int, 3),
        "size": (str, "128x128"),
        "source": (str, None),
        "jobs": (int, 1),
    },
    "estimate": {
        "method": (str, "gw"),
        "p": (_parse_float_or_inf, None),
        "sigma": (float, None),
        "patch": (int, 32),
        "interp": (str, "bilinear"),
    },
    "correct": {
        "p": (_parse_float_or_inf, None),
        "sigma": (float, None),
        "patch": (int, 32),
        "interp": (str, "bilinear"),
    },
    "eval": {
        "delta_e": (_parse_bool, False),
    },
    "losscheck": {
        "trials": (int, 100),
        "size": (str, "8x8"),
        "seed": (int, 0),
    },
}


def load_config(path) -> dict[str, str]:
    valid = {f"{cmd}.{key}" for cmd, opts in _CONFIGURABLE.items() for key in opts}
    out: dict[str, str] = {}
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
        key, value = (part.strip() for part in stripped.split("=", 1))
        if key not in valid:
            raise UsageError(
                f"{path}:{lineno}: unknown config key {key!r}; valid keys: {', '.join(sorted(valid))}"
            )
        out[key] = value
    return out


def _resolve(ns: argparse.Namespace, command: str, config: dict[str, str]) -> None:
    """Apply flags > config > defaults for the configurable options."""
    for key, (parse, default) in _CONFIGURABLE[command].items():
        if getattr(ns, key) is not _SENTINEL:
            continue
        conf = config.get(f"{command}.{key}")
        setattr(ns, key, parse(conf) if conf is not None else default)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="illumkit",
        description="Color constancy toolkit: dataset synthesis, illuminant estimation, correction, and evaluation.",
    )
    parser.add_argument("--config", help="config file (also: ILLUMKIT_CONFIG env var)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="emit a synthetic tinted dataset")
    p.add_argument("--out", required=True, help="output dataset directory")
    p.add_argument("--count", type=int, default=_SENTINEL)
    p.add_argument("--seed", type=int, default=_SENTINEL)
    p.add_argument("--mode", choices=synth.MODES, default=_SENTINEL)
    p.add_argument("--illuminants", type=int, default=_SENTINEL, help="illuminants per map (1-3)")
    p.add_argument("--size", default=_SENTINEL, help="WxH of procedural images")
    p.add_argument("--source", default=_SENTINEL, help="directory of clean source PNGs")
    p.add_argument("--jobs", type=int, default=_SENTINEL, help="parallel workers")

    p = sub.add_parser("estimate", help="estimate illuminants (uniform vector or per-pixel map)")
    p.add_argument("--in", dest="input", required=True, help="image or directory")
    p.add_argument("--method", default=_SENTINEL, help="gw|wp|sog|ge1|ge2|grid:<method>|lsac")
    p.add_argument("--out", help="JSON (uniform) or 16-bit map PNG / directory (map methods)")
    p.add_argument("--p", type=_parse_float_or_inf, default=_SENTINEL, help="Minkowski norm override")
    p.add_argument("--sigma", type=float, default=_SENTINEL, help="smoothing / averaging scale override")
    p.add_argument("--patch", type=int, default=_SENTINEL, help="grid patch size")
    p.add_argument("--interp", choices=("nearest", "bilinear"), default=_SENTINEL)

    p = sub.add_parser("correct", help="von Kries correction with a vector, a map, or auto-estimation")
    p.add_argument("--in", dest="input", required=True, help="image or directory")
    p.add_argument("--out", required=True, help="output image or directory")
    p.add_argument("--vector", help="R,G,B illuminant")
    p.add_argument("--map", dest="map_path", help="illumination map PNG or directory")
    p.add_argument("--auto", help="estimate-then-correct with this method")
    p.add_argument("--p", type=_parse_float_or_inf, default=_SENTINEL)
    p.add_argument("--sigma", type=float, default=_SENTINEL)
    p.add_argument("--patch", type=int, default=_SENTINEL)
    p.add_argument("--interp", choices=("nearest", "bilinear"), default=_SENTINEL)

    p = sub.add_parser("eval", help="evaluate predictions against ground truth")
    p.add_argument("--pred", required=True)
    p.add_argument("--gt", required=True)
    p.add_argument("--input", help="input (tinted) directory: use illuminant-recovery angular error")
    p.add_argument("--gtmap", help="ground-truth map directory (requires --input)")
    p.add_argument("--report", required=True, help="output report JSON")
    p.add_argument("--csv", help="optional per-image CSV")
    p.add_argument("--delta-e", dest="delta_e", action="store_const", const=True, default=_SENTINEL)

    p = sub.add_parser("losscheck", help="finite-difference verification of loss gradients")
    p.add_argument("--trials", type=int, default=_SENTINEL)
    p.add_argument("--size", default=_SENTINEL, help="HxW of random trial images")
    p.add_argument("--seed", type=int, default=_SENTINEL)
    p.add_argument("--corrupt", action="store_const", const=True, default=False, help=argparse.SUPPRESS)

    return parser


def _iter_images(in_path: str) -> list[tuple[str, Path]]:
    path = Path(in_path)
    if path.is_dir():
        items = [(p.stem, p) for p in sorted(path.glob("*.png"))]
        if not items:
            raise FileNotFoundError(f"no PNG files in {path}")
        return items
    if not path.exists():
        raise FileNotFoundError(f"no such file: {path}")
    return [(path.stem, path)]


def _resolve_method(ns) -> tuple[str, object]:
    """Return ("uniform", params) or ("grid", params) or ("lsac", sigma or None)."""
    name = ns.method
    if name in estimators.PRESETS:
        base = estimators.PRESETS[name]
        params = estimators.GreyFrameworkParams(
            deriv_order=base.deriv_order,
            minkowski_p=base.minkowski_p if ns.p is None else ns.p,
            smoothing_sigma=base.smoothing_sigma if ns.sigma is None else ns.sigma,
        )
        return "uniform", params
    if name == "lsac":
        return "lsac", ns.sigma
    if name.startswith("grid:"):
        inner = name.split(":", 1)[1]
        if inner not in estimators.PRESETS:
            raise UsageError(f"unknown grid method {inner!r}; choose from {sorted(estimators.PRESETS)}")
        base = estimators.PRESETS[inner]
        local = estimators.GreyFrameworkParams(
            deriv_order=base.deriv_order,
            minkowski_p=base.minkowski_p if ns.p is None else ns.p,
            smoothing_sigma=base.smoothing_sigma if ns.sigma is None else ns.sigma,
        )
        return "grid", estimators.GridParams(
            patch_size=ns.patch, local_method=local, interpolation=ns.interp
        )
    raise UsageError(
        f"unknown method {name!r}; valid: {', '.join(sorted(estimators.PRESETS))}, "
        f"grid:<method>, lsac"
    )


def _estimate_map(img, kind: str, params) -> IlluminationMap:
    if kind == "grid":
        return estimators.estimate_map_grid(img, params)
    sigma = params
    if sigma is None:
        lp = estimators.default_lsac_params(img.shape[0], img.shape[1])
    else:
        lp = estimators.LsacParams(sigma=sigma)
    return estimators.estimate_map_lsac(img, lp)


def _cmd_synth(ns) -> int:
    spec = synth.TintSpec(num_illuminants=ns.illuminants, mode=ns.mode)
    manifest = synth.emit_dataset(
        ns.out,
        count=ns.count,
        spec=spec,
        seed=ns.seed,
        size=_parse_wxh(ns.size),
        source_dir=ns.source,
        jobs=ns.jobs,
    )
    print(f"wrote {manifest.count} pairs to {ns.out} (seed={manifest.seed}, mode={spec.mode})")
    print(f"manifest: {Path(ns.out) / 'manifest.json'}")
    return 0


def _cmd_estimate(ns) -> int:
    kind, params = _resolve_method(ns)
    items = _iter_images(ns.input)
    single = len(items) == 1 and not Path(ns.input).is_dir()

    if kind == "uniform":
        results = {}
        for image_id, path in items:
            e = estimators.estimate_uniform(load_image(path), params)
            results[image_id] = [float(v) for v in e]
            prefix = "" if single else f"{image_id}: "
            print(prefix + " ".join(f"{v:.6g}" for v in e))
        if ns.out:
            payload = {"method": ns.method, "illuminants": results}
            Path(ns.out).write_text(json.dumps(payload, indent=2) + "\n")
        return 0

    if not ns.out:
        raise UsageError("map methods need --out (a PNG path or directory)")
    out = Path(ns.out)
    if not single:
        out.mkdir(parents=True, exist_ok=True)
    for image_id, path in items:
        imap = _estimate_map(load_image(path), kind, params)
        target = out if single else out / f"{image_id}.png"
        save_map(imap, target)
        print(f"{image_id}: map -> {target}")
    return 0


def _parse_vector(text: str):
    try:
        parts = [float(p) for p in text.split(",")]
    except ValueError:
        raise UsageError(f"expected R,G,B numbers, got {text!r}") from None
    if len(parts) != 3:
        raise UsageError(f"expected three components, got {len(parts)}")
    return parts


def _cmd_correct(ns) -> int:
    chosen = [opt for opt in (ns.vector, ns.map_path, ns.auto) if opt]
    if len(chosen) != 1:
        raise UsageError("exactly one of --vector, --map, --auto is required")

    items = _iter_images(ns.input)
    single = len(items) == 1 and not Path(ns.input).is_dir()
    out = Path(ns.out)
    if not single:
        out.mkdir(parents=True, exist_ok=True)

    map_dir = None
    if ns.map_path and Path(ns.map_path).is_dir():
        map_dir = Path(ns.map_path)
    if ns.auto:
        ns.method = ns.auto
        auto_kind, auto_params = _resolve_method(ns)

    for image_id, path in items:
        img = load_image(path)
        if ns.vector:
            corrected = von_kries_correct(img, _parse_vector(ns.vector))
        elif ns.map_path:
            map_file = map_dir / f"{image_id}.png" if map_dir else Path(ns.map_path)
            if not map_file.exists():
                raise FileNotFoundError(f"no map for id {image_id!r}: {map_file}")
            corrected, _ = correct_with_map(img, load_map(map_file))
        else:
            # Estimated illuminants are unit length; rescale to unit minimum so
            # the division never amplifies a channel (the 8-bit export would
            # clip the result otherwise). Chromaticity is unaffected.
            if auto_kind == "uniform":
                e = estimators.estimate_uniform(img, auto_params)
                corrected = von_kries_correct(img, e / e.min() if e.min() > 0 else e)
            else:
                imap = _estimate_map(img, auto_kind, auto_params)
                mins = np.where(imap.valid, imap.data.min(axis=2), 1.0)
                scale = float(mins[imap.valid].min()) if imap.valid.any() else 1.0
                if scale > 0:
                    imap = IlluminationMap(imap.data / scale, imap.valid)
                corrected, _ = correct_with_map(img, imap)
        save_image(corrected, out if single else out / f"{image_id}.png", bit_depth=8)
    print(f"corrected {len(items)} image(s) -> {ns.out}")
    return 0


def _cmd_eval(ns) -> int:
    if ns.gtmap and not ns.input:
        raise UsageError("--gtmap needs --input to recover the estimated map")
    report = metrics.evaluate_directories(
        ns.pred,
        ns.gt,
        input_dir=ns.input,
        gtmap_dir=ns.gtmap,
        thr=DEFAULT_THRESHOLDS,
        include_delta_e=ns.delta_e,
    )
    report.write_json(ns.report)
    if ns.csv:
        report.write_csv(ns.csv)
    print(
        f"{report.angular.count} images: angular mean {report.angular.mean:.4f} deg, "
        f"psnr mean {report.psnr.mean:.4f} dB, ssim mean {report.ssim.mean:.6f}"
    )
    print(f"report: {ns.report}")
    return 0


def _cmd_losscheck(ns) -> int:
    if ns.trials <= 0:
        print("losscheck: no trials requested, nothing to verify")
        return 0
    height, width = _parse_hxw(ns.size)
    result = losses.finite_difference_check(
        trials=ns.trials, height=height, width=width, seed=ns.seed, corrupt=ns.corrupt
    )
    print(f"losscheck: {result['trials']} trials, {result['coords_checked']} coordinates")
    print(f"  l1      max rel err {result['l1_max_rel']:.3e} (threshold {result['l1_threshold']:.0e})")
    print(f"  angular max rel err {result['ang_max_rel']:.3e} (threshold {result['ang_threshold']:.0e})")
    print("  PASS" if result["passed"] else "  FAIL")
    return 0 if result["passed"] else 1


_HANDLERS = {
    "synth": _cmd_synth,
    "estimate": _cmd_estimate,
    "correct": _cmd_correct,
    "eval": _cmd_eval,
    "losscheck": _cmd_losscheck,
}


def main(argv=None) -> int:
    parser = _build_parser()
    ns = parser.parse_args(argv)
    try:
        config_path = ns.config or os.environ.get("ILLUMKIT_CONFIG")
        config = load_config(config_path) if config_path else {}
        _resolve(ns, ns.command, config)
        return _HANDLERS[ns.command](ns)
    except UsageError as exc:
        print(f"illumkit {ns.command}: {exc}", file=sys.stderr)
        return 2
    except (OSError, ValueError) as exc:
        print(f"illumkit {ns.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
