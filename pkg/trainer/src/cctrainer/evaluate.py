"""Prediction export and evaluation via the toolkit CLI.

The trainer computes no evaluation metrics of its own: predictions are
written as 8-bit PNGs in the pred-directory convention and scored by
``illumkit eval`` (illuminant-recovery angular error plus PSNR/SSIM), so
every reported number comes from the single metric implementation.
"""

from __future__ import annotations

import shutil
import subprocess
import sys
from pathlib import Path

import torch

from .data import PairDataset
from .pngio import write_rgb8
from .train import _from_net, _to_net, load_generator


def _illumkit_command() -> list[str]:
    exe = shutil.which("illumkit")
    if exe:
        return [exe]
    return [sys.executable, "-m", "illumkit.cli"]


def run_eval_cli(pred_dir, gt_dir, input_dir, report_path) -> Path:
    cmd = _illumkit_command() + [
        "eval",
        "--pred",
        str(pred_dir),
        "--gt",
        str(gt_dir),
        "--input",
        str(input_dir),
        "--report",
        str(report_path),
    ]
    subprocess.run(cmd, check=True)
    return Path(report_path)


def write_predictions(checkpoint_path, dataset_dir, pred_dir, identity: bool = False) -> Path:
    """Run the generator over a dataset, writing pred/<id>.png files.

    ``identity=True`` bypasses the generator and copies the targets
    through (test hook: the evaluation of a perfect predictor).
    """
    pred_dir = Path(pred_dir)
    pred_dir.mkdir(parents=True, exist_ok=True)
    dataset = PairDataset(dataset_dir)
    generator = None
    if not identity:
        generator, _ = load_generator(checkpoint_path)
    with torch.no_grad():
        for i in range(len(dataset)):
            item = dataset[i]
            if identity:
                out01 = item["target"]
            else:
                out01 = _from_net(generator(_to_net(item["input"].unsqueeze(0))))[0]
            write_rgb8(pred_dir / f"{item['id']}.png", out01.permute(1, 2, 0).numpy())
    return pred_dir


def evaluate(checkpoint_path, dataset_dir, out_dir, identity: bool = False) -> Path:
    """Predict over the dataset and produce an evaluation report; returns its path.

    When the checkpoint sits next to a run.json, that record is updated
    to reference the report.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    pred_dir = write_predictions(checkpoint_path, dataset_dir, out_dir / "pred", identity)
    dataset_dir = Path(dataset_dir)
    report = run_eval_cli(
        pred_dir, dataset_dir / "target", dataset_dir / "input", out_dir / "report.json"
    )
    if checkpoint_path is not None:
        run_file = Path(checkpoint_path).parent / "run.json"
        if run_file.exists():
            from .train import RunRecord

            record = RunRecord.load(run_file)
            record.eval_report = str(report)
            record.save(run_file)
    return report
