"""Emit synthetic datasets through the toolkit CLI (the real interface)."""

import shutil
import subprocess
import sys
from pathlib import Path


def illumkit_cmd() -> list[str]:
    exe = shutil.which("illumkit")
    if exe:
        return [exe]
    return [sys.executable, "-m", "illumkit.cli"]


def synth_dataset(out_dir: Path, count: int, seed: int, size: str = "64x64", mode: str = "multi"):
    subprocess.run(
        illumkit_cmd()
        + [
            "synth",
            "--out",
            str(out_dir),
            "--count",
            str(count),
            "--seed",
            str(seed),
            "--size",
            size,
            "--mode",
            mode,
            "--jobs",
            "4",
        ],
        check=True,
        capture_output=True,
    )
    return out_dir
