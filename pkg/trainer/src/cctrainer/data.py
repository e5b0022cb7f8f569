"""Dataset access for the synth layout: input/, target/, gtmap/, manifest.json."""

from __future__ import annotations

from pathlib import Path

import numpy as np
import torch

from .pngio import read_rgb


class PairDataset:
    """Paired tinted/clean images (plus ground-truth maps when present).

    Items come back as float tensors in [0, 1], channel-first. Pairing is
    by filename stem; any id missing from a sibling directory is an error,
    never silently skipped.
    """

    def __init__(
        self,
        root,
        want_maps: bool = False,
        dtype: torch.dtype = torch.float32,
        cache: bool = True,
    ):
        self.root = Path(root)
        self.dtype = dtype
        self.want_maps = want_maps
        inputs = {p.stem: p for p in sorted((self.root / "input").glob("*.png"))}
        targets = {p.stem: p for p in sorted((self.root / "target").glob("*.png"))}
        if inputs.keys() != targets.keys():
            missing = sorted(set(inputs) ^ set(targets))
            raise ValueError(f"{self.root}: input/target ids do not match: {missing}")
        if not inputs:
            raise ValueError(f"{self.root}: dataset is empty")
        self.ids = sorted(inputs)
        self._inputs = inputs
        self._targets = targets
        self._maps = {}
        if want_maps:
            self._maps = {p.stem: p for p in sorted((self.root / "gtmap").glob("*.png"))}
            absent = [i for i in self.ids if i not in self._maps]
            if absent:
                raise ValueError(f"{self.root}: gtmap/ missing ids {absent}")
        self._cache: dict[int, dict] | None = {} if cache else None

    def __len__(self) -> int:
        return len(self.ids)

    def _tensor(self, path) -> torch.Tensor:
        arr = read_rgb(path)
        return torch.from_numpy(np.ascontiguousarray(arr.transpose(2, 0, 1))).to(self.dtype)

    def __getitem__(self, index: int) -> dict:
        if self._cache is not None and index in self._cache:
            return self._cache[index]
        image_id = self.ids[index]
        item = {
            "id": image_id,
            "input": self._tensor(self._inputs[image_id]),
            "target": self._tensor(self._targets[image_id]),
        }
        if self.want_maps:
            item["gtmap"] = self._tensor(self._maps[image_id])
        if self._cache is not None:
            self._cache[index] = item
        return item


def batches(dataset: PairDataset, batch_size: int, generator: torch.Generator):
    """Seeded shuffled minibatches of stacked tensors (ids included)."""
    order = torch.randperm(len(dataset), generator=generator).tolist()
    for start in range(0, len(order), batch_size):
        chunk = [dataset[i] for i in order[start : start + batch_size]]
        batch = {
            "id": [c["id"] for c in chunk],
            "input": torch.stack([c["input"] for c in chunk]),
            "target": torch.stack([c["target"] for c in chunk]),
        }
        if dataset.want_maps:
            batch["gtmap"] = torch.stack([c["gtmap"] for c in chunk])
        yield batch
