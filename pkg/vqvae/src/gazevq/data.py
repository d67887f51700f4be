"""Training-data preparation: normalization and fixed-length windowing.

Inputs arrive as gazetok recordings (CSV manifests); the variant decides
whether windows hold positions or per-sample velocity displacements.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import torch

from gazetok.core import GazeSequence, derive_velocity
from gazetok.io import Recording


@dataclass(frozen=True)
class NormBounds:
    """Per-axis min/max mapping data affinely to [-1, 1]."""

    lo: np.ndarray
    hi: np.ndarray

    @classmethod
    def of(cls, arrays: list[np.ndarray]) -> "NormBounds":
        stacked = np.concatenate(arrays, axis=0)
        return cls(lo=stacked.min(axis=0), hi=stacked.max(axis=0))

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def normalize(self, arr: np.ndarray) -> np.ndarray:
        safe = np.where(self.span == 0.0, 1.0, self.span)
        out = (arr - self.lo) / safe * 2.0 - 1.0
        return np.where(self.span == 0.0, 0.0, out)

    def denormalize(self, arr: np.ndarray) -> np.ndarray:
        return (arr + 1.0) / 2.0 * self.span + self.lo

    def to_payload(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_payload(cls, payload: dict) -> "NormBounds":
        return cls(np.asarray(payload["lo"], float), np.asarray(payload["hi"], float))


def variant_sequences(recordings: list[Recording], variant: str) -> list[GazeSequence]:
    if variant == "position":
        return [r.seq for r in recordings]
    if variant == "velocity":
        return [derive_velocity(r.seq) for r in recordings]
    raise ValueError(f"unknown variant {variant!r}")


def make_windows(
    seqs: list[GazeSequence],
    window_len: int,
    bounds: NormBounds | None = None,
) -> tuple[torch.Tensor, NormBounds]:
    """Normalized (N, window_len, 2) training windows.

    Long recordings are chunked; short recordings (and tail chunks) are
    padded by repeating their last sample.
    """
    arrays = [s.samples for s in seqs]
    if bounds is None:
        bounds = NormBounds.of(arrays)
    windows = []
    for arr in arrays:
        normed = bounds.normalize(arr)
        for start in range(0, len(normed), window_len):
            chunk = normed[start : start + window_len]
            if len(chunk) < window_len:
                if len(chunk) < window_len // 4 and windows:
                    continue  # tiny tail, already covered by earlier windows
                pad = np.repeat(chunk[-1:], window_len - len(chunk), axis=0)
                chunk = np.concatenate([chunk, pad], axis=0)
            windows.append(chunk)
    if not windows:
        raise ValueError("no training windows could be built")
    return torch.tensor(np.stack(windows), dtype=torch.float32), bounds
