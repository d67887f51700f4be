"""Codebook-size sweep: train one model per size, report reconstruction
errors as plot-data CSV consumable by the primary pipeline's sweep command.
"""

from __future__ import annotations

from dataclasses import replace
from pathlib import Path

import torch

from .model import make_spec
from .train import TrainConfig, reconstruction_errors, train


def codebook_size_sweep(
    windows: torch.Tensor,
    sizes: list[int],
    variant: str = "position",
    preset: str = "tiny",
    cfg: TrainConfig | None = None,
) -> list[tuple[int, float, float]]:
    """(codebook_size, mse, mae) per size, same seed and schedule for all."""
    cfg = cfg or TrainConfig()
    if any(s < 2 for s in sizes):
        raise ValueError("codebook sizes must be >= 2")
    rows = []
    for size in sizes:
        spec = make_spec(variant, preset, codebook_size=size)
        result = train(spec, windows, cfg)
        mse, mae = reconstruction_errors(result.model, windows)
        rows.append((size, mse, mae))
    return rows


def write_sweep_csv(rows: list[tuple[int, float, float]], path: str | Path) -> None:
    lines = ["codebook_size,mse,mae"]
    lines += [f"{size},{mse!r},{mae!r}" for size, mse, mae in rows]
    Path(path).parent.mkdir(parents=True, exist_ok=True)
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")
