import numpy as np
import pytest
import torch

from gazetok.core import GazeSequence
from gazetok.io import Recording


def lissajous_recording(seed: int, n: int = 1600, ax: float = 18.0, ay: float = 14.0) -> Recording:
    """Smooth wide-range curves; float32-valued like tracker logs."""
    rng = np.random.default_rng(seed)
    t = np.arange(n) / 100.0
    fx, fy = rng.uniform(0.15, 0.4, 2)
    px, py = rng.uniform(0.0, 2.0 * np.pi, 2)
    pos = np.column_stack(
        [ax * np.sin(2 * np.pi * fx * t + px), ay * np.sin(2 * np.pi * fy * t + py)]
    )
    pos = pos.astype(np.float32).astype(np.float64)
    return Recording(id=f"lis-{seed:02d}", seq=GazeSequence(pos, 100.0))


@pytest.fixture
def smooth_recordings() -> list[Recording]:
    return [lissajous_recording(s) for s in range(6)]


@pytest.fixture
def small_windows() -> torch.Tensor:
    torch.manual_seed(3)
    t = torch.linspace(0, 6.28, 80)
    batch = torch.stack(
        [torch.stack([torch.sin(t + p), torch.cos(t + p)], dim=-1) for p in torch.linspace(0, 3, 6)]
    )
    return batch * 0.8
