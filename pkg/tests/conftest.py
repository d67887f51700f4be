import numpy as np
import pytest

from gazetok.core import DistributionKind, GazeSequence
from gazetok.io import Recording, SynthConfig, synth_gaze


def grid_snap(samples: np.ndarray, step: float = 1.0 / 64.0) -> np.ndarray:
    """Snap onto a dyadic grid so float32 round trips are bit-exact."""
    return np.round(samples / step) * step


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture
def synth_recordings() -> list[Recording]:
    """Ten deterministic recordings with plateaus and saccades."""
    return [
        synth_gaze(SynthConfig(seed=100 + i, n_fixations=6), rec_id=f"rec-{i:02d}")
        for i in range(10)
    ]


@pytest.fixture
def position_seq(rng) -> GazeSequence:
    walk = np.cumsum(rng.normal(0.0, 0.4, size=(400, 2)), axis=0)
    return GazeSequence(walk, 100.0, DistributionKind.POSITION)
