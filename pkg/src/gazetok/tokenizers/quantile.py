"""Quantile tokenizer: frequency binning over empirical quantiles.

Thresholds q_0..q_{n-1} are the empirical quantiles at probabilities i/n,
q_i = sorted_data[floor(i/n * count)], so q_i is the lower edge of bin i and
each bin holds roughly the same share of the training samples. Values below
q_0 clamp into bin 0 and values at or above q_{n-1} into bin n-1; between
equal thresholds the highest applicable bin wins. A token decodes to the
midpoint of its bin edges, (q_t + q_{min(t+1, n-1)}) / 2.
"""

from __future__ import annotations

import numpy as np

from ..core import AxisMode, GazeSequence
from ..errors import EmptyDataError, InvalidBinCountError, TokenOutOfRangeError
from .base import Tokenizer, axis_scalars, deinterleave_axes, interleave_axes, pooled_scalars

DEFAULT_BINS = 2048


def fit_thresholds(data: np.ndarray, n: int) -> np.ndarray:
    """Ascending thresholds q_i = sorted_data[floor(i*count/n)], i = 0..n-1."""
    data = np.asarray(data, dtype=np.float64).reshape(-1)
    if data.size == 0:
        raise EmptyDataError("cannot fit quantiles on empty data")
    if n < 2:
        raise InvalidBinCountError(f"bin count must be >= 2, got {n}")
    ranks = (np.arange(n, dtype=np.int64) * data.size) // n
    return np.sort(data)[ranks]


def encode_scalars(x: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Bin index per scalar; monotone in x, ties collapse to the highest bin."""
    n = thresholds.size
    tokens = np.searchsorted(thresholds, np.asarray(x, dtype=np.float64), side="right") - 1
    return np.clip(tokens, 0, n - 1).astype(np.int64)


def decode_scalars(tokens: np.ndarray, thresholds: np.ndarray) -> np.ndarray:
    """Midpoint of the bin edges; the top token returns q_{n-1} exactly."""
    n = thresholds.size
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.size and (tokens.min() < 0 or tokens.max() >= n):
        raise TokenOutOfRangeError(f"token outside [0, {n})")
    upper = np.minimum(tokens + 1, n - 1)
    return (thresholds[tokens] + thresholds[upper]) / 2.0


class QuantileTokenizer(Tokenizer):
    scheme = "quantile"

    def __init__(self, thresholds: np.ndarray, axis_mode: AxisMode = AxisMode.POOLED):
        thresholds = np.asarray(thresholds, dtype=np.float64)
        if thresholds.ndim == 1:
            thresholds = thresholds[None, :]
        expected_tables = 1 if axis_mode is AxisMode.POOLED else 2
        if thresholds.shape[0] != expected_tables:
            raise ValueError(
                f"{axis_mode.value} mode needs {expected_tables} threshold tables, "
                f"got {thresholds.shape[0]}"
            )
        if np.any(np.diff(thresholds, axis=1) < 0):
            raise ValueError("thresholds must be non-decreasing")
        thresholds = thresholds.copy()
        thresholds.setflags(write=False)
        self.thresholds = thresholds
        self.axis_mode = axis_mode

    @classmethod
    def fit(
        cls,
        seqs: list[GazeSequence],
        n: int = DEFAULT_BINS,
        axis_mode: AxisMode = AxisMode.POOLED,
    ) -> "QuantileTokenizer":
        if axis_mode is AxisMode.POOLED:
            tables = [fit_thresholds(pooled_scalars(seqs), n)]
        else:
            tables = [fit_thresholds(axis_scalars(seqs, axis), n) for axis in (0, 1)]
        return cls(np.stack(tables), axis_mode)

    @property
    def n_bins(self) -> int:
        return int(self.thresholds.shape[1])

    @property
    def vocab_size(self) -> int:
        return self.n_bins

    @property
    def tokens_per_sample(self) -> int:
        return 2

    def _table(self, axis: int) -> np.ndarray:
        return self.thresholds[0 if self.axis_mode is AxisMode.POOLED else axis]

    def encode_samples(self, samples: np.ndarray) -> np.ndarray:
        return interleave_axes(
            encode_scalars(samples[:, 0], self._table(0)),
            encode_scalars(samples[:, 1], self._table(1)),
        )

    def decode_samples(self, tokens: np.ndarray) -> np.ndarray:
        tx, ty = deinterleave_axes(np.asarray(tokens, dtype=np.int64))
        return np.column_stack(
            [decode_scalars(tx, self._table(0)), decode_scalars(ty, self._table(1))]
        )

    def to_payload(self) -> dict:
        return {
            "n": self.n_bins,
            "axis_mode": self.axis_mode.value,
            "thresholds": self.thresholds.tolist(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "QuantileTokenizer":
        return cls(
            thresholds=np.asarray(payload["thresholds"], dtype=np.float64),
            axis_mode=AxisMode(payload["axis_mode"]),
        )
