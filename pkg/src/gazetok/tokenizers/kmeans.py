"""K-means vector quantizer: cluster indices are the tokens.

Pooled mode clusters 2-D samples directly (one token per sample); per-axis
mode runs two independent 1-D fits (two tokens per sample, x then y).
Fitting is Lloyd's algorithm from k-means++ seeds with a fixed RNG, so a
(seed, data) pair always produces the same codebook. Emptied clusters are
reseeded to the point farthest from its assigned center, distance ties on
encode break to the lowest index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import AxisMode, GazeSequence
from ..errors import EmptyDataError, TokenOutOfRangeError, TooFewDistinctPointsError
from .base import Tokenizer, deinterleave_axes, interleave_axes

DEFAULT_K = 2048

# keeps the per-chunk distance matrix around 32 MB at k = 2048
_CHUNK = 2048


@dataclass(frozen=True)
class KMeansConfig:
    tol: float = 1e-4
    max_iter: int = 300
    seed: int = 0

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


def _pairwise_sq(points: np.ndarray, centers: np.ndarray) -> np.ndarray:
    # ||x||^2 - 2 x.c + ||c||^2, computed blockwise by the callers
    return (
        np.einsum("ij,ij->i", points, points)[:, None]
        - 2.0 * points @ centers.T
        + np.einsum("ij,ij->i", centers, centers)[None, :]
    )


def _assign(data: np.ndarray, centers: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Nearest-center labels (lowest index on ties) and squared distances."""
    n = data.shape[0]
    labels = np.empty(n, dtype=np.int64)
    min_sq = np.empty(n, dtype=np.float64)
    for start in range(0, n, _CHUNK):
        block = slice(start, min(start + _CHUNK, n))
        d2 = _pairwise_sq(data[block], centers)
        labels[block] = np.argmin(d2, axis=1)
        min_sq[block] = d2[np.arange(d2.shape[0]), labels[block]]
    return labels, np.maximum(min_sq, 0.0)


def kmeans_plusplus(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Classic k-means++ seeding: next center drawn with prob ~ D^2."""
    n = data.shape[0]
    centers = np.empty((k, data.shape[1]), dtype=np.float64)
    centers[0] = data[rng.integers(n)]
    d2 = np.einsum("ij,ij->i", data - centers[0], data - centers[0])
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # remaining points coincide with chosen centers; any pick works
            centers[i] = data[rng.integers(n)]
            continue
        idx = rng.choice(n, p=d2 / total)
        centers[i] = data[idx]
        d2 = np.minimum(d2, np.einsum("ij,ij->i", data - centers[i], data - centers[i]))
    return centers


def lloyd_fit(
    data: np.ndarray,
    k: int,
    cfg: KMeansConfig,
) -> tuple[np.ndarray, list[float]]:
    """Centers and per-iteration inertia history (non-increasing)."""
    data = np.asarray(data, dtype=np.float64)
    if data.ndim == 1:
        data = data[:, None]
    if data.shape[0] == 0:
        raise EmptyDataError("cannot fit k-means on empty data")
    distinct = np.unique(data, axis=0).shape[0]
    if distinct < k:
        raise TooFewDistinctPointsError(f"{distinct} distinct points < k={k}")

    rng = np.random.default_rng(cfg.seed)
    centers = kmeans_plusplus(data, k, rng)
    total_sq = float(np.einsum("ij,ij->", data, data))
    history: list[float] = []

    for _ in range(cfg.max_iter):
        labels, min_sq = _assign(data, centers)

        counts = np.bincount(labels, minlength=k)
        for empty in np.flatnonzero(counts == 0):
            far = int(np.argmax(min_sq))
            counts[labels[far]] -= 1
            labels[far] = empty
            counts[empty] = 1
            min_sq[far] = 0.0

        sums = np.zeros((k, data.shape[1]), dtype=np.float64)
        for dim in range(data.shape[1]):
            sums[:, dim] = np.bincount(labels, weights=data[:, dim], minlength=k)
        centers = sums / counts[:, None]

        # inertia with exact cluster means: sum ||x||^2 - sum ||S_c||^2 / n_c
        inertia = total_sq - float(np.sum(np.einsum("ij,ij->i", sums, sums) / counts))
        inertia = max(inertia, 0.0)
        if history and inertia > history[-1]:
            break  # float wobble at convergence; keep the recorded history monotone
        history.append(inertia)
        if history[-1] == 0.0:
            break
        if len(history) >= 2 and (history[-2] - history[-1]) / history[-2] < cfg.tol:
            break
    return centers, history


class KMeansTokenizer(Tokenizer):
    scheme = "kmeans"

    def __init__(
        self,
        centers: np.ndarray,
        axis_mode: AxisMode = AxisMode.POOLED,
        rng_seed: int = 0,
        inertia_history: tuple[float, ...] = (),
    ):
        centers = np.asarray(centers, dtype=np.float64).copy()
        if axis_mode is AxisMode.POOLED:
            if centers.ndim != 2 or centers.shape[1] != 2:
                raise ValueError("pooled mode expects (k, 2) centers")
        else:
            if centers.ndim != 2 or centers.shape[0] != 2:
                raise ValueError("per-axis mode expects (2, k) centers, one row per axis")
        if not np.all(np.isfinite(centers)):
            raise ValueError("centers must be finite")
        centers.setflags(write=False)
        self.centers = centers
        self.axis_mode = axis_mode
        self.rng_seed = int(rng_seed)
        self.inertia_history = tuple(inertia_history)

    @classmethod
    def fit(
        cls,
        seqs: list[GazeSequence],
        k: int = DEFAULT_K,
        axis_mode: AxisMode = AxisMode.POOLED,
        cfg: KMeansConfig | None = None,
    ) -> "KMeansTokenizer":
        cfg = cfg or KMeansConfig()
        data = np.concatenate([s.samples for s in seqs], axis=0)
        if axis_mode is AxisMode.POOLED:
            centers, history = lloyd_fit(data, k, cfg)
            return cls(centers, axis_mode, cfg.seed, tuple(history))
        rows, history = [], []
        for axis in (0, 1):
            c, h = lloyd_fit(data[:, axis], k, cfg)
            rows.append(c[:, 0])
            history.extend(h)
        return cls(np.stack(rows), axis_mode, cfg.seed, tuple(history))

    @property
    def k(self) -> int:
        if self.axis_mode is AxisMode.POOLED:
            return int(self.centers.shape[0])
        return int(self.centers.shape[1])

    @property
    def vocab_size(self) -> int:
        return self.k

    @property
    def tokens_per_sample(self) -> int:
        return 1 if self.axis_mode is AxisMode.POOLED else 2

    def encode_samples(self, samples: np.ndarray) -> np.ndarray:
        if self.axis_mode is AxisMode.POOLED:
            labels, _ = _assign(samples, self.centers)
            return labels
        cols = [
            _assign(samples[:, axis][:, None], self.centers[axis][:, None])[0]
            for axis in (0, 1)
        ]
        return interleave_axes(cols[0], cols[1])

    def decode_samples(self, tokens: np.ndarray) -> np.ndarray:
        tokens = np.asarray(tokens, dtype=np.int64)
        if tokens.size and (tokens.min() < 0 or tokens.max() >= self.k):
            raise TokenOutOfRangeError(f"token outside [0, {self.k})")
        if self.axis_mode is AxisMode.POOLED:
            return self.centers[tokens]
        tx, ty = deinterleave_axes(tokens)
        return np.column_stack([self.centers[0][tx], self.centers[1][ty]])

    def to_payload(self) -> dict:
        return {
            "k": self.k,
            "axis_mode": self.axis_mode.value,
            "centers": self.centers.tolist(),
            "rng_seed": self.rng_seed,
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "KMeansTokenizer":
        return cls(
            centers=np.asarray(payload["centers"], dtype=np.float64),
            axis_mode=AxisMode(payload["axis_mode"]),
            rng_seed=int(payload.get("rng_seed", 0)),
        )


def reconstruction_sweep(
    seqs: list[GazeSequence],
    k_list: list[int],
    axis_mode: AxisMode = AxisMode.POOLED,
    cfg: KMeansConfig | None = None,
) -> list[tuple[int, float, float]]:
    """(k, reconstruction MSE, MAE) rows for plotting error against k."""
    from .. import metrics

    rows = []
    for k in k_list:
        tok = KMeansTokenizer.fit(seqs, k=k, axis_mode=axis_mode, cfg=cfg)
        gt = np.concatenate([s.samples for s in seqs], axis=0)
        decoded = np.concatenate(
            [tok.decode_samples(tok.encode_samples(s.samples)) for s in seqs], axis=0
        )
        rows.append((k, metrics.mse(gt, decoded), metrics.mae(gt, decoded)))
    return rows
