"""Mu-law companding tokenizer.

The forward transform and its inverse are

    f(x)    = sign(x) * log(|x * mu| + 1) / log(|mu * N| + 1)
    f_inv(y) = sign(y) * ((1 + |mu * N|) ** |y| - 1) / |mu|

so f is odd with f(N) = 1. Binning floors the transform into n bins,

    g(x)     = floor(n * (f(x) + 1) / 2)        clamped into [0, n-1]
    g_inv(t) = f_inv(2 * t / n - 1)             the bin's lower edge

Data is min-max normalized to [-1, 1] per axis before the transform; the
(mu, N) pair is chosen by a deterministic search minimizing the summed
squared reconstruction error sum((x - g_inv(g(x)))^2) on the fit data.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..core import AxisMode, Bounds, GazeSequence
from ..errors import EmptyDataError, TokenOutOfRangeError
from .base import Tokenizer, deinterleave_axes, interleave_axes

DEFAULT_BINS = 2048

# deterministic search box: log-spaced 64x64 grid, then two local refinements
MU_RANGE = (1.0, 256.0)
N_RANGE = (0.1, 2.0)
GRID_POINTS = 64
REFINE_POINTS = 17
REFINE_ROUNDS = 2


def transform(x: np.ndarray, mu: float, big_n: float) -> np.ndarray:
    x = np.asarray(x, dtype=np.float64)
    return np.sign(x) * np.log(np.abs(x * mu) + 1.0) / np.log(abs(mu * big_n) + 1.0)


def inverse_transform(y: np.ndarray, mu: float, big_n: float) -> np.ndarray:
    y = np.asarray(y, dtype=np.float64)
    return np.sign(y) * ((1.0 + abs(mu * big_n)) ** np.abs(y) - 1.0) / abs(mu)


def encode_normalized(x: np.ndarray, mu: float, big_n: float, n: int) -> np.ndarray:
    """Token per normalized scalar; the f(x) = 1 edge clamps into bin n-1."""
    raw = np.floor(n * (transform(x, mu, big_n) + 1.0) / 2.0)
    return np.clip(raw, 0, n - 1).astype(np.int64)


def decode_normalized(tokens: np.ndarray, mu: float, big_n: float, n: int) -> np.ndarray:
    tokens = np.asarray(tokens, dtype=np.int64)
    if tokens.size and (tokens.min() < 0 or tokens.max() >= n):
        raise TokenOutOfRangeError(f"token outside [0, {n})")
    return inverse_transform(2.0 * tokens / n - 1.0, mu, big_n)


@dataclass(frozen=True)
class _SortedData:
    """Pre-sorted scalars with prefix sums, shared across objective calls."""

    sorted_x: np.ndarray
    cum_x: np.ndarray   # cum_x[i] = sum of first i sorted values
    cum_x2: np.ndarray

    @classmethod
    def of(cls, data: np.ndarray) -> "_SortedData":
        s = np.sort(np.asarray(data, dtype=np.float64).reshape(-1))
        if s.size == 0:
            raise EmptyDataError("cannot fit mu-law parameters on empty data")
        return cls(
            sorted_x=s,
            cum_x=np.concatenate([[0.0], np.cumsum(s)]),
            cum_x2=np.concatenate([[0.0], np.cumsum(s * s)]),
        )


def _objective(prep: _SortedData, mu: float, big_n: float, n: int) -> float:
    """sum((x - g_inv(g(x)))^2) computed from bin occupancy.

    Bin t covers [edge_t, edge_{t+1}) in normalized space with
    edge_t = g_inv(t); tails clamp into the outermost bins. Within bin t the
    reconstruction is the constant edge_t, so the sum collapses to prefix
    sums over the sorted data.
    """
    edges = inverse_transform(2.0 * np.arange(n + 1) / n - 1.0, mu, big_n)
    cuts = np.searchsorted(prep.sorted_x, edges[1:n], side="left")
    lo = np.concatenate([[0], cuts])
    hi = np.concatenate([cuts, [prep.sorted_x.size]])
    counts = (hi - lo).astype(np.float64)
    sum_x = prep.cum_x[hi] - prep.cum_x[lo]
    sum_x2 = prep.cum_x2[hi] - prep.cum_x2[lo]
    recon = edges[:n]
    return float(np.sum(sum_x2 - 2.0 * recon * sum_x + recon * recon * counts))


def reconstruction_objective(data: np.ndarray, mu: float, big_n: float, n: int = DEFAULT_BINS) -> float:
    """Public objective used by the search and by candidate comparisons."""
    return _objective(_SortedData.of(data), mu, big_n, n)


def _grid_argmin(prep: _SortedData, mus: np.ndarray, ns: np.ndarray, n_bins: int) -> tuple[int, int, float]:
    best = (0, 0, np.inf)
    # row-major scan with strict improvement keeps ties at smallest mu, then smallest N
    for i, mu in enumerate(mus):
        for j, big_n in enumerate(ns):
            val = _objective(prep, float(mu), float(big_n), n_bins)
            if val < best[2]:
                best = (i, j, val)
    return best


def search_mu_n(data: np.ndarray, n_bins: int = DEFAULT_BINS) -> tuple[float, float, float]:
    """Deterministic (mu, N) search on normalized scalars.

    Returns (mu, N, objective). Coarse log-spaced grid over the search box,
    then REFINE_ROUNDS zooms into the winning cell's neighborhood.
    """
    prep = _SortedData.of(data)
    mus = np.geomspace(*MU_RANGE, GRID_POINTS)
    ns = np.geomspace(*N_RANGE, GRID_POINTS)
    i, j, best_val = _grid_argmin(prep, mus, ns, n_bins)
    best_mu, best_n = float(mus[i]), float(ns[j])

    for _ in range(REFINE_ROUNDS):
        mu_lo, mu_hi = mus[max(i - 1, 0)], mus[min(i + 1, mus.size - 1)]
        n_lo, n_hi = ns[max(j - 1, 0)], ns[min(j + 1, ns.size - 1)]
        mus = np.geomspace(mu_lo, mu_hi, REFINE_POINTS)
        ns = np.geomspace(n_lo, n_hi, REFINE_POINTS)
        i, j, val = _grid_argmin(prep, mus, ns, n_bins)
        if val < best_val:
            best_mu, best_n, best_val = float(mus[i]), float(ns[j]), val
    return best_mu, best_n, best_val


class MuLawTokenizer(Tokenizer):
    scheme = "mulaw"

    def __init__(
        self,
        mu: np.ndarray,
        big_n: np.ndarray,
        n_bins: int,
        bounds: Bounds,
        axis_mode: AxisMode = AxisMode.POOLED,
    ):
        mu = np.atleast_1d(np.asarray(mu, dtype=np.float64))
        big_n = np.atleast_1d(np.asarray(big_n, dtype=np.float64))
        expected = 1 if axis_mode is AxisMode.POOLED else 2
        if mu.shape != (expected,) or big_n.shape != (expected,):
            raise ValueError(f"{axis_mode.value} mode needs {expected} (mu, N) pairs")
        if np.any(mu <= 0) or np.any(big_n <= 0):
            raise ValueError("mu and N must be positive")
        if n_bins < 2:
            raise ValueError("n_bins must be >= 2")
        mu.setflags(write=False)
        big_n.setflags(write=False)
        self.mu = mu
        self.big_n = big_n
        self.n_bins = int(n_bins)
        self.bounds = bounds
        self.axis_mode = axis_mode

    @classmethod
    def fit(
        cls,
        seqs: list[GazeSequence],
        n: int = DEFAULT_BINS,
        axis_mode: AxisMode = AxisMode.POOLED,
    ) -> "MuLawTokenizer":
        stacked = np.concatenate([s.samples for s in seqs], axis=0)
        bounds = Bounds.of(stacked)
        normed = bounds.normalize(stacked)
        if axis_mode is AxisMode.POOLED:
            mu, big_n, _ = search_mu_n(normed.reshape(-1), n)
            return cls(np.array([mu]), np.array([big_n]), n, bounds, axis_mode)
        pairs = [search_mu_n(normed[:, axis], n) for axis in (0, 1)]
        return cls(
            np.array([p[0] for p in pairs]),
            np.array([p[1] for p in pairs]),
            n,
            bounds,
            axis_mode,
        )

    @property
    def vocab_size(self) -> int:
        return self.n_bins

    @property
    def tokens_per_sample(self) -> int:
        return 2

    def _params(self, axis: int) -> tuple[float, float]:
        idx = 0 if self.axis_mode is AxisMode.POOLED else axis
        return float(self.mu[idx]), float(self.big_n[idx])

    def encode_samples(self, samples: np.ndarray) -> np.ndarray:
        normed = self.bounds.normalize(samples)
        cols = []
        for axis in (0, 1):
            mu, big_n = self._params(axis)
            cols.append(encode_normalized(normed[:, axis], mu, big_n, self.n_bins))
        return interleave_axes(cols[0], cols[1])

    def decode_samples(self, tokens: np.ndarray) -> np.ndarray:
        tx, ty = deinterleave_axes(np.asarray(tokens, dtype=np.int64))
        cols = []
        for axis, t in ((0, tx), (1, ty)):
            mu, big_n = self._params(axis)
            cols.append(decode_normalized(t, mu, big_n, self.n_bins))
        return self.bounds.denormalize(np.column_stack(cols))

    def to_payload(self) -> dict:
        return {
            "n": self.n_bins,
            "axis_mode": self.axis_mode.value,
            "mu": self.mu.tolist(),
            "N": self.big_n.tolist(),
            "bounds": self.bounds.to_payload(),
        }

    @classmethod
    def from_payload(cls, payload: dict) -> "MuLawTokenizer":
        return cls(
            mu=np.asarray(payload["mu"], dtype=np.float64),
            big_n=np.asarray(payload["N"], dtype=np.float64),
            n_bins=int(payload["n"]),
            bounds=Bounds.from_payload(payload["bounds"]),
            axis_mode=AxisMode(payload["axis_mode"]),
        )
