"""Evaluation suite: reconstruction errors, accumulative error, DTW,
2-D histograms and Jensen-Shannon divergence, plus the report layout.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import Bounds, DistributionKind, GazeSequence, integrate_positions
from .errors import (
    BoundsMismatchError,
    EmptyHistogramError,
    EmptySequenceError,
    LengthMismatchError,
)

HIST_BINS = 128


def _samples(seq) -> np.ndarray:
    if isinstance(seq, GazeSequence):
        return seq.samples
    return np.asarray(seq, dtype=np.float64)


def _pointwise_distance(a, b) -> np.ndarray:
    a, b = _samples(a), _samples(b)
    if a.shape[0] != b.shape[0]:
        raise LengthMismatchError(f"length mismatch: {a.shape[0]} vs {b.shape[0]}")
    diff = a - b
    if diff.ndim == 1:
        return np.abs(diff)
    return np.sqrt(np.einsum("ij,ij->i", diff, diff))


def mse(a, b) -> float:
    """Mean squared Euclidean sample error (degrees^2)."""
    d = _pointwise_distance(a, b)
    return float(np.mean(d * d))


def mae(a, b) -> float:
    """Mean Euclidean sample error (degrees)."""
    return float(np.mean(_pointwise_distance(a, b)))


def accumulative_error(
    gt_positions: GazeSequence,
    decoded_vel: GazeSequence,
    metric: str = "mae",
) -> float:
    """Error of positions rebuilt by prefix-summing decoded velocities.

    The reconstruction starts from the ground-truth p_0, so a lossless
    velocity codec yields exactly zero.
    """
    if len(gt_positions) != len(decoded_vel) + 1:
        raise LengthMismatchError(
            f"need len(gt) == len(vel) + 1, got {len(gt_positions)} and {len(decoded_vel)}"
        )
    rebuilt = integrate_positions(tuple(gt_positions.samples[0]), decoded_vel)
    if metric == "mse":
        return mse(gt_positions, rebuilt)
    if metric == "mae":
        return mae(gt_positions, rebuilt)
    raise ValueError(f"metric must be 'mse' or 'mae', got {metric!r}")


def dtw(a, b) -> float:
    """Dynamic-time-warping alignment cost (unnormalized, degrees).

    Euclidean local cost with match/insert/delete steps; symmetric, zero on
    identical sequences, and tolerant of one-sample shifts.
    """
    a, b = _samples(a), _samples(b)
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise EmptySequenceError("dtw requires non-empty sequences")
    if a.ndim == 1:
        a = a[:, None]
    if b.ndim == 1:
        b = b[:, None]

    def row_cost(i: int) -> np.ndarray:
        diff = b - a[i]
        return np.sqrt(np.einsum("ij,ij->i", diff, diff))

    prev = np.cumsum(row_cost(0))
    for i in range(1, a.shape[0]):
        ci = row_cost(i)
        shifted = np.concatenate([[np.inf], prev[:-1]])
        best_above = np.minimum(prev, shifted)  # min(D[i-1, j], D[i-1, j-1])
        cum = np.cumsum(ci)
        # D[i, j] = min_{k <= j} (best_above[k] + sum(ci[k..j]))
        #         = cum[j] + running-min of (best_above[k] - cum[k-1])
        offsets = best_above - np.concatenate([[0.0], cum[:-1]])
        prev = cum + np.minimum.accumulate(offsets)
    return float(prev[-1])


@dataclass(frozen=True)
class Histogram2D:
    """128x128 occupancy counts over ground-truth bounds.

    Samples outside the bounds are counted in ``discarded`` and never
    binned; the top edge is inclusive.
    """

    bins: np.ndarray
    bounds: Bounds
    discarded: int

    def __post_init__(self):
        bins = np.asarray(self.bins, dtype=np.int64).copy()
        if bins.shape != (HIST_BINS, HIST_BINS):
            raise ValueError(f"histogram must be {HIST_BINS}x{HIST_BINS}")
        if bins.min() < 0:
            raise ValueError("histogram counts must be non-negative")
        bins.setflags(write=False)
        object.__setattr__(self, "bins", bins)

    @property
    def total(self) -> int:
        return int(self.bins.sum())

    def normalized(self) -> np.ndarray:
        total = self.total
        if total == 0:
            raise EmptyHistogramError("histogram holds no samples")
        return self.bins / total


def histogram2d(data, bounds_source) -> Histogram2D:
    """Bin ``data`` over the min/max bounds of ``bounds_source``.

    A degenerate bounds axis (min == max) collapses to a single bin
    row/column.
    """
    data = _samples(data)
    bounds = Bounds.of(_samples(bounds_source))
    in_range = np.all((data >= bounds.lo) & (data <= bounds.hi), axis=1)
    kept = data[in_range]

    span = bounds.span
    safe = np.where(span == 0.0, 1.0, span)
    scaled = (kept - bounds.lo) / safe * HIST_BINS
    idx = np.minimum(scaled.astype(np.int64), HIST_BINS - 1)
    idx[:, span == 0.0] = 0

    flat = np.bincount(idx[:, 0] * HIST_BINS + idx[:, 1], minlength=HIST_BINS * HIST_BINS)
    return Histogram2D(
        bins=flat.reshape(HIST_BINS, HIST_BINS),
        bounds=bounds,
        discarded=int(data.shape[0] - kept.shape[0]),
    )


def jensen_shannon(p_counts: np.ndarray, q_counts: np.ndarray) -> float:
    """Base-2 Jensen-Shannon divergence of two count arrays, in [0, 1]."""
    p = np.asarray(p_counts, dtype=np.float64).reshape(-1)
    q = np.asarray(q_counts, dtype=np.float64).reshape(-1)
    if p.shape != q.shape:
        raise BoundsMismatchError("histograms must share dimensions")
    if p.sum() <= 0 or q.sum() <= 0:
        raise EmptyHistogramError("both histograms must hold samples")
    p = p / p.sum()
    q = q / q.sum()
    m = (p + q) / 2.0

    def half_kl(a: np.ndarray) -> float:
        nz = a > 0
        return float(np.sum(a[nz] * np.log2(a[nz] / m[nz])))

    return 0.5 * half_kl(p) + 0.5 * half_kl(q)


def jsd(p: Histogram2D, q: Histogram2D) -> float:
    """Jensen-Shannon divergence between two histograms on shared bounds."""
    if not (np.array_equal(p.bounds.lo, q.bounds.lo) and np.array_equal(p.bounds.hi, q.bounds.hi)):
        raise BoundsMismatchError("histograms were built over different bounds")
    return jensen_shannon(p.bins, q.bins)


# --- report layout -------------------------------------------------------

REPORT_COLUMNS = [
    "Tokenizer",
    "Dataset",
    "Distribution",
    "BPE",
    "MSE",
    "MAE",
    "Acc MSE",
    "Acc MAE",
    "DTW",
    "JSD",
    "Vel JSD",
    "Ratio",
    "Percent",
]


@dataclass(frozen=True)
class EvalRow:
    tokenizer: str
    dataset: str
    distribution: DistributionKind
    bpe: bool
    mse: float
    mae: float
    acc_mse: float
    acc_mae: float
    dtw: float
    jsd: float
    vel_jsd: float
    ratio: float
    space_saving: float

    def cells(self) -> list[str]:
        def num(v: float) -> str:
            return "NaN" if math.isnan(v) else repr(float(v))

        return [
            self.tokenizer,
            self.dataset,
            self.distribution.value,
            "on" if self.bpe else "off",
            num(self.mse),
            num(self.mae),
            num(self.acc_mse),
            num(self.acc_mae),
            num(self.dtw),
            num(self.jsd),
            num(self.vel_jsd),
            num(self.ratio),
            num(self.space_saving * 100.0),
        ]

    def as_dict(self) -> dict:
        def num(v: float):
            # strict-JSON safe: missing metrics are flagged with the string "NaN"
            return "NaN" if math.isnan(v) else float(v)

        return {
            "tokenizer": self.tokenizer,
            "dataset": self.dataset,
            "distribution": self.distribution.value,
            "bpe": self.bpe,
            "mse": num(self.mse),
            "mae": num(self.mae),
            "acc_mse": num(self.acc_mse),
            "acc_mae": num(self.acc_mae),
            "dtw": num(self.dtw),
            "jsd": num(self.jsd),
            "vel_jsd": num(self.vel_jsd),
            "ratio": num(self.ratio),
            "space_saving": num(self.space_saving),
        }


@dataclass
class EvalReport:
    """Per-(tokenizer, dataset, distribution, bpe) metric rows plus the
    fully resolved config that produced them."""

    config: dict
    rows: list[EvalRow] = field(default_factory=list)

    def to_csv_text(self) -> str:
        lines = [",".join(REPORT_COLUMNS)]
        lines.extend(",".join(row.cells()) for row in self.rows)
        return "\n".join(lines) + "\n"

    def to_json_obj(self) -> dict:
        return {"config": self.config, "rows": [r.as_dict() for r in self.rows]}
