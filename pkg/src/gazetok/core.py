"""Domain types and sequence calculus for 2-D gaze streams.

A gaze sample is a pair of visual angles (horizontal, vertical) in degrees.
Velocities are stored as per-sample displacements (deg/sample), not deg/s:
the accumulative reconstruction sums displacement vectors directly, and the
CLI offers rescaling by the sample rate at export time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .errors import (
    LengthMismatchError,
    NonFiniteDataError,
    SequenceTooShortError,
)

#: A single gaze sample: (x, y) visual angles in degrees.
GazeSample = tuple[float, float]


class DistributionKind(enum.Enum):
    POSITION = "position"
    VELOCITY = "velocity"


class AxisMode(enum.Enum):
    POOLED = "pooled"
    PER_AXIS = "per-axis"


def _as_finite_2d(samples) -> np.ndarray:
    arr = np.asarray(samples, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise ValueError(f"expected (n, 2) samples, got shape {arr.shape}")
    if arr.shape[0] == 0:
        raise SequenceTooShortError("gaze sequence must be non-empty")
    if not np.all(np.isfinite(arr)):
        bad = int(np.flatnonzero(~np.isfinite(arr).all(axis=1))[0])
        raise NonFiniteDataError(f"non-finite sample at index {bad}")
    return arr


@dataclass(frozen=True)
class GazeSequence:
    """Ordered finite 2-D gaze samples with a sample rate.

    Immutable after construction; the samples array is copied and frozen so
    sequences can be shared between concurrent workers.
    """

    samples: np.ndarray
    sample_rate_hz: float
    distribution_kind: DistributionKind = DistributionKind.POSITION

    def __post_init__(self):
        arr = _as_finite_2d(self.samples).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "samples", arr)
        if not (np.isfinite(self.sample_rate_hz) and self.sample_rate_hz > 0):
            raise ValueError(f"sample_rate_hz must be positive, got {self.sample_rate_hz}")

    def __len__(self) -> int:
        return self.samples.shape[0]

    @property
    def x(self) -> np.ndarray:
        return self.samples[:, 0]

    @property
    def y(self) -> np.ndarray:
        return self.samples[:, 1]


@dataclass(frozen=True)
class Bounds:
    """Per-axis [lo, hi] ranges used for normalization and histograms."""

    lo: np.ndarray  # shape (2,)
    hi: np.ndarray  # shape (2,)

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=np.float64).reshape(2).copy()
        hi = np.asarray(self.hi, dtype=np.float64).reshape(2).copy()
        if not (np.all(np.isfinite(lo)) and np.all(np.isfinite(hi))):
            raise NonFiniteDataError("bounds must be finite")
        if np.any(hi < lo):
            raise ValueError("bounds require hi >= lo per axis")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @classmethod
    def of(cls, samples: np.ndarray) -> "Bounds":
        arr = np.asarray(samples, dtype=np.float64)
        return cls(lo=arr.min(axis=0), hi=arr.max(axis=0))

    @property
    def span(self) -> np.ndarray:
        return self.hi - self.lo

    def normalize(self, samples: np.ndarray) -> np.ndarray:
        """Affine map of each axis from [lo, hi] to [-1, 1]; a degenerate
        axis (lo == hi) maps to the midpoint 0."""
        span = self.span
        safe = np.where(span == 0.0, 1.0, span)
        out = (np.asarray(samples, dtype=np.float64) - self.lo) / safe * 2.0 - 1.0
        return np.where(span == 0.0, 0.0, out)

    def denormalize(self, normed: np.ndarray) -> np.ndarray:
        return (np.asarray(normed, dtype=np.float64) + 1.0) / 2.0 * self.span + self.lo

    def to_payload(self) -> dict:
        return {"lo": self.lo.tolist(), "hi": self.hi.tolist()}

    @classmethod
    def from_payload(cls, payload: dict) -> "Bounds":
        return cls(lo=np.asarray(payload["lo"]), hi=np.asarray(payload["hi"]))


@dataclass(frozen=True)
class TokenStream:
    """Token ids plus the layout metadata needed to interpret them.

    ``sequence_boundaries`` holds the start offset of each encoded sequence
    so BPE and metrics never operate across recording boundaries.
    """

    tokens: np.ndarray
    base_vocab_size: int
    tokens_per_sample: int
    axis_mode: AxisMode
    tokenizer_id: str
    sample_rate_hz: float
    distribution_kind: DistributionKind
    sequence_boundaries: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self):
        tok = np.asarray(self.tokens, dtype=np.int64).copy()
        if tok.ndim != 1:
            raise ValueError("tokens must be a 1-D array")
        if tok.size and tok.min() < 0:
            raise ValueError("token ids must be non-negative")
        tok.setflags(write=False)
        object.__setattr__(self, "tokens", tok)

        b = self.sequence_boundaries
        b = np.array([0], dtype=np.int64) if b is None else np.asarray(b, dtype=np.int64).copy()
        if b.size == 0 or b[0] != 0:
            raise ValueError("sequence_boundaries must start at 0")
        if np.any(np.diff(b) <= 0) or (tok.size and b[-1] >= tok.size) or (tok.size == 0 and b.size > 1):
            raise ValueError("sequence_boundaries must be strictly increasing and inside the stream")
        b.setflags(write=False)
        object.__setattr__(self, "sequence_boundaries", b)

    def __len__(self) -> int:
        return int(self.tokens.size)

    @property
    def n_sequences(self) -> int:
        return int(self.sequence_boundaries.size)

    def sequence_slices(self) -> list[slice]:
        edges = np.append(self.sequence_boundaries, self.tokens.size)
        return [slice(int(a), int(b)) for a, b in zip(edges[:-1], edges[1:])]

    def replace_tokens(self, tokens: np.ndarray, boundaries: np.ndarray) -> "TokenStream":
        """Copy of this stream with rewritten tokens (e.g. after BPE)."""
        return TokenStream(
            tokens=tokens,
            base_vocab_size=self.base_vocab_size,
            tokens_per_sample=self.tokens_per_sample,
            axis_mode=self.axis_mode,
            tokenizer_id=self.tokenizer_id,
            sample_rate_hz=self.sample_rate_hz,
            distribution_kind=self.distribution_kind,
            sequence_boundaries=boundaries,
        )


def derive_velocity(seq: GazeSequence) -> GazeSequence:
    """Per-sample displacements v_i = p_i - p_{i-1} (deg/sample).

    The result has length len(seq) - 1 and distribution kind velocity.
    """
    if seq.distribution_kind is not DistributionKind.POSITION:
        raise ValueError("derive_velocity expects a position sequence")
    if len(seq) < 2:
        raise SequenceTooShortError("need at least 2 samples to derive velocity")
    return GazeSequence(
        samples=np.diff(seq.samples, axis=0),
        sample_rate_hz=seq.sample_rate_hz,
        distribution_kind=DistributionKind.VELOCITY,
    )


def integrate_positions(p0: GazeSample, vel: GazeSequence | None, sample_rate_hz: float | None = None) -> GazeSequence:
    """Positions from a start point and displacement velocities.

    Element 0 is ``p0`` and element i is p0 plus the prefix sum of the first
    i velocities, inverting :func:`derive_velocity`. ``vel`` may be None for
    the empty-velocity case, in which case ``sample_rate_hz`` is required.
    """
    start = np.asarray(p0, dtype=np.float64).reshape(1, 2)
    if not np.all(np.isfinite(start)):
        raise NonFiniteDataError("p0 must be finite")
    if vel is None:
        if sample_rate_hz is None:
            raise ValueError("sample_rate_hz required when vel is None")
        return GazeSequence(start, sample_rate_hz, DistributionKind.POSITION)
    if vel.distribution_kind is not DistributionKind.VELOCITY:
        raise ValueError("integrate_positions expects a velocity sequence")
    positions = np.vstack([start, start + np.cumsum(vel.samples, axis=0)])
    return GazeSequence(positions, vel.sample_rate_hz, DistributionKind.POSITION)


def min_max_normalize(seq: GazeSequence) -> tuple[GazeSequence, Bounds]:
    """Map each axis affinely from [min, max] to [-1, 1].

    A constant axis maps to 0 with its (min == max) bounds recorded so
    denormalization stays well defined.
    """
    bounds = Bounds.of(seq.samples)
    return (
        GazeSequence(bounds.normalize(seq.samples), seq.sample_rate_hz, seq.distribution_kind),
        bounds,
    )


def require_same_length(a: GazeSequence | np.ndarray, b: GazeSequence | np.ndarray) -> None:
    if len(a) != len(b):
        raise LengthMismatchError(f"length mismatch: {len(a)} vs {len(b)}")
