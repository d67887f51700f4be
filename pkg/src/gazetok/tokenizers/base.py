"""Shared tokenizer contract.

A tokenizer is a frozen encode/decode artifact: ``fit`` (where applicable)
produces an immutable instance whose ``encode``/``decode`` are pure
functions of its parameters, safe for concurrent use.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from typing import ClassVar

import numpy as np

from ..core import AxisMode, DistributionKind, GazeSequence, TokenStream
from ..errors import MalformedStreamError


class Tokenizer(ABC):
    scheme: ClassVar[str]

    #: parameter tables shared across axes, or fitted per axis
    axis_mode: AxisMode

    @property
    @abstractmethod
    def vocab_size(self) -> int:
        """Base vocabulary size (before any BPE merges)."""

    @property
    @abstractmethod
    def tokens_per_sample(self) -> int:
        """Tokens emitted per 2-D gaze sample."""

    @property
    def tokenizer_id(self) -> str:
        return f"{self.scheme}:{self.axis_mode.value}"

    @abstractmethod
    def encode_samples(self, samples: np.ndarray) -> np.ndarray:
        """Token ids for an (n, 2) sample array."""

    @abstractmethod
    def decode_samples(self, tokens: np.ndarray) -> np.ndarray:
        """(n, 2) sample array for a flat token id array."""

    @abstractmethod
    def to_payload(self) -> dict:
        """JSON-serializable parameters for the codebook file."""

    @classmethod
    @abstractmethod
    def from_payload(cls, payload: dict) -> "Tokenizer":
        """Rebuild a frozen tokenizer from codebook parameters."""

    # --- stream plumbing shared by all schemes ---

    def encode(self, seq: GazeSequence) -> TokenStream:
        return self.encode_many([seq])

    def encode_many(self, seqs: list[GazeSequence]) -> TokenStream:
        if not seqs:
            raise ValueError("need at least one sequence to encode")
        rate = seqs[0].sample_rate_hz
        kind = seqs[0].distribution_kind
        for s in seqs[1:]:
            if s.distribution_kind is not kind:
                raise ValueError("all sequences must share a distribution kind")
        parts = [self.encode_samples(s.samples) for s in seqs]
        boundaries = np.concatenate([[0], np.cumsum([p.size for p in parts])[:-1]])
        return TokenStream(
            tokens=np.concatenate(parts),
            base_vocab_size=self.vocab_size,
            tokens_per_sample=self.tokens_per_sample,
            axis_mode=self.axis_mode,
            tokenizer_id=self.tokenizer_id,
            sample_rate_hz=rate,
            distribution_kind=kind,
            sequence_boundaries=boundaries,
        )

    def decode_all(self, ts: TokenStream) -> list[GazeSequence]:
        self._check_stream(ts)
        return [
            GazeSequence(
                samples=self.decode_samples(ts.tokens[sl]),
                sample_rate_hz=ts.sample_rate_hz,
                distribution_kind=ts.distribution_kind,
            )
            for sl in ts.sequence_slices()
        ]

    def decode(self, ts: TokenStream) -> GazeSequence:
        seqs = self.decode_all(ts)
        if len(seqs) != 1:
            raise ValueError(f"stream holds {len(seqs)} sequences, use decode_all")
        return seqs[0]

    def _check_stream(self, ts: TokenStream) -> None:
        if ts.base_vocab_size != self.vocab_size:
            raise MalformedStreamError(
                f"stream base vocab {ts.base_vocab_size} != tokenizer vocab {self.vocab_size}"
            )
        if ts.tokens_per_sample != self.tokens_per_sample:
            raise MalformedStreamError(
                f"stream declares {ts.tokens_per_sample} tokens/sample, "
                f"tokenizer produces {self.tokens_per_sample}"
            )


def interleave_axes(x_tokens: np.ndarray, y_tokens: np.ndarray) -> np.ndarray:
    """x and y token columns to one flat stream: x0, y0, x1, y1, ..."""
    out = np.empty(x_tokens.size * 2, dtype=np.int64)
    out[0::2] = x_tokens
    out[1::2] = y_tokens
    return out


def deinterleave_axes(tokens: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    if tokens.size % 2 != 0:
        raise MalformedStreamError(f"token count {tokens.size} not divisible by 2")
    return tokens[0::2], tokens[1::2]


def pooled_scalars(seqs: list[GazeSequence]) -> np.ndarray:
    """All scalar coordinates of a dataset, both axes pooled."""
    return np.concatenate([s.samples.reshape(-1) for s in seqs])


def axis_scalars(seqs: list[GazeSequence], axis: int) -> np.ndarray:
    return np.concatenate([s.samples[:, axis] for s in seqs])
