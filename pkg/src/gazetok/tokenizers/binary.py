"""Byte-level tokenizer: each float32 scalar becomes 4 byte tokens.

Samples are reinterpreted as IEEE-754 single precision, little-endian,
least-significant byte first, so a 2-D sample yields 8 tokens over a
256-entry vocabulary. The round trip is bit-exact for float32 data.
"""

from __future__ import annotations

import numpy as np

from ..core import AxisMode, GazeSequence, TokenStream
from ..errors import InvalidFloatError, MalformedStreamError
from .base import Tokenizer

BYTE_VOCAB = 256
TOKENS_PER_FLOAT = 4


class BinaryTokenizer(Tokenizer):
    scheme = "binary"

    def __init__(self):
        self.axis_mode = AxisMode.PER_AXIS

    @property
    def vocab_size(self) -> int:
        return BYTE_VOCAB

    @property
    def tokens_per_sample(self) -> int:
        return 2 * TOKENS_PER_FLOAT

    def encode_samples(self, samples: np.ndarray) -> np.ndarray:
        as_f32 = np.ascontiguousarray(samples, dtype="<f4")
        return as_f32.view(np.uint8).reshape(-1).astype(np.int64)

    def decode_samples(self, tokens: np.ndarray) -> np.ndarray:
        floats = self._decode_floats(tokens)
        if not np.all(np.isfinite(floats)):
            bad = np.flatnonzero(~np.isfinite(floats).all(axis=1))
            raise InvalidFloatError(
                f"{bad.size} decoded samples are NaN/Inf (first at index {int(bad[0])}); "
                "use decode_flagged to inspect them"
            )
        return floats

    def decode_flagged(self, ts: TokenStream) -> tuple[list[GazeSequence], list[np.ndarray]]:
        """Decode with per-sample validity flags instead of raising.

        NaN/Inf samples (possible when streams come from generation rather
        than encoding) are replaced by 0.0 and flagged False in the mask.
        """
        self._check_stream(ts)
        seqs, masks = [], []
        for sl in ts.sequence_slices():
            floats = self._decode_floats(ts.tokens[sl])
            valid = np.isfinite(floats).all(axis=1)
            floats[~valid] = 0.0
            seqs.append(GazeSequence(floats, ts.sample_rate_hz, ts.distribution_kind))
            masks.append(valid)
        return seqs, masks

    def _decode_floats(self, tokens: np.ndarray) -> np.ndarray:
        tokens = np.asarray(tokens)
        if tokens.size % self.tokens_per_sample != 0:
            raise MalformedStreamError(
                f"token count {tokens.size} not divisible by {self.tokens_per_sample}"
            )
        if tokens.size and (tokens.min() < 0 or tokens.max() >= BYTE_VOCAB):
            raise MalformedStreamError("byte tokens must lie in [0, 255]")
        raw = tokens.astype(np.uint8).tobytes()
        return np.frombuffer(raw, dtype="<f4").reshape(-1, 2).astype(np.float64)

    def to_payload(self) -> dict:
        return {"byte_order": "little", "tokens_per_float": TOKENS_PER_FLOAT}

    @classmethod
    def from_payload(cls, payload: dict) -> "BinaryTokenizer":
        return cls()
