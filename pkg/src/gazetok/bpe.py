"""Byte-pair encoding over token streams.

Training greedily merges the most frequent adjacent pair into a fresh id
(base_vocab, base_vocab + 1, ...), rewriting the corpus after each merge.
Pairs never span sequence boundaries, frequency ties break to the
lexicographically smallest (left, right) pair, and training stops early
once the best pair occurs only once. Decoding expands merged ids back to
base tokens, so decode(encode(x)) == x exactly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import TokenStream
from .errors import (
    EmptyCorpusError,
    UnknownTokenError,
    VocabMismatchError,
    ZeroLengthError,
)

DEFAULT_MAX_MERGES = 2048


@dataclass(frozen=True)
class MergeTable:
    """Ordered merge rules; rule m rewrites its pair to id base_vocab + m."""

    base_vocab: int
    merges: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.base_vocab < 1:
            raise ValueError("base_vocab must be positive")
        for m, (left, right) in enumerate(self.merges):
            limit = self.base_vocab + m
            if not (0 <= left < limit and 0 <= right < limit):
                raise ValueError(f"merge {m} references id >= its own ({left}, {right})")

    @property
    def effective_vocab(self) -> int:
        return self.base_vocab + len(self.merges)

    def merge_id(self, index: int) -> int:
        return self.base_vocab + index

    def to_payload(self) -> dict:
        return {"base_vocab": self.base_vocab, "merges": [list(m) for m in self.merges]}

    @classmethod
    def from_payload(cls, payload: dict) -> "MergeTable":
        return cls(
            base_vocab=int(payload["base_vocab"]),
            merges=tuple((int(a), int(b)) for a, b in payload["merges"]),
        )


def _pair_mask(length: int, boundaries: np.ndarray) -> np.ndarray:
    """Valid adjacent-pair positions: pair p joins tokens p and p+1, which
    must belong to the same sequence."""
    mask = np.ones(max(length - 1, 0), dtype=bool)
    inner_starts = boundaries[1:]
    mask[inner_starts - 1] = False
    return mask


def _select_non_overlapping(matches: np.ndarray, left: int, right: int) -> np.ndarray:
    if left != right or matches.size < 2:
        return matches
    # runs of the same token: greedy left-to-right, skip a match that
    # shares its left token with the previous replacement
    keep = []
    prev = -2
    for p in matches.tolist():
        if p > prev + 1:
            keep.append(p)
            prev = p
    return np.asarray(keep, dtype=matches.dtype)


def _apply_merge(
    tokens: np.ndarray,
    boundaries: np.ndarray,
    left: int,
    right: int,
    new_id: int,
) -> tuple[np.ndarray, np.ndarray, int]:
    """Rewrite every in-sequence (left, right) pair to new_id."""
    if tokens.size < 2:
        return tokens, boundaries, 0
    mask = _pair_mask(tokens.size, boundaries)
    matches = np.flatnonzero((tokens[:-1] == left) & (tokens[1:] == right) & mask)
    matches = _select_non_overlapping(matches, left, right)
    if matches.size == 0:
        return tokens, boundaries, 0
    out = tokens.copy()
    out[matches] = new_id
    keep = np.ones(tokens.size, dtype=bool)
    keep[matches + 1] = False
    new_boundaries = boundaries - np.searchsorted(matches, boundaries - 1, side="left")
    return out[keep], new_boundaries, int(matches.size)


def bpe_train(corpus: TokenStream, max_merges: int = DEFAULT_MAX_MERGES) -> MergeTable:
    """Learn up to max_merges merge rules from a token stream."""
    if len(corpus) == 0:
        raise EmptyCorpusError("cannot train BPE on an empty stream")
    tokens = corpus.tokens.copy()
    boundaries = corpus.sequence_boundaries.copy()
    base = corpus.base_vocab_size
    key_mod = base + max(max_merges, 0) + 1

    merges: list[tuple[int, int]] = []
    while len(merges) < max_merges and tokens.size >= 2:
        mask = _pair_mask(tokens.size, boundaries)
        keys = tokens[:-1] * key_mod + tokens[1:]
        uniq, counts = np.unique(keys[mask], return_counts=True)
        if uniq.size == 0:
            break
        best_count = counts.max()
        if best_count < 2:
            break
        best_key = uniq[counts == best_count].min()
        left, right = divmod(int(best_key), key_mod)
        new_id = base + len(merges)
        tokens, boundaries, _ = _apply_merge(tokens, boundaries, left, right, new_id)
        merges.append((left, right))
    return MergeTable(base_vocab=base, merges=tuple(merges))


def bpe_encode(ts: TokenStream, table: MergeTable) -> TokenStream:
    """Apply merges in training order, exhaustively within each sequence."""
    if ts.base_vocab_size != table.base_vocab:
        raise VocabMismatchError(
            f"stream base vocab {ts.base_vocab_size} != table base {table.base_vocab}"
        )
    if len(ts) and int(ts.tokens.max()) >= table.effective_vocab:
        raise VocabMismatchError("stream contains ids outside the merge table's vocabulary")
    tokens = ts.tokens.copy()
    boundaries = ts.sequence_boundaries.copy()
    for index, (left, right) in enumerate(table.merges):
        tokens, boundaries, _ = _apply_merge(
            tokens, boundaries, left, right, table.merge_id(index)
        )
    return ts.replace_tokens(tokens, boundaries)


def bpe_decode(ts: TokenStream, table: MergeTable) -> TokenStream:
    """Expand merged ids back to base tokens.

    Merges are undone in reverse training order; each pass splits every
    occurrence of one merged id into its pair, so expansion terminates and
    never invents ids the table cannot explain.
    """
    if ts.base_vocab_size != table.base_vocab:
        raise VocabMismatchError(
            f"stream base vocab {ts.base_vocab_size} != table base {table.base_vocab}"
        )
    if len(ts) == 0:
        return ts.replace_tokens(ts.tokens, ts.sequence_boundaries)
    bad = ts.tokens[(ts.tokens < 0) | (ts.tokens >= table.effective_vocab)]
    if bad.size:
        raise UnknownTokenError(f"token {int(bad[0])} not covered by the merge table")

    tokens = ts.tokens.copy()
    boundaries = ts.sequence_boundaries.copy()
    for index in range(len(table.merges) - 1, -1, -1):
        merged = table.merge_id(index)
        hits = tokens == merged
        if not hits.any():
            continue
        left, right = table.merges[index]
        lengths = 1 + hits.astype(np.int64)
        starts = np.cumsum(lengths) - lengths
        out = np.empty(int(starts[-1] + lengths[-1]), dtype=np.int64)
        out[starts] = np.where(hits, left, tokens)
        out[starts[hits] + 1] = right
        boundaries = starts[boundaries]
        tokens = out
    return ts.replace_tokens(tokens, boundaries)


@dataclass(frozen=True)
class CompressionStats:
    ratio: float
    space_saving: float


def compression_stats(
    original_tokens: int,
    compressed_tokens: int,
    baseline_binary_tokens: int,
) -> CompressionStats:
    """Compression ratio and space-saving against the byte-token baseline."""
    if min(original_tokens, compressed_tokens, baseline_binary_tokens) <= 0:
        raise ZeroLengthError("token counts must be positive")
    return CompressionStats(
        ratio=baseline_binary_tokens / compressed_tokens,
        space_saving=1.0 - compressed_tokens / baseline_binary_tokens,
    )
