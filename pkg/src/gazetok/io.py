"""Dataset ingestion, stream/codebook serialization, synthetic gaze and
train/test splitting.

File formats owned here:

* GZTK1 stream: one compact JSON header line (magic ``GZTK1``) followed by
  the raw token payload as little-endian uint32. Round trips are byte-exact.
* Codebook JSON: a single interchange file for every fitted artifact
  (quantile table, mu-law parameters, k-means centers, BPE merge table,
  VQ-VAE codebook) keyed by a ``scheme`` tag with a version field.
* Recording CSV: columns for x/y visual angles in degrees, optional
  timestamp column in seconds.
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import pandas as pd

from .bpe import MergeTable
from .core import AxisMode, DistributionKind, GazeSequence, TokenStream
from .errors import (
    BadMagicError,
    InvalidConfigError,
    InvalidFractionError,
    IoError,
    MalformedStreamError,
    MissingColumnError,
    NoValidRowsError,
    TruncatedPayloadError,
)
from .tokenizers import SCHEMES, Tokenizer

STREAM_MAGIC = "GZTK1"
CODEBOOK_FORMAT = "gazetok-codebook"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class Recording:
    id: str
    seq: GazeSequence
    source: str = ""


def atomic_write_bytes(path: str | Path, payload: bytes) -> None:
    """Write via a temp file and rename, so failures never leave a
    partially overwritten output."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
    finally:
        if os.path.exists(tmp):
            os.unlink(tmp)


def atomic_write_text(path: str | Path, text: str) -> None:
    atomic_write_bytes(path, text.encode("utf-8"))


# --- GZTK1 token streams --------------------------------------------------

def save_stream(ts: TokenStream, path: str | Path) -> None:
    if len(ts) and int(ts.tokens.max()) >= 2**32:
        raise MalformedStreamError("token ids exceed the uint32 payload width")
    header = {
        "magic": STREAM_MAGIC,
        "version": FORMAT_VERSION,
        "token_count": len(ts),
        "tokenizer_id": ts.tokenizer_id,
        "base_vocab": ts.base_vocab_size,
        "tokens_per_sample": ts.tokens_per_sample,
        "axis_mode": ts.axis_mode.value,
        "sequence_boundaries": ts.sequence_boundaries.tolist(),
        "sample_rate_hz": ts.sample_rate_hz,
        "distribution_kind": ts.distribution_kind.value,
    }
    head = json.dumps(header, sort_keys=True, separators=(",", ":")).encode("utf-8")
    payload = ts.tokens.astype("<u4").tobytes()
    atomic_write_bytes(path, head + b"\n" + payload)


def load_stream(path: str | Path) -> TokenStream:
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    newline = blob.find(b"\n")
    if newline < 0:
        raise BadMagicError(f"{path}: no header line")
    try:
        header = json.loads(blob[:newline].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise BadMagicError(f"{path}: unreadable header") from exc
    if not isinstance(header, dict) or header.get("magic") != STREAM_MAGIC:
        raise BadMagicError(f"{path}: magic is not {STREAM_MAGIC!r}")

    payload = blob[newline + 1 :]
    count = int(header["token_count"])
    if len(payload) < 4 * count:
        raise TruncatedPayloadError(
            f"{path}: payload holds {len(payload)} bytes, header declares {4 * count}"
        )
    if len(payload) > 4 * count:
        raise MalformedStreamError(f"{path}: {len(payload) - 4 * count} trailing bytes")
    return TokenStream(
        tokens=np.frombuffer(payload, dtype="<u4").astype(np.int64),
        base_vocab_size=int(header["base_vocab"]),
        tokens_per_sample=int(header["tokens_per_sample"]),
        axis_mode=AxisMode(header["axis_mode"]),
        tokenizer_id=str(header["tokenizer_id"]),
        sample_rate_hz=float(header["sample_rate_hz"]),
        distribution_kind=DistributionKind(header["distribution_kind"]),
        sequence_boundaries=np.asarray(header["sequence_boundaries"], dtype=np.int64),
    )


# --- codebook files -------------------------------------------------------

@dataclass(frozen=True)
class VqVaeCodebook:
    """Validated view of an externally trained VQ-VAE export.

    The primary pipeline cannot run the neural decoder, but it can check
    and inspect the codebook and route its token streams through the
    shared metrics.
    """

    codebook: np.ndarray  # (codebook_size, embedding_dim)
    payload: dict

    scheme = "vqvae"

    def to_payload(self) -> dict:
        return dict(self.payload)

    @classmethod
    def from_payload(cls, payload: dict) -> "VqVaeCodebook":
        arr = np.asarray(payload["codebook"], dtype=np.float64)
        if arr.ndim != 2:
            raise InvalidConfigError("vqvae codebook must be a 2-D matrix")
        if not np.all(np.isfinite(arr)):
            raise InvalidConfigError("vqvae codebook must be finite")
        return cls(codebook=arr, payload=dict(payload))


def save_codebook(
    artifact: Tokenizer | MergeTable | VqVaeCodebook,
    path: str | Path,
    distribution: DistributionKind | None = None,
) -> None:
    if isinstance(artifact, MergeTable):
        scheme, params = "bpe", artifact.to_payload()
    else:
        scheme, params = artifact.scheme, artifact.to_payload()
    doc = {
        "format": CODEBOOK_FORMAT,
        "version": FORMAT_VERSION,
        "scheme": scheme,
        "distribution": distribution.value if distribution else None,
        "params": params,
    }
    atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")


def load_codebook(path: str | Path) -> tuple[Tokenizer | MergeTable | VqVaeCodebook, dict]:
    """Returns (artifact, full document)."""
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise BadMagicError(f"{path}: not a codebook file") from exc
    if doc.get("format") != CODEBOOK_FORMAT:
        raise BadMagicError(f"{path}: format tag is not {CODEBOOK_FORMAT!r}")
    scheme = doc.get("scheme")
    params = doc.get("params", {})
    if scheme == "bpe":
        return MergeTable.from_payload(params), doc
    if scheme == "vqvae":
        return VqVaeCodebook.from_payload(params), doc
    if scheme in SCHEMES:
        return SCHEMES[scheme].from_payload(params), doc
    raise InvalidConfigError(f"{path}: unknown scheme {scheme!r}")


# --- CSV ingestion ---------------------------------------------------------

def load_csv(
    path: str | Path,
    x_col: str = "x",
    y_col: str = "y",
    t_col: str | None = None,
    sample_rate_hz: float | None = None,
    rec_id: str | None = None,
) -> tuple[Recording, int]:
    """Read one recording; returns (recording, dropped_row_count).

    Rows with NaN/Inf coordinates are dropped and counted. The sample rate
    comes from the explicit argument or from the median timestamp delta.
    """
    path = Path(path)
    try:
        # round_trip parsing keeps repr-written floats bit-exact
        frame = pd.read_csv(path, float_precision="round_trip")
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    needed = [x_col, y_col] + ([t_col] if t_col else [])
    missing = [c for c in needed if c not in frame.columns]
    if missing:
        raise MissingColumnError(f"{path}: missing columns {missing}")

    x = pd.to_numeric(frame[x_col], errors="coerce").to_numpy(dtype=np.float64)
    y = pd.to_numeric(frame[y_col], errors="coerce").to_numpy(dtype=np.float64)
    valid = np.isfinite(x) & np.isfinite(y)
    t = None
    if t_col:
        t = pd.to_numeric(frame[t_col], errors="coerce").to_numpy(dtype=np.float64)
        valid &= np.isfinite(t)
    dropped = int((~valid).sum())
    if not valid.any():
        raise NoValidRowsError(f"{path}: no finite rows")

    if sample_rate_hz is None:
        if t is None:
            raise InvalidConfigError(f"{path}: need a timestamp column or an explicit sample rate")
        deltas = np.diff(t[valid])
        median = float(np.median(deltas)) if deltas.size else 0.0
        if median <= 0:
            raise InvalidConfigError(f"{path}: cannot infer sample rate from timestamps")
        sample_rate_hz = 1.0 / median

    seq = GazeSequence(np.column_stack([x[valid], y[valid]]), sample_rate_hz)
    return Recording(id=rec_id or path.stem, seq=seq, source=str(path)), dropped


def save_decoded_csv(seqs: list[GazeSequence], path: str | Path, rescale_to_deg_per_s: bool = False) -> None:
    lines = ["sequence,sample,x,y"]
    for si, seq in enumerate(seqs):
        scale = seq.sample_rate_hz if (
            rescale_to_deg_per_s and seq.distribution_kind is DistributionKind.VELOCITY
        ) else 1.0
        for i, (x, y) in enumerate(seq.samples * scale):
            lines.append(f"{si},{i},{float(x)!r},{float(y)!r}")
    atomic_write_text(path, "\n".join(lines) + "\n")


# --- synthetic gaze --------------------------------------------------------

@dataclass(frozen=True)
class SynthConfig:
    """Alternating jittered fixation plateaus and linear saccade ramps."""

    n_fixations: int = 8
    fixation_len_range: tuple[int, int] = (20, 100)
    saccade_amp_range_deg: tuple[float, float] = (2.0, 15.0)
    saccade_len_range: tuple[int, int] = (3, 8)
    noise_std_deg: float = 0.05
    sample_rate_hz: float = 100.0
    field_limit_deg: float = 40.0
    seed: int = 0

    def __post_init__(self):
        ranges = {
            "n_fixations": (self.n_fixations, self.n_fixations),
            "fixation_len_range": self.fixation_len_range,
            "saccade_amp_range_deg": self.saccade_amp_range_deg,
            "saccade_len_range": self.saccade_len_range,
        }
        for name, (lo, hi) in ranges.items():
            if lo <= 0 or hi < lo:
                raise InvalidConfigError(f"{name} must be positive with lo <= hi")
        if self.noise_std_deg < 0 or self.sample_rate_hz <= 0 or self.field_limit_deg <= 0:
            raise InvalidConfigError("noise, sample rate and field limit must be non-negative/positive")


def synth_gaze(cfg: SynthConfig, rec_id: str | None = None) -> Recording:
    """Deterministic synthetic recording for the given seed."""
    rng = np.random.default_rng(cfg.seed)
    center = np.zeros(2)
    chunks: list[np.ndarray] = []
    limit = cfg.field_limit_deg

    for fix in range(cfg.n_fixations):
        length = int(rng.integers(cfg.fixation_len_range[0], cfg.fixation_len_range[1] + 1))
        plateau = np.tile(center, (length, 1))
        if cfg.noise_std_deg > 0:
            plateau = plateau + rng.normal(0.0, cfg.noise_std_deg, size=plateau.shape)
        chunks.append(plateau)
        if fix == cfg.n_fixations - 1:
            break

        target = None
        for _ in range(16):
            amp = rng.uniform(*cfg.saccade_amp_range_deg)
            angle = rng.uniform(0.0, 2.0 * np.pi)
            candidate = center + amp * np.array([np.cos(angle), np.sin(angle)])
            if np.all(np.abs(candidate) <= limit):
                target = candidate
                break
        if target is None:
            target = np.clip(candidate, -limit, limit)

        ramp_len = int(rng.integers(cfg.saccade_len_range[0], cfg.saccade_len_range[1] + 1))
        ramp = np.linspace(center, target, ramp_len + 2)[1:-1]
        chunks.append(ramp)
        center = target

    samples = np.concatenate(chunks, axis=0)
    np.clip(samples, -limit, limit, out=samples)
    seq = GazeSequence(samples, cfg.sample_rate_hz)
    return Recording(id=rec_id or f"synth-{cfg.seed}", seq=seq, source="synth")


# --- splitting and manifests -----------------------------------------------

def split_recordings(
    recordings: list[Recording],
    train_fraction: float,
    seed: int,
) -> tuple[list[Recording], list[Recording]]:
    """Recording-granular split; deterministic per seed, disjoint, exhaustive."""
    if not (0.0 < train_fraction < 1.0):
        raise InvalidFractionError(f"train fraction must be in (0, 1), got {train_fraction}")
    order = np.random.default_rng(seed).permutation(len(recordings))
    n_train = int(np.floor(len(recordings) * train_fraction + 1e-9))
    train_idx = sorted(order[:n_train].tolist())
    test_idx = sorted(order[n_train:].tolist())
    return [recordings[i] for i in train_idx], [recordings[i] for i in test_idx]


@dataclass
class Manifest:
    name: str
    sample_rate_hz: float | None
    x_col: str
    y_col: str
    t_col: str | None
    recordings: list[dict] = field(default_factory=list)  # {"id", "path"}

    @classmethod
    def from_file(cls, path: str | Path) -> "Manifest":
        try:
            doc = json.loads(Path(path).read_text(encoding="utf-8"))
        except OSError as exc:
            raise IoError(f"cannot read {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise InvalidConfigError(f"{path}: manifest is not valid JSON") from exc
        csv = doc.get("csv", {})
        return cls(
            name=doc.get("name", Path(path).stem),
            sample_rate_hz=doc.get("sample_rate_hz"),
            x_col=csv.get("x_col", "x"),
            y_col=csv.get("y_col", "y"),
            t_col=csv.get("t_col"),
            recordings=doc.get("recordings", []),
        )

    def save(self, path: str | Path) -> None:
        doc = {
            "name": self.name,
            "sample_rate_hz": self.sample_rate_hz,
            "csv": {"x_col": self.x_col, "y_col": self.y_col, "t_col": self.t_col},
            "recordings": self.recordings,
        }
        atomic_write_text(path, json.dumps(doc, sort_keys=True, indent=1) + "\n")

    def load_recordings(self, base_dir: str | Path) -> list[Recording]:
        if not self.recordings:
            raise InvalidConfigError("manifest lists no recordings")
        base = Path(base_dir)
        out = []
        for entry in self.recordings:
            rec, _ = load_csv(
                base / entry["path"],
                x_col=self.x_col,
                y_col=self.y_col,
                t_col=self.t_col,
                sample_rate_hz=self.sample_rate_hz,
                rec_id=entry["id"],
            )
            out.append(rec)
        return sorted(out, key=lambda r: r.id)
