"""Exports in the gazetok interchange formats.

The codebook goes into the shared codebook JSON (scheme tag ``vqvae``),
token streams into GZTK1 files with the model hash embedded in the
tokenizer id, and model weights into a torch checkpoint next to them.
"""

from __future__ import annotations

import hashlib
import io as std_io
from dataclasses import asdict
from pathlib import Path

import numpy as np
import torch

from gazetok.core import AxisMode, DistributionKind, GazeSequence, TokenStream
from gazetok.io import VqVaeCodebook, save_codebook, save_stream

from .data import NormBounds
from .model import SUBVECTORS_PER_STEP, VqVae, VqVaeSpec, make_spec
from .train import TrainConfig


class ModelMismatchError(RuntimeError):
    """Stream was produced by a different model than the one decoding it."""


def model_hash(model: VqVae) -> str:
    blob = std_io.BytesIO()
    torch.save({k: v.cpu() for k, v in sorted(model.state_dict().items())}, blob)
    return hashlib.sha256(blob.getvalue()).hexdigest()[:12]


def tokenizer_id(model: VqVae) -> str:
    return f"vqvae:{model.spec.variant}:{model_hash(model)}"


def export_codebook(
    model: VqVae,
    bounds: NormBounds,
    cfg: TrainConfig,
    path: str | Path,
) -> None:
    payload = {
        "codebook": model.quantizer.codebook.detach().cpu().numpy().tolist(),
        "codebook_size": model.spec.codebook_size,
        "embedding_dim": model.spec.embedding_dim,
        "subvectors_per_step": SUBVECTORS_PER_STEP,
        "variant": model.spec.variant,
        "window_len": model.spec.window_len,
        "bounds": bounds.to_payload(),
        "model_hash": model_hash(model),
        "train_config": asdict(cfg),
    }
    distribution = (
        DistributionKind.POSITION if model.spec.variant == "position" else DistributionKind.VELOCITY
    )
    save_codebook(VqVaeCodebook.from_payload(payload), path, distribution=distribution)


def save_model(model: VqVae, bounds: NormBounds, path: str | Path) -> None:
    torch.save(
        {
            "spec": asdict(model.spec),
            "bounds": bounds.to_payload(),
            "state_dict": model.state_dict(),
        },
        path,
    )


def load_model(path: str | Path) -> tuple[VqVae, NormBounds]:
    blob = torch.load(path, weights_only=False)
    spec_doc = blob["spec"]
    spec = make_spec(spec_doc["variant"], "faithful", spec_doc["codebook_size"])
    if asdict(spec) != spec_doc:
        spec = VqVaeSpec(
            **{
                **spec_doc,
                "enc_block1": _block(spec_doc["enc_block1"]),
                "enc_block2": _block(spec_doc["enc_block2"]),
                "dec_block1": _block(spec_doc["dec_block1"]),
                "dec_block2": _block(spec_doc["dec_block2"]),
            }
        )
    model = VqVae(spec)
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model, NormBounds.from_payload(blob["bounds"])


def _block(doc: dict):
    from .model import BlockSpec

    return BlockSpec(**doc)


def encode_sequences(
    model: VqVae,
    bounds: NormBounds,
    seqs: list[GazeSequence],
) -> TokenStream:
    """Full-length causal inference; two tokens per sample, GZTK1-ready."""
    parts = []
    for seq in seqs:
        normed = torch.tensor(bounds.normalize(seq.samples)[None], dtype=torch.float32)
        ids = model.encode_tokens(normed)[0]  # (T, 2)
        parts.append(ids.reshape(-1).cpu().numpy().astype(np.int64))
    boundaries = np.concatenate([[0], np.cumsum([p.size for p in parts])[:-1]])
    kind = (
        DistributionKind.POSITION if model.spec.variant == "position" else DistributionKind.VELOCITY
    )
    return TokenStream(
        tokens=np.concatenate(parts),
        base_vocab_size=model.spec.codebook_size,
        tokens_per_sample=SUBVECTORS_PER_STEP,
        axis_mode=AxisMode.POOLED,
        tokenizer_id=tokenizer_id(model),
        sample_rate_hz=seqs[0].sample_rate_hz,
        distribution_kind=kind,
        sequence_boundaries=boundaries,
    )


def decode_stream(model: VqVae, bounds: NormBounds, ts: TokenStream) -> list[GazeSequence]:
    if ts.tokenizer_id != tokenizer_id(model):
        raise ModelMismatchError(
            f"stream {ts.tokenizer_id!r} was not produced by model {tokenizer_id(model)!r}"
        )
    out = []
    for sl in ts.sequence_slices():
        ids = torch.tensor(
            ts.tokens[sl].reshape(-1, SUBVECTORS_PER_STEP)[None], dtype=torch.long
        )
        recon = model.decode_tokens(ids)[0].cpu().numpy().astype(np.float64)
        out.append(
            GazeSequence(bounds.denormalize(recon), ts.sample_rate_hz, ts.distribution_kind)
        )
    return out


def export_stream(model: VqVae, bounds: NormBounds, seqs: list[GazeSequence], path: str | Path) -> TokenStream:
    ts = encode_sequences(model, bounds, seqs)
    save_stream(ts, path)
    return ts
