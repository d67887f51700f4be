"""Causal VQ-VAE for 2-D gaze windows.

Encoder: two causal residual conv blocks followed by an LSTM block, all
stride 1 so the 400-sample feature map length is preserved. The quantizer
snaps each encoded vector to two codebook entries (the latent is split into
two sub-vectors), so every input sample yields exactly two tokens. The
decoder mirrors the encoder with transposed convolutions.

Every layer is causal: output position t only sees input positions <= t.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch
import torch.nn.functional as F
from scipy.spatial import cKDTree
from torch import nn

SUBVECTORS_PER_STEP = 2

# brute-force scoring below this many (queries x entries) pairs, KD-tree above
_BRUTE_FORCE_PAIRS = 1 << 21


@dataclass(frozen=True)
class BlockSpec:
    hidden: int
    out: int


@dataclass(frozen=True)
class VqVaeSpec:
    """Layer widths for one variant; the tiny preset halves the faithful
    widths but keeps the topology (and the latent split) intact."""

    variant: str  # "position" | "velocity"
    embedding_dim: int
    codebook_size: int
    enc_block1: BlockSpec
    enc_block2: BlockSpec
    enc_lstm_hidden: int
    dec_lstm_hidden: int
    dec_block1: BlockSpec
    dec_block2: BlockSpec
    window_len: int = 400
    kernel: int = 3

    @property
    def latent_dim(self) -> int:
        return SUBVECTORS_PER_STEP * self.embedding_dim


def make_spec(variant: str, preset: str = "faithful", codebook_size: int = 2048) -> VqVaeSpec:
    if variant == "position":
        if preset == "faithful":
            return VqVaeSpec(
                variant, 4, codebook_size,
                BlockSpec(64, 16), BlockSpec(128, 32), 32,
                32, BlockSpec(128, 32), BlockSpec(64, 2),
            )
        if preset == "tiny":
            return VqVaeSpec(
                variant, 4, codebook_size,
                BlockSpec(32, 8), BlockSpec(64, 16), 16,
                16, BlockSpec(64, 16), BlockSpec(32, 2),
            )
    if variant == "velocity":
        if preset == "faithful":
            return VqVaeSpec(
                variant, 2, codebook_size,
                BlockSpec(32, 8), BlockSpec(64, 16), 4,
                16, BlockSpec(64, 16), BlockSpec(32, 2),
            )
        if preset == "tiny":
            return VqVaeSpec(
                variant, 2, codebook_size,
                BlockSpec(16, 4), BlockSpec(32, 8), 4,
                8, BlockSpec(32, 8), BlockSpec(16, 2),
            )
    raise ValueError(f"unknown variant/preset: {variant!r}/{preset!r}")


class CausalConv1d(nn.Module):
    def __init__(self, in_ch: int, out_ch: int, kernel: int):
        super().__init__()
        self.pad = kernel - 1
        self.conv = nn.Conv1d(in_ch, out_ch, kernel)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv(F.pad(x, (self.pad, 0)))


class CausalTransposedConv1d(nn.Module):
    """Stride-1 transposed conv, tail-trimmed so output t sees inputs <= t."""

    def __init__(self, in_ch: int, out_ch: int, kernel: int):
        super().__init__()
        self.conv = nn.ConvTranspose1d(in_ch, out_ch, kernel)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.conv(x)[..., : x.shape[-1]]


class ResBlock(nn.Module):
    """hidden conv -> relu -> output conv, plus a 1x1 residual projection."""

    def __init__(self, in_ch: int, spec: BlockSpec, kernel: int, transposed: bool):
        super().__init__()
        conv = CausalTransposedConv1d if transposed else CausalConv1d
        self.hidden = conv(in_ch, spec.hidden, kernel)
        self.out = conv(spec.hidden, spec.out, kernel)
        self.residual = nn.Conv1d(in_ch, spec.out, 1)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        return self.out(F.relu(self.hidden(x))) + self.residual(x)


class LstmBlock(nn.Module):
    """Unidirectional LSTM with a linear head and a linear residual path."""

    def __init__(self, in_dim: int, hidden: int, out_dim: int):
        super().__init__()
        self.lstm = nn.LSTM(in_dim, hidden, batch_first=True)
        self.head = nn.Linear(hidden, out_dim)
        self.residual = nn.Linear(in_dim, out_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, T, C)
        states, _ = self.lstm(x)
        return self.head(states) + self.residual(x)


class Encoder(nn.Module):
    def __init__(self, spec: VqVaeSpec):
        super().__init__()
        self.block1 = ResBlock(2, spec.enc_block1, spec.kernel, transposed=False)
        self.block2 = ResBlock(spec.enc_block1.out, spec.enc_block2, spec.kernel, transposed=False)
        self.lstm = LstmBlock(spec.enc_block2.out, spec.enc_lstm_hidden, spec.latent_dim)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        # x: (B, T, 2) -> latents (B, T, latent_dim)
        h = x.transpose(1, 2)
        h = F.relu(self.block1(h))
        h = F.relu(self.block2(h))
        return self.lstm(h.transpose(1, 2))


class Decoder(nn.Module):
    def __init__(self, spec: VqVaeSpec):
        super().__init__()
        self.lstm = LstmBlock(spec.latent_dim, spec.dec_lstm_hidden, spec.latent_dim)
        self.block1 = ResBlock(spec.latent_dim, spec.dec_block1, spec.kernel, transposed=True)
        self.block2 = ResBlock(spec.dec_block1.out, spec.dec_block2, spec.kernel, transposed=True)

    def forward(self, z: torch.Tensor) -> torch.Tensor:
        # z: (B, T, latent_dim) -> reconstruction (B, T, 2)
        h = self.lstm(z).transpose(1, 2)
        h = F.relu(self.block1(h))
        return self.block2(h).transpose(1, 2)


class PairQuantizer(nn.Module):
    """Snaps each latent vector to two codebook entries.

    The latent (B, T, 2D) splits into two D-dim sub-vectors per step; each
    picks its nearest codebook row, giving two token ids per input sample.
    Gradients pass straight through the quantization.
    """

    def __init__(self, codebook_size: int, embedding_dim: int):
        super().__init__()
        self.codebook = nn.Parameter(torch.randn(codebook_size, embedding_dim) * 0.1)
        # steps since each entry was last used, for dead-code replacement
        self.register_buffer("unused_steps", torch.zeros(codebook_size, dtype=torch.long))

    @property
    def codebook_size(self) -> int:
        return int(self.codebook.shape[0])

    def _nearest(self, subs: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor]:
        """Exact nearest codebook row per sub-vector, plus squared distance.

        Small problems use one fused addmm over ||c||^2 - 2 x.c (the ||x||^2
        term is constant per row, so the argmin is unchanged); large ones go
        through a KD-tree, which is far cheaper at these embedding widths.
        """
        with torch.no_grad():
            book = self.codebook.detach()
            if subs.shape[0] * book.shape[0] > _BRUTE_FORCE_PAIRS:
                dist, ids = cKDTree(book.cpu().numpy()).query(subs.cpu().numpy(), k=1)
                return (
                    torch.as_tensor(ids, dtype=torch.long, device=subs.device),
                    torch.as_tensor(dist * dist, dtype=subs.dtype, device=subs.device),
                )
            scores = torch.addmm(
                (book * book).sum(dim=1)[None, :], subs, book.T, beta=1.0, alpha=-2.0
            )
            best = scores.min(dim=1)
            min_d2 = (best.values + (subs * subs).sum(dim=1)).clamp_min_(0.0)
            return best.indices, min_d2

    def tokens(self, latents: torch.Tensor) -> torch.Tensor:
        """(B, T, 2D) latents -> (B, T, 2) nearest-entry indices."""
        subs = latents.reshape(*latents.shape[:-1], SUBVECTORS_PER_STEP, -1)
        ids, _ = self._nearest(subs.reshape(-1, subs.shape[-1]).detach())
        return ids.reshape(*subs.shape[:-1])

    def forward(self, latents: torch.Tensor) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
        """Returns (quantized latents, token ids, codebook+commitment loss halves)."""
        ids = self.tokens(latents)
        picked = self.codebook[ids].reshape(latents.shape)
        codebook_loss = F.mse_loss(picked, latents.detach())
        commitment_loss = F.mse_loss(latents, picked.detach())
        quantized = latents + (picked - latents).detach()
        return quantized, ids, torch.stack([codebook_loss, commitment_loss])

    def note_usage(self, ids: torch.Tensor) -> None:
        used = torch.zeros(self.codebook_size, dtype=torch.bool, device=ids.device)
        used[ids.reshape(-1)] = True
        self.unused_steps += 1
        self.unused_steps[used] = 0

    @torch.no_grad()
    def replace_dead_entries(self, latents: torch.Tensor, horizon: int) -> int:
        """Restart entries unused for ``horizon`` steps from the batch
        sub-vectors that the current codebook represents worst."""
        dead = torch.nonzero(self.unused_steps >= horizon).reshape(-1)
        if dead.numel() == 0:
            return 0
        subs = latents.reshape(-1, self.codebook.shape[1])
        _, min_d2 = self._nearest(subs)
        worst_first = min_d2.argsort(descending=True)
        take = min(dead.numel(), subs.shape[0])
        self.codebook[dead[:take]] = subs[worst_first[:take]]
        self.unused_steps[dead[:take]] = 0
        return int(take)


class VqVae(nn.Module):
    def __init__(self, spec: VqVaeSpec):
        super().__init__()
        self.spec = spec
        self.encoder = Encoder(spec)
        self.quantizer = PairQuantizer(spec.codebook_size, spec.embedding_dim)
        self.decoder = Decoder(spec)

    def forward(self, x: torch.Tensor):
        latents = self.encoder(x)
        quantized, ids, losses = self.quantizer(latents)
        recon = self.decoder(quantized)
        return recon, ids, losses, latents

    @torch.no_grad()
    def encode_tokens(self, x: torch.Tensor) -> torch.Tensor:
        """(B, T, 2) -> (B, T, 2) token ids, two per sample."""
        return self.quantizer.tokens(self.encoder(x))

    @torch.no_grad()
    def decode_tokens(self, ids: torch.Tensor) -> torch.Tensor:
        """(B, T, 2) token ids -> (B, T, 2) reconstructed samples."""
        picked = self.quantizer.codebook[ids]
        return self.decoder(picked.reshape(*ids.shape[:2], -1))
