"""Training loop: Adam with warmup + linear anneal, commitment-weighted
quantizer loss, k-means++ codebook init and dead-code replacement.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import torch

from .model import SUBVECTORS_PER_STEP, VqVae, VqVaeSpec


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 2000          # paper regime: 35000
    learning_rate: float = 2e-4
    warmup_epochs: int = 500
    final_lr: float = 1e-8
    commitment_beta: float = 0.2
    dead_code_horizon: int = 20
    batch_size: int = 16
    seed: int = 0
    dead_code_replacement: bool = True
    grad_clip_norm: float = 1.0  # LSTM stacks spike without clipping

    def __post_init__(self):
        if min(self.epochs, self.warmup_epochs, self.batch_size, self.dead_code_horizon) < 1:
            raise ValueError("epochs, warmup, batch size and horizon must be positive")
        if self.learning_rate <= 0 or self.final_lr <= 0 or self.commitment_beta <= 0:
            raise ValueError("learning rates and beta must be positive")

    def lr_at(self, epoch: int) -> float:
        """Linear warmup to the base rate, then linear anneal so the last
        epoch runs at final_lr."""
        if epoch < self.warmup_epochs:
            return self.learning_rate * (epoch + 1) / self.warmup_epochs
        span = max(self.epochs - 1 - self.warmup_epochs, 1)
        frac = min((epoch - self.warmup_epochs) / span, 1.0)
        return self.learning_rate + (self.final_lr - self.learning_rate) * frac


@dataclass
class TrainResult:
    model: VqVae
    losses: list[float] = field(default_factory=list)
    replaced_entries: int = 0

    @property
    def final_loss(self) -> float:
        return self.losses[-1]


def kmeans_plusplus_rows(data: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """k-means++ seeding over data rows; jittered resampling if rows < k."""
    n = data.shape[0]
    if n == 0:
        raise ValueError("cannot seed a codebook from no data")
    picks = np.empty((k, data.shape[1]), dtype=np.float64)
    picks[0] = data[rng.integers(n)]
    d2 = np.sum((data - picks[0]) ** 2, axis=1)
    for i in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            jitter = rng.normal(0.0, 1e-3, size=data.shape[1])
            picks[i] = data[rng.integers(n)] + jitter
            continue
        idx = rng.choice(n, p=d2 / total)
        picks[i] = data[idx]
        d2 = np.minimum(d2, np.sum((data - picks[i]) ** 2, axis=1))
    return picks


@torch.no_grad()
def init_codebook(model: VqVae, windows: torch.Tensor, seed: int) -> None:
    """Seed the codebook with k-means++ over initial encoder sub-vectors,
    so quantized embeddings start at a useful scale."""
    latents = model.encoder(windows)
    subs = latents.reshape(-1, model.spec.embedding_dim).cpu().numpy().astype(np.float64)
    rows = kmeans_plusplus_rows(subs, model.spec.codebook_size, np.random.default_rng(seed))
    model.quantizer.codebook.copy_(torch.tensor(rows, dtype=torch.float32))
    model.quantizer.unused_steps.zero_()


def train(spec: VqVaeSpec, windows: torch.Tensor, cfg: TrainConfig) -> TrainResult:
    """Optimize reconstruction MSE plus quantizer terms on (N, T, 2) windows."""
    if not torch.isfinite(windows).all():
        raise FloatingPointError("training windows contain NaN/Inf")
    torch.manual_seed(cfg.seed)
    model = VqVae(spec)
    init_codebook(model, windows, cfg.seed)

    optimizer = torch.optim.Adam(model.parameters(), lr=cfg.learning_rate)
    order_rng = np.random.default_rng(cfg.seed + 1)
    result = TrainResult(model=model)

    for epoch in range(cfg.epochs):
        lr = cfg.lr_at(epoch)
        for group in optimizer.param_groups:
            group["lr"] = lr

        perm = order_rng.permutation(windows.shape[0])
        epoch_loss = 0.0
        for start in range(0, len(perm), cfg.batch_size):
            batch = windows[perm[start : start + cfg.batch_size]]
            recon, ids, (codebook_loss, commitment_loss), latents = model(batch)
            loss = (
                torch.nn.functional.mse_loss(recon, batch)
                + codebook_loss
                + cfg.commitment_beta * commitment_loss
            )
            if not torch.isfinite(loss):
                raise FloatingPointError(f"non-finite training loss at epoch {epoch}")
            optimizer.zero_grad()
            loss.backward()
            if cfg.grad_clip_norm > 0:
                torch.nn.utils.clip_grad_norm_(model.parameters(), cfg.grad_clip_norm)
            optimizer.step()

            model.quantizer.note_usage(ids)
            if cfg.dead_code_replacement:
                result.replaced_entries += model.quantizer.replace_dead_entries(
                    latents.detach(), cfg.dead_code_horizon
                )
            epoch_loss += float(loss.detach()) * batch.shape[0]
        result.losses.append(epoch_loss / windows.shape[0])
    return result


@torch.no_grad()
def reconstruction_errors(model: VqVae, windows: torch.Tensor) -> tuple[float, float]:
    """(MSE, MAE) of decode(encode(x)) in normalized units, Euclidean per sample."""
    recon = model.decode_tokens(model.encode_tokens(windows))
    dist = torch.linalg.norm(recon - windows, dim=-1)
    return float((dist**2).mean()), float(dist.mean())
