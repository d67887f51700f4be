"""Secondary acceptance gate: one test per criterion with pass lines.

Run with ``pytest tests/test_acceptance.py -s``. The training criterion fits
a tiny-preset model on low-entropy synthetic gaze (noise-free fixation
plateaus with sparse saccades, the structure the codec is meant to exploit)
and must beat the quantile tokenizer's mean bin width on the same data.
"""

import time

import numpy as np
import pytest
import torch

from gazetok.core import GazeSequence
from gazetok.io import VqVaeCodebook, load_codebook, load_stream
from gazetok.tokenizers import QuantileTokenizer

from gazevq.data import make_windows
from gazevq.export import encode_sequences, export_codebook, export_stream, tokenizer_id
from gazevq.model import SUBVECTORS_PER_STEP, VqVae, make_spec
from gazevq.sweep import codebook_size_sweep
from gazevq.train import TrainConfig, reconstruction_errors, train


def ok(line: str) -> None:
    print(f"\n[PASS] {line}")


def fixation_recording(seed: int, n: int = 1600, ramp: int = 8) -> GazeSequence:
    """Noise-free alternation between two fixation targets, one saccade per
    400-sample window; amplitudes set a wide quantile range."""
    rng = np.random.default_rng(seed)
    a = rng.uniform(-18.0, -10.0, size=2)
    b = rng.uniform(10.0, 18.0, size=2)
    chunks, cur, nxt = [], a, b
    while sum(len(c) for c in chunks) < n:
        chunks.append(np.tile(cur, (400 - ramp, 1)))
        chunks.append(np.linspace(cur, nxt, ramp + 2)[1:-1])
        cur, nxt = nxt, cur
    pos = np.concatenate(chunks)[:n]
    return GazeSequence(pos.astype(np.float32).astype(np.float64), 100.0)


@pytest.fixture(scope="module")
def acceptance_training():
    seqs = [fixation_recording(s) for s in range(6)]
    quant = QuantileTokenizer.fit(seqs, n=2048)
    thresholds = quant.thresholds[0]
    mean_bin_width = float((thresholds[-1] - thresholds[0]) / (thresholds.size - 1))

    windows, bounds = make_windows(seqs, window_len=400)
    cfg = TrainConfig(epochs=700, warmup_epochs=50, learning_rate=1e-3, batch_size=8, seed=0)
    assert cfg.epochs <= 2000
    start = time.perf_counter()
    result = train(make_spec("position", "tiny", codebook_size=2048), windows, cfg)
    elapsed = time.perf_counter() - start
    return seqs, quant, mean_bin_width, windows, bounds, cfg, result, elapsed


def test_causality_no_future_leakage():
    torch.manual_seed(0)
    model = VqVae(make_spec("position", "tiny", codebook_size=64)).eval()
    x = torch.randn(3, 400, 2)
    with torch.no_grad():
        base = model.encoder(x)
        for t in (0, 137, 399):
            perturbed = x.clone()
            perturbed[:, t, :] += 0.5
            out = model.encoder(perturbed)
            assert torch.equal(out[:, :t], base[:, :t])
            assert not torch.equal(out[:, t:], base[:, t:])
    ok("causality: perturbing sample t leaves encoder outputs before t bit-identical")


def test_token_count_two_per_encoded_vector():
    torch.manual_seed(1)
    model = VqVae(make_spec("velocity", "tiny", codebook_size=64)).eval()
    window = torch.randn(1, 400, 2)
    ids = model.encode_tokens(window)
    assert ids.shape == (1, 400, SUBVECTORS_PER_STEP)
    assert ids.numel() == 2 * 400
    ok("token rate: a 400-sample window yields 800 tokens, two per encoded vector")


def test_exports_validate_against_primary_readers(acceptance_training, tmp_path):
    seqs, _, _, _, bounds, cfg, result, _ = acceptance_training
    model = result.model.eval()

    codebook_path = tmp_path / "codebook.json"
    export_codebook(model, bounds, cfg, codebook_path)
    artifact, doc = load_codebook(codebook_path)
    assert isinstance(artifact, VqVaeCodebook)
    assert doc["scheme"] == "vqvae"
    assert artifact.codebook.shape == (2048, 4)

    stream_path = tmp_path / "tokens.gztk1"
    ts = export_stream(model, bounds, seqs[:2], stream_path)
    again = load_stream(stream_path)
    assert np.array_equal(again.tokens, ts.tokens)
    assert again.tokenizer_id == tokenizer_id(model)
    assert again.tokens_per_sample == 2
    assert int(again.tokens.max()) < 2048
    ok("interchange: codebook JSON and GZTK1 stream round trip through the primary readers")


def test_tiny_preset_beats_quantile_mean_bin_width(acceptance_training):
    seqs, _, mean_bin_width, windows, bounds, cfg, result, elapsed = acceptance_training
    model = result.model.eval()
    with torch.no_grad():
        recon = model.decode_tokens(model.encode_tokens(windows)).numpy()
    raw = bounds.denormalize(windows.numpy().reshape(-1, 2))
    rec = bounds.denormalize(recon.reshape(-1, 2))
    mae_deg = float(np.linalg.norm(rec - raw, axis=1).mean())

    assert cfg.epochs <= 2000
    assert elapsed < 600.0
    assert mae_deg < mean_bin_width
    ok(
        f"reconstruction: tiny preset reaches MAE {mae_deg:.5f} deg < quantile mean "
        f"bin width {mean_bin_width:.5f} deg in {cfg.epochs} epochs ({elapsed:.0f}s < 600s)"
    )


def test_codebook_size_sweep_2048_beats_64():
    torch.manual_seed(0)
    seqs = [fixation_recording(s) for s in range(3)]
    windows, _ = make_windows(seqs, window_len=400)
    cfg = TrainConfig(epochs=150, warmup_epochs=25, learning_rate=1e-3, batch_size=6, seed=0)
    rows = codebook_size_sweep(windows, [64, 2048], variant="position", preset="tiny", cfg=cfg)
    errors = {size: mae for size, _, mae in rows}
    assert len(rows) == 2
    assert errors[2048] <= errors[64]
    ok(
        f"codebook sweep: reconstruction MAE at 2048 entries ({errors[2048]:.5f}) <= "
        f"at 64 entries ({errors[64]:.5f}), same seed"
    )
