"""Fit -> encode -> (BPE) -> decode -> metrics pipeline over a dataset.

One invocation produces one report row: a tokenizer scheme evaluated on one
dataset and distribution, with or without BPE. Reports embed the fully
resolved config and are byte-identical for identical (config, seed) pairs
regardless of worker count: per-recording work is parallelized but reduced
in canonical recording order.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass

import numpy as np

from . import bpe as bpe_mod
from . import metrics
from .core import AxisMode, DistributionKind, GazeSequence, derive_velocity
from .errors import ConfigError
from .io import Recording, split_recordings
from .tokenizers import SCHEMES, BinaryTokenizer, KMeansConfig, KMeansTokenizer, Tokenizer
from .tokenizers.binary import TOKENS_PER_FLOAT


@dataclass(frozen=True)
class EvalConfig:
    scheme: str
    distribution: str = "position"
    axis_mode: str = "pooled"
    vocab: int = 2048
    bpe: bool = False
    bpe_merges: int = bpe_mod.DEFAULT_MAX_MERGES
    train_fraction: float = 0.8
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}, expected one of {sorted(SCHEMES)}")
        if self.vocab < 2:
            raise ConfigError("vocab must be >= 2")
        if self.threads < 1:
            raise ConfigError("threads must be >= 1")
        DistributionKind(self.distribution)
        AxisMode(self.axis_mode)

    @property
    def kind(self) -> DistributionKind:
        return DistributionKind(self.distribution)

    @property
    def mode(self) -> AxisMode:
        return AxisMode(self.axis_mode)


def fit_tokenizer(train_seqs: list[GazeSequence], cfg: EvalConfig) -> Tokenizer:
    if cfg.scheme == "binary":
        return BinaryTokenizer()
    if cfg.scheme == "kmeans":
        return KMeansTokenizer.fit(
            train_seqs, k=cfg.vocab, axis_mode=cfg.mode, cfg=KMeansConfig(seed=cfg.seed)
        )
    return SCHEMES[cfg.scheme].fit(train_seqs, cfg.vocab, cfg.mode)


def _to_distribution(recordings: list[Recording], kind: DistributionKind) -> list[GazeSequence]:
    if kind is DistributionKind.POSITION:
        return [r.seq for r in recordings]
    return [derive_velocity(r.seq) for r in recordings]


def _derivative_arrays(seqs: list[GazeSequence]) -> np.ndarray:
    return np.concatenate([np.diff(s.samples, axis=0) for s in seqs], axis=0)


def evaluate_dataset(
    recordings: list[Recording],
    dataset_name: str,
    cfg: EvalConfig,
) -> metrics.EvalReport:
    recordings = sorted(recordings, key=lambda r: r.id)
    train_recs, test_recs = split_recordings(recordings, cfg.train_fraction, cfg.seed)
    if not train_recs or not test_recs:
        raise ConfigError("split left an empty train or test set; adjust train_fraction")

    train_seqs = _to_distribution(train_recs, cfg.kind)
    test_seqs = _to_distribution(test_recs, cfg.kind)

    tokenizer = fit_tokenizer(train_seqs, cfg)
    test_stream = tokenizer.encode_many(test_seqs)
    decoded = tokenizer.decode_all(test_stream)

    n_samples = sum(len(s) for s in test_seqs)
    baseline = 2 * TOKENS_PER_FLOAT * n_samples
    compressed_count = len(test_stream)
    if cfg.bpe:
        table = bpe_mod.bpe_train(tokenizer.encode_many(train_seqs), cfg.bpe_merges)
        compressed_count = len(bpe_mod.bpe_encode(test_stream, table))
    stats = bpe_mod.compression_stats(len(test_stream), compressed_count, baseline)

    def per_recording(i: int) -> dict:
        gt, dec = test_seqs[i], decoded[i]
        row = {
            "n": len(gt),
            "sq_sum": metrics.mse(gt, dec) * len(gt),
            "abs_sum": metrics.mae(gt, dec) * len(gt),
            "dtw": metrics.dtw(gt, dec),
        }
        if cfg.kind is DistributionKind.VELOCITY:
            gt_pos = test_recs[i].seq
            row["acc_sq_sum"] = metrics.accumulative_error(gt_pos, dec, "mse") * len(gt_pos)
            row["acc_abs_sum"] = metrics.accumulative_error(gt_pos, dec, "mae") * len(gt_pos)
            row["acc_n"] = len(gt_pos)
        return row

    indices = range(len(test_seqs))
    if cfg.threads > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            rows = list(pool.map(per_recording, indices))
    else:
        rows = [per_recording(i) for i in indices]

    total = sum(r["n"] for r in rows)
    mse_val = sum(r["sq_sum"] for r in rows) / total
    mae_val = sum(r["abs_sum"] for r in rows) / total
    dtw_val = sum(r["dtw"] for r in rows) / len(rows)
    if cfg.kind is DistributionKind.VELOCITY:
        acc_n = sum(r["acc_n"] for r in rows)
        acc_mse = sum(r["acc_sq_sum"] for r in rows) / acc_n
        acc_mae = sum(r["acc_abs_sum"] for r in rows) / acc_n
    else:
        acc_mse = acc_mae = math.nan

    gt_all = np.concatenate([s.samples for s in test_seqs], axis=0)
    dec_all = np.concatenate([s.samples for s in decoded], axis=0)
    jsd_val = metrics.jsd(
        metrics.histogram2d(gt_all, gt_all), metrics.histogram2d(dec_all, gt_all)
    )
    gt_deriv = _derivative_arrays(test_seqs)
    dec_deriv = _derivative_arrays(decoded)
    vel_jsd_val = metrics.jsd(
        metrics.histogram2d(gt_deriv, gt_deriv), metrics.histogram2d(dec_deriv, gt_deriv)
    )

    row = metrics.EvalRow(
        tokenizer=cfg.scheme,
        dataset=dataset_name,
        distribution=cfg.kind,
        bpe=cfg.bpe,
        mse=mse_val,
        mae=mae_val,
        acc_mse=acc_mse,
        acc_mae=acc_mae,
        dtw=dtw_val,
        jsd=jsd_val,
        vel_jsd=vel_jsd_val,
        ratio=stats.ratio,
        space_saving=stats.space_saving,
    )
    config = dict(asdict(cfg), dataset=dataset_name)
    # scheduling knob, not part of the result-defining config: reports must
    # be byte-identical across worker counts
    del config["threads"]
    return metrics.EvalReport(config=config, rows=[row])


def accumulative_error_curve(
    recordings: list[Recording],
    cfg: EvalConfig,
    lengths: list[int],
) -> list[tuple[int, float, float]]:
    """Accumulative (MSE, MAE) at growing sequence-length cutoffs.

    Fits on the train split, then reconstructs each test recording's
    positions from decoded velocities truncated at every cutoff.
    """
    recordings = sorted(recordings, key=lambda r: r.id)
    train_recs, test_recs = split_recordings(recordings, cfg.train_fraction, cfg.seed)
    if not train_recs or not test_recs:
        raise ConfigError("split left an empty train or test set; adjust train_fraction")
    tokenizer = fit_tokenizer(_to_distribution(train_recs, DistributionKind.VELOCITY), cfg)

    out = []
    for cut in lengths:
        if cut < 2:
            raise ConfigError("curve lengths must be >= 2 samples")
        sq_sum = abs_sum = count = 0
        for rec in test_recs:
            if len(rec.seq) < cut:
                continue
            gt_pos = GazeSequence(
                rec.seq.samples[:cut], rec.seq.sample_rate_hz, DistributionKind.POSITION
            )
            vel = derive_velocity(gt_pos)
            dec = tokenizer.decode(tokenizer.encode(vel))
            sq_sum += metrics.accumulative_error(gt_pos, dec, "mse") * cut
            abs_sum += metrics.accumulative_error(gt_pos, dec, "mae") * cut
            count += cut
        if count == 0:
            raise ConfigError(f"no test recording is {cut} samples long")
        out.append((cut, sq_sum / count, abs_sum / count))
    return out
