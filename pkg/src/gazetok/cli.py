"""Command-line surface: fit, encode, decode, bpe-train, eval, sweep, synth.

Every run is deterministic given its config and seed, outputs are written
atomically, and failures exit nonzero with a machine-readable category on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import bpe as bpe_mod
from . import io as gio
from . import metrics
from .core import AxisMode, DistributionKind, derive_velocity
from .errors import ConfigError, GazetokError
from .evaluate import EvalConfig, accumulative_error_curve, evaluate_dataset, fit_tokenizer
from .tokenizers import SCHEMES, Tokenizer
from .tokenizers.kmeans import KMeansConfig, reconstruction_sweep


def _int_pair(text: str) -> tuple[int, int]:
    lo, hi = (int(v) for v in text.split(","))
    return lo, hi


def _float_pair(text: str) -> tuple[float, float]:
    lo, hi = (float(v) for v in text.split(","))
    return lo, hi


def _int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",")]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazetok", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, scheme=True):
        if scheme:
            p.add_argument("--scheme", choices=sorted(SCHEMES), required=True)
        p.add_argument("--distribution", choices=["position", "velocity"], default="position")
        p.add_argument("--axis-mode", choices=["pooled", "per-axis"], default="pooled")
        p.add_argument("--vocab", type=int, default=2048)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--train-fraction", type=float, default=0.8)

    p = sub.add_parser("synth", help="generate a synthetic dataset with a manifest")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--name", default="synth")
    p.add_argument("--recordings", type=int, default=10)
    p.add_argument("--n-fixations", type=int, default=8)
    p.add_argument("--fixation-len-range", type=_int_pair, default=(20, 100))
    p.add_argument("--saccade-amp-range", type=_float_pair, default=(2.0, 15.0))
    p.add_argument("--saccade-len-range", type=_int_pair, default=(3, 8))
    p.add_argument("--noise-std", type=float, default=0.05)
    p.add_argument("--rate", type=float, default=100.0)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("fit", help="fit a tokenizer, write a codebook file")
    p.add_argument("--manifest", required=True)
    add_common(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("encode", help="encode recordings into a GZTK1 stream")
    p.add_argument("--manifest", required=True)
    p.add_argument("--codebook", required=True)
    p.add_argument("--split", choices=["train", "test", "all"], default="all")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--bpe-table", help="optional merge-table codebook to apply")
    p.add_argument("--out", required=True)

    p = sub.add_parser("decode", help="decode a GZTK1 stream back to CSV")
    p.add_argument("--codebook", required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--bpe-table", help="optional merge-table codebook to undo first")
    p.add_argument("--deg-per-sec", action="store_true",
                   help="rescale velocity output by the sample rate")
    p.add_argument("--out", required=True)

    p = sub.add_parser("bpe-train", help="train BPE merges on a token stream")
    p.add_argument("--stream", required=True)
    p.add_argument("--bpe-merges", type=int, default=bpe_mod.DEFAULT_MAX_MERGES)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="reconstruction/compression report for one config")
    p.add_argument("--manifest", required=True)
    add_common(p)
    p.add_argument("--bpe", action="store_true")
    p.add_argument("--bpe-merges", type=int, default=bpe_mod.DEFAULT_MAX_MERGES)
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", required=True, help="output directory for report.csv/report.json")

    p = sub.add_parser("sweep", help="plot-data sweeps (CSV)")
    p.add_argument("--kind", choices=["kmeans-k", "acc-length", "vqvae-ingest"], required=True)
    p.add_argument("--manifest")
    p.add_argument("--scheme", choices=sorted(SCHEMES))
    p.add_argument("--distribution", choices=["position", "velocity"], default="position")
    p.add_argument("--axis-mode", choices=["pooled", "per-axis"], default="pooled")
    p.add_argument("--vocab", type=int, default=2048)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--k-list", type=_int_list, help="comma-separated cluster counts")
    p.add_argument("--lengths", type=_int_list, help="comma-separated sequence-length cutoffs")
    p.add_argument("--in", dest="input", help="sweep CSV produced by the VQ-VAE trainer")
    p.add_argument("--out", required=True)
    return parser


def _load_dataset(manifest_path: str) -> tuple[str, list[gio.Recording]]:
    manifest = gio.Manifest.from_file(manifest_path)
    recordings = manifest.load_recordings(Path(manifest_path).parent)
    return manifest.name, recordings


def _sequences_for(recordings, distribution: str):
    kind = DistributionKind(distribution)
    if kind is DistributionKind.POSITION:
        return [r.seq for r in recordings]
    return [derive_velocity(r.seq) for r in recordings]


def cmd_synth(args) -> None:
    out = Path(args.out)
    entries = []
    for i in range(args.recordings):
        cfg = gio.SynthConfig(
            n_fixations=args.n_fixations,
            fixation_len_range=args.fixation_len_range,
            saccade_amp_range_deg=args.saccade_amp_range,
            saccade_len_range=args.saccade_len_range,
            noise_std_deg=args.noise_std,
            sample_rate_hz=args.rate,
            seed=args.seed * 100_003 + i,
        )
        rec = gio.synth_gaze(cfg, rec_id=f"{args.name}-{i:03d}")
        rel = f"{rec.id}.csv"
        # emit float32-representable coordinates, like real eye-tracker logs
        samples = rec.seq.samples.astype(np.float32).astype(np.float64)
        lines = ["x,y"] + [f"{float(x)!r},{float(y)!r}" for x, y in samples]
        gio.atomic_write_text(out / rel, "\n".join(lines) + "\n")
        entries.append({"id": rec.id, "path": rel})
    manifest = gio.Manifest(
        name=args.name, sample_rate_hz=args.rate, x_col="x", y_col="y", t_col=None,
        recordings=entries,
    )
    manifest.save(out / "manifest.json")
    print(f"wrote {len(entries)} recordings + manifest to {out}")


def cmd_fit(args) -> None:
    _, recordings = _load_dataset(args.manifest)
    train, _test = gio.split_recordings(recordings, args.train_fraction, args.seed)
    cfg = EvalConfig(
        scheme=args.scheme,
        distribution=args.distribution,
        axis_mode=args.axis_mode,
        vocab=args.vocab,
        train_fraction=args.train_fraction,
        seed=args.seed,
    )
    tokenizer = fit_tokenizer(_sequences_for(train, args.distribution), cfg)
    gio.save_codebook(tokenizer, args.out, distribution=DistributionKind(args.distribution))
    print(f"wrote {args.scheme} codebook to {args.out}")


def _tokenizer_from_codebook(path: str) -> tuple[Tokenizer, dict]:
    artifact, doc = gio.load_codebook(path)
    if not isinstance(artifact, Tokenizer):
        raise ConfigError(f"{path} holds a {doc.get('scheme')} artifact, not a tokenizer")
    return artifact, doc


def cmd_encode(args) -> None:
    _, recordings = _load_dataset(args.manifest)
    if args.split != "all":
        train, test = gio.split_recordings(recordings, args.train_fraction, args.seed)
        recordings = train if args.split == "train" else test
    tokenizer, doc = _tokenizer_from_codebook(args.codebook)
    distribution = doc.get("distribution") or "position"
    stream = tokenizer.encode_many(_sequences_for(recordings, distribution))
    if args.bpe_table:
        table, _ = gio.load_codebook(args.bpe_table)
        if not isinstance(table, bpe_mod.MergeTable):
            raise ConfigError(f"{args.bpe_table} is not a BPE merge table")
        stream = bpe_mod.bpe_encode(stream, table)
    gio.save_stream(stream, args.out)
    print(f"wrote {len(stream)} tokens ({stream.n_sequences} sequences) to {args.out}")


def cmd_decode(args) -> None:
    tokenizer, _ = _tokenizer_from_codebook(args.codebook)
    stream = gio.load_stream(args.stream)
    if args.bpe_table:
        table, _ = gio.load_codebook(args.bpe_table)
        if not isinstance(table, bpe_mod.MergeTable):
            raise ConfigError(f"{args.bpe_table} is not a BPE merge table")
        stream = bpe_mod.bpe_decode(stream, table)
    seqs = tokenizer.decode_all(stream)
    gio.save_decoded_csv(seqs, args.out, rescale_to_deg_per_s=args.deg_per_sec)
    print(f"wrote {sum(len(s) for s in seqs)} samples to {args.out}")


def cmd_bpe_train(args) -> None:
    stream = gio.load_stream(args.stream)
    table = bpe_mod.bpe_train(stream, args.bpe_merges)
    gio.save_codebook(table, args.out)
    print(f"learned {len(table.merges)} merges, wrote {args.out}")


def cmd_eval(args) -> None:
    name, recordings = _load_dataset(args.manifest)
    cfg = EvalConfig(
        scheme=args.scheme,
        distribution=args.distribution,
        axis_mode=args.axis_mode,
        vocab=args.vocab,
        bpe=args.bpe,
        bpe_merges=args.bpe_merges,
        train_fraction=args.train_fraction,
        seed=args.seed,
        threads=args.threads,
    )
    report = evaluate_dataset(recordings, name, cfg)
    out = Path(args.out)
    gio.atomic_write_text(out / "report.csv", report.to_csv_text())
    gio.atomic_write_text(
        out / "report.json",
        json.dumps(report.to_json_obj(), sort_keys=True, indent=1) + "\n",
    )
    print(report.to_csv_text(), end="")


def cmd_sweep(args) -> None:
    if args.kind == "kmeans-k":
        if not (args.manifest and args.k_list):
            raise ConfigError("kmeans-k sweep needs --manifest and --k-list")
        _, recordings = _load_dataset(args.manifest)
        train, _ = gio.split_recordings(recordings, args.train_fraction, args.seed)
        seqs = _sequences_for(train, args.distribution)
        rows = reconstruction_sweep(
            seqs, args.k_list, AxisMode(args.axis_mode), KMeansConfig(seed=args.seed)
        )
        lines = ["k,mse,mae"] + [f"{k},{m!r},{a!r}" for k, m, a in rows]
    elif args.kind == "acc-length":
        if not (args.manifest and args.scheme and args.lengths):
            raise ConfigError("acc-length sweep needs --manifest, --scheme and --lengths")
        _, recordings = _load_dataset(args.manifest)
        cfg = EvalConfig(
            scheme=args.scheme,
            distribution="velocity",
            axis_mode=args.axis_mode,
            vocab=args.vocab,
            train_fraction=args.train_fraction,
            seed=args.seed,
        )
        rows = accumulative_error_curve(recordings, cfg, args.lengths)
        lines = ["length,acc_mse,acc_mae"] + [f"{n},{m!r},{a!r}" for n, m, a in rows]
    else:  # vqvae-ingest
        if not args.input:
            raise ConfigError("vqvae-ingest sweep needs --in")
        lines = _ingest_vqvae_sweep(args.input)
    gio.atomic_write_text(args.out, "\n".join(lines) + "\n")
    print(f"wrote {len(lines) - 1} sweep rows to {args.out}")


def _ingest_vqvae_sweep(path: str) -> list[str]:
    """Validate and normalize a codebook-size sweep CSV from the VQ-VAE trainer."""
    import pandas as pd

    try:
        frame = pd.read_csv(path)
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    needed = {"codebook_size", "mse", "mae"}
    if not needed.issubset(frame.columns):
        raise ConfigError(f"{path}: expected columns {sorted(needed)}")
    frame = frame.sort_values("codebook_size")
    lines = ["codebook_size,mse,mae"]
    for _, row in frame.iterrows():
        if row["codebook_size"] < 2:
            raise ConfigError("codebook sizes must be >= 2")
        lines.append(f"{int(row['codebook_size'])},{float(row['mse'])!r},{float(row['mae'])!r}")
    return lines


HANDLERS = {
    "synth": cmd_synth,
    "fit": cmd_fit,
    "encode": cmd_encode,
    "decode": cmd_decode,
    "bpe-train": cmd_bpe_train,
    "eval": cmd_eval,
    "sweep": cmd_sweep,
}


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        HANDLERS[args.command](args)
    except GazetokError as exc:
        print(json.dumps({"error": exc.category, "message": str(exc)}), file=sys.stderr)
        return 2 if exc.category in ("ConfigError", "InvalidConfig") else 1
    except FileNotFoundError as exc:
        print(json.dumps({"error": "IoError", "message": str(exc)}), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
