"""gazevq command line: train, encode, decode and sweep.

Reads datasets through gazetok manifests and writes every artifact in the
shared interchange formats (codebook JSON, GZTK1 streams, sweep CSV).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from gazetok.io import Manifest, load_stream, save_decoded_csv

from .data import make_windows, variant_sequences
from .export import (
    decode_stream,
    export_codebook,
    export_stream,
    load_model,
    save_model,
)
from .model import make_spec
from .sweep import codebook_size_sweep, write_sweep_csv
from .train import TrainConfig, reconstruction_errors, train


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gazevq", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("train", help="train a VQ-VAE tokenizer and export its codebook")
    p.add_argument("--manifest", required=True)
    p.add_argument("--variant", choices=["position", "velocity"], default="position")
    p.add_argument("--preset", choices=["faithful", "tiny"], default="tiny")
    p.add_argument("--codebook-size", type=int, default=2048)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("encode", help="encode manifest recordings with a trained model")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("decode", help="decode a GZTK1 stream back to CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--stream", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("sweep", help="codebook-size sweep to plot-data CSV")
    p.add_argument("--manifest", required=True)
    p.add_argument("--variant", choices=["position", "velocity"], default="position")
    p.add_argument("--sizes", required=True, help="comma-separated codebook sizes")
    p.add_argument("--epochs", type=int, default=300)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    return parser


def _windows_from_manifest(manifest_path: str, variant: str):
    manifest = Manifest.from_file(manifest_path)
    recordings = manifest.load_recordings(Path(manifest_path).parent)
    seqs = variant_sequences(recordings, variant)
    windows, bounds = make_windows(seqs, window_len=400)
    return seqs, windows, bounds


def cmd_train(args) -> None:
    _, windows, bounds = _windows_from_manifest(args.manifest, args.variant)
    spec = make_spec(args.variant, args.preset, args.codebook_size)
    cfg = TrainConfig(epochs=args.epochs, batch_size=args.batch_size, seed=args.seed)
    result = train(spec, windows, cfg)
    mse, mae = reconstruction_errors(result.model, windows)

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    save_model(result.model, bounds, out / "model.pt")
    export_codebook(result.model, bounds, cfg, out / "codebook.json")
    print(
        f"trained {args.variant}/{args.preset} for {args.epochs} epochs: "
        f"loss {result.final_loss:.6f}, recon mse {mse:.6f} mae {mae:.6f}, "
        f"replaced {result.replaced_entries} dead entries"
    )


def cmd_encode(args) -> None:
    model, bounds = load_model(args.model)
    manifest = Manifest.from_file(args.manifest)
    recordings = manifest.load_recordings(Path(args.manifest).parent)
    seqs = variant_sequences(recordings, model.spec.variant)
    ts = export_stream(model, bounds, seqs, args.out)
    print(f"wrote {len(ts)} tokens ({ts.n_sequences} sequences) to {args.out}")


def cmd_decode(args) -> None:
    model, bounds = load_model(args.model)
    ts = load_stream(args.stream)
    seqs = decode_stream(model, bounds, ts)
    save_decoded_csv(seqs, args.out)
    print(f"wrote {sum(len(s) for s in seqs)} samples to {args.out}")


def cmd_sweep(args) -> None:
    sizes = [int(v) for v in args.sizes.split(",")]
    _, windows, _ = _windows_from_manifest(args.manifest, args.variant)
    rows = codebook_size_sweep(
        windows, sizes, variant=args.variant, cfg=TrainConfig(epochs=args.epochs, seed=args.seed)
    )
    write_sweep_csv(rows, args.out)
    print(f"wrote {len(rows)} sweep rows to {args.out}")


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {
        "train": cmd_train,
        "encode": cmd_encode,
        "decode": cmd_decode,
        "sweep": cmd_sweep,
    }
    try:
        handlers[args.command](args)
    except Exception as exc:  # surface a short category for scripting
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
