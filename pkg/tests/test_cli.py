import json

import numpy as np
import pandas as pd
import pytest

from gazetok.cli import main
from gazetok.evaluate import EvalConfig, accumulative_error_curve, evaluate_dataset
from gazetok.io import Manifest, Recording, SynthConfig, load_stream, synth_gaze


def run(argv):
    return main([str(a) for a in argv])


@pytest.fixture
def dataset_dir(tmp_path):
    out = tmp_path / "data"
    assert run(["synth", "--out", out, "--recordings", "10", "--seed", "1",
                "--noise-std", "0.0", "--n-fixations", "5"]) == 0
    return out


class TestSynthCommand:
    def test_writes_manifest_and_csvs(self, dataset_dir):
        manifest = Manifest.from_file(dataset_dir / "manifest.json")
        assert len(manifest.recordings) == 10
        recs = manifest.load_recordings(dataset_dir)
        assert all(len(r.seq) > 0 for r in recs)


class TestFitEncodeDecode:
    def test_binary_pipeline_bit_exact(self, dataset_dir, tmp_path):
        codebook = tmp_path / "binary.json"
        stream_path = tmp_path / "all.gztk1"
        decoded_csv = tmp_path / "decoded.csv"
        assert run(["fit", "--manifest", dataset_dir / "manifest.json",
                    "--scheme", "binary", "--out", codebook]) == 0
        assert run(["encode", "--manifest", dataset_dir / "manifest.json",
                    "--codebook", codebook, "--out", stream_path]) == 0
        assert run(["decode", "--codebook", codebook, "--stream", stream_path,
                    "--out", decoded_csv]) == 0

        manifest = Manifest.from_file(dataset_dir / "manifest.json")
        recs = manifest.load_recordings(dataset_dir)
        decoded = pd.read_csv(decoded_csv)
        got = decoded[["x", "y"]].to_numpy()
        want = np.concatenate([r.seq.samples for r in recs]).astype(np.float32)
        assert np.array_equal(got.astype(np.float32), want)

    def test_stream_file_loads(self, dataset_dir, tmp_path):
        codebook = tmp_path / "q.json"
        stream_path = tmp_path / "q.gztk1"
        assert run(["fit", "--manifest", dataset_dir / "manifest.json",
                    "--scheme", "quantile", "--vocab", "256", "--out", codebook]) == 0
        assert run(["encode", "--manifest", dataset_dir / "manifest.json",
                    "--codebook", codebook, "--split", "test", "--out", stream_path]) == 0
        ts = load_stream(stream_path)
        assert ts.base_vocab_size == 256
        assert ts.n_sequences == 2

    def test_bpe_train_and_apply(self, dataset_dir, tmp_path):
        codebook = tmp_path / "q.json"
        stream_path = tmp_path / "q.gztk1"
        merges = tmp_path / "merges.json"
        packed = tmp_path / "packed.gztk1"
        run(["fit", "--manifest", dataset_dir / "manifest.json",
             "--scheme", "quantile", "--vocab", "256", "--out", codebook])
        run(["encode", "--manifest", dataset_dir / "manifest.json",
             "--codebook", codebook, "--out", stream_path])
        assert run(["bpe-train", "--stream", stream_path, "--bpe-merges", "64",
                    "--out", merges]) == 0
        assert run(["encode", "--manifest", dataset_dir / "manifest.json",
                    "--codebook", codebook, "--bpe-table", merges, "--out", packed]) == 0
        assert len(load_stream(packed)) < len(load_stream(stream_path))
        decoded_csv = tmp_path / "d.csv"
        assert run(["decode", "--codebook", codebook, "--stream", packed,
                    "--bpe-table", merges, "--out", decoded_csv]) == 0

    def test_missing_manifest_is_config_error(self, tmp_path, capsys):
        rc = run(["fit", "--manifest", tmp_path / "nope.json",
                  "--scheme", "binary", "--out", tmp_path / "cb.json"])
        assert rc != 0
        err = json.loads(capsys.readouterr().err.strip())
        assert err["error"] in ("IoError", "ConfigError")


class TestEvalCommand:
    def test_kmeans_native_ratio(self, dataset_dir, tmp_path):
        out = tmp_path / "report"
        assert run(["eval", "--manifest", dataset_dir / "manifest.json",
                    "--scheme", "kmeans", "--vocab", "16", "--out", out]) == 0
        rows = json.loads((out / "report.json").read_text())["rows"]
        assert rows[0]["ratio"] == 8.0
        assert rows[0]["space_saving"] == 0.875
        csv_text = (out / "report.csv").read_text()
        assert csv_text.splitlines()[0].startswith("Tokenizer,Dataset,Distribution,BPE,MSE")

    def test_reports_embed_config(self, dataset_dir, tmp_path):
        out = tmp_path / "report"
        run(["eval", "--manifest", dataset_dir / "manifest.json",
             "--scheme", "quantile", "--vocab", "64", "--seed", "7", "--out", out])
        doc = json.loads((out / "report.json").read_text())
        assert doc["config"]["scheme"] == "quantile"
        assert doc["config"]["seed"] == 7
        assert doc["config"]["vocab"] == 64

    def test_position_rows_flag_accumulative_as_nan(self, dataset_dir, tmp_path):
        out = tmp_path / "report"
        run(["eval", "--manifest", dataset_dir / "manifest.json",
             "--scheme", "binary", "--distribution", "position", "--out", out])
        row = json.loads((out / "report.json").read_text())["rows"][0]
        assert row["acc_mse"] == "NaN" and row["acc_mae"] == "NaN"
        assert row["mse"] == 0.0 and row["mae"] == 0.0

    def test_byte_identical_across_runs_and_threads(self, dataset_dir, tmp_path):
        outputs = []
        for i, threads in enumerate([1, 1, 4]):
            out = tmp_path / f"rep{i}"
            assert run(["eval", "--manifest", dataset_dir / "manifest.json",
                        "--scheme", "quantile", "--vocab", "64", "--seed", "3",
                        "--threads", threads, "--out", out]) == 0
            outputs.append(((out / "report.csv").read_bytes(), (out / "report.json").read_bytes()))
        assert outputs[0] == outputs[1] == outputs[2]


class TestSweepCommand:
    def test_kmeans_k_sweep(self, dataset_dir, tmp_path):
        out = tmp_path / "sweep.csv"
        assert run(["sweep", "--kind", "kmeans-k", "--manifest", dataset_dir / "manifest.json",
                    "--k-list", "1,2,4", "--out", out]) == 0
        frame = pd.read_csv(out)
        assert frame["k"].tolist() == [1, 2, 4]
        assert (frame["mse"].diff().dropna() <= 1e-12).all()

    def test_acc_length_curve(self, dataset_dir, tmp_path):
        out = tmp_path / "curve.csv"
        assert run(["sweep", "--kind", "acc-length", "--manifest", dataset_dir / "manifest.json",
                    "--scheme", "quantile", "--vocab", "64",
                    "--lengths", "10,20,40", "--out", out]) == 0
        frame = pd.read_csv(out)
        assert frame["length"].tolist() == [10, 20, 40]

    def test_vqvae_ingest(self, tmp_path):
        src = tmp_path / "vq.csv"
        src.write_text("codebook_size,mse,mae\n64,0.5,0.4\n2048,0.1,0.08\n")
        out = tmp_path / "ingested.csv"
        assert run(["sweep", "--kind", "vqvae-ingest", "--in", src, "--out", out]) == 0
        frame = pd.read_csv(out)
        assert frame["codebook_size"].tolist() == [64, 2048]

    def test_sweep_without_args_fails(self, tmp_path, capsys):
        rc = run(["sweep", "--kind", "kmeans-k", "--out", tmp_path / "x.csv"])
        assert rc != 0
        assert json.loads(capsys.readouterr().err.strip())["error"] == "ConfigError"


class TestEvaluateApi:
    def recordings(self):
        return [
            Recording(id=f"r{i:02d}", seq=synth_gaze(SynthConfig(seed=200 + i)).seq)
            for i in range(10)
        ]

    def test_velocity_rows_have_accumulative_metrics(self):
        cfg = EvalConfig(scheme="quantile", distribution="velocity", vocab=64, seed=0)
        report = evaluate_dataset(self.recordings(), "synthetic", cfg)
        row = report.rows[0]
        assert row.acc_mae >= 0.0 and np.isfinite(row.acc_mae)
        assert row.ratio == 4.0

    def test_acc_curve_lengths(self):
        cfg = EvalConfig(scheme="quantile", distribution="velocity", vocab=64, seed=0)
        rows = accumulative_error_curve(self.recordings(), cfg, [10, 30, 50])
        assert [r[0] for r in rows] == [10, 30, 50]
