"""gazevq: causal VQ-VAE tokenizer trainer for 2-D gaze streams."""

from .data import NormBounds, make_windows, variant_sequences
from .export import (
    ModelMismatchError,
    decode_stream,
    encode_sequences,
    export_codebook,
    export_stream,
    load_model,
    model_hash,
    save_model,
)
from .model import SUBVECTORS_PER_STEP, VqVae, VqVaeSpec, make_spec
from .sweep import codebook_size_sweep, write_sweep_csv
from .train import TrainConfig, TrainResult, reconstruction_errors, train

__version__ = "0.1.0"
