"""gazetok: tokenization of continuous 2-D gaze streams.

Five discretization schemes over a shared token-stream currency, BPE
compression, and an evaluation suite covering reconstruction error,
accumulative drift, DTW and histogram divergence.
"""

from .bpe import CompressionStats, MergeTable, bpe_decode, bpe_encode, bpe_train, compression_stats
from .core import (
    AxisMode,
    Bounds,
    DistributionKind,
    GazeSample,
    GazeSequence,
    TokenStream,
    derive_velocity,
    integrate_positions,
    min_max_normalize,
)
from .tokenizers import (
    BinaryTokenizer,
    KMeansConfig,
    KMeansTokenizer,
    MuLawTokenizer,
    QuantileTokenizer,
    Tokenizer,
)

__version__ = "0.1.0"

__all__ = [
    "AxisMode",
    "BinaryTokenizer",
    "Bounds",
    "CompressionStats",
    "DistributionKind",
    "GazeSample",
    "GazeSequence",
    "KMeansConfig",
    "KMeansTokenizer",
    "MergeTable",
    "MuLawTokenizer",
    "QuantileTokenizer",
    "TokenStream",
    "Tokenizer",
    "bpe_decode",
    "bpe_encode",
    "bpe_train",
    "compression_stats",
    "derive_velocity",
    "integrate_positions",
    "min_max_normalize",
]
