from .base import Tokenizer
from .binary import BinaryTokenizer
from .kmeans import KMeansConfig, KMeansTokenizer
from .mulaw import MuLawTokenizer
from .quantile import QuantileTokenizer

SCHEMES: dict[str, type[Tokenizer]] = {
    cls.scheme: cls
    for cls in (BinaryTokenizer, MuLawTokenizer, QuantileTokenizer, KMeansTokenizer)
}

__all__ = [
    "Tokenizer",
    "BinaryTokenizer",
    "MuLawTokenizer",
    "QuantileTokenizer",
    "KMeansTokenizer",
    "KMeansConfig",
    "SCHEMES",
]
