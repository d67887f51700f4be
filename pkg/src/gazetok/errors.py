"""Exception hierarchy.

Every error carries a stable ``category`` string so the CLI can emit
machine-readable error reports without parsing messages.
"""


class GazetokError(Exception):
    """Base class for all errors raised by this package."""

    category = "Error"


# --- sequence calculus ---

class SequenceTooShortError(GazetokError):
    category = "SequenceTooShort"


class NonFiniteDataError(GazetokError):
    category = "NonFiniteData"


# --- tokenizers ---

class MalformedStreamError(GazetokError):
    category = "MalformedStream"


class InvalidFloatError(GazetokError):
    """Decoded bytes form NaN/Inf samples (possible on generated streams)."""

    category = "InvalidFloat"


class EmptyDataError(GazetokError):
    category = "EmptyData"


class InvalidBinCountError(GazetokError):
    category = "InvalidBinCount"


class TokenOutOfRangeError(GazetokError):
    category = "TokenOutOfRange"


class TooFewDistinctPointsError(GazetokError):
    category = "TooFewDistinctPoints"


# --- bpe ---

class EmptyCorpusError(GazetokError):
    category = "EmptyCorpus"


class VocabMismatchError(GazetokError):
    category = "VocabMismatch"


class UnknownTokenError(GazetokError):
    category = "UnknownToken"


class ZeroLengthError(GazetokError):
    category = "ZeroLength"


# --- metrics ---

class LengthMismatchError(GazetokError):
    category = "LengthMismatch"


class EmptySequenceError(GazetokError):
    category = "EmptySequence"


class BoundsMismatchError(GazetokError):
    category = "BoundsMismatch"


class EmptyHistogramError(GazetokError):
    category = "EmptyHistogram"


# --- dataset io ---

class MissingColumnError(GazetokError):
    category = "MissingColumn"


class NoValidRowsError(GazetokError):
    category = "NoValidRows"


class BadMagicError(GazetokError):
    category = "BadMagic"


class TruncatedPayloadError(GazetokError):
    category = "TruncatedPayload"


class InvalidConfigError(GazetokError):
    category = "InvalidConfig"


class InvalidFractionError(GazetokError):
    category = "InvalidFraction"


# --- cli ---

class ConfigError(GazetokError):
    category = "ConfigError"


class IoError(GazetokError):
    category = "IoError"
