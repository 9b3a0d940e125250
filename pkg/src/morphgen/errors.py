"""Exception hierarchy shared by all morphgen modules.

The CLI maps these onto exit codes: DataError (and subclasses) exit with 2,
NumericalError with 3.
"""


class MorphgenError(Exception):
    """Base class for all errors raised by this package."""


class DataError(MorphgenError):
    """Malformed or inconsistent input data (corpora, configs, lexica)."""


class TagParseError(DataError):
    """A PoS tag or tagged token could not be parsed."""


class CorpusError(DataError):
    """Corpus-level problem: empty corpus, misaligned views, bad labels."""


class LexiconError(DataError):
    """Lexicon file problem, e.g. conflicting duplicate entries."""


class ConfigError(DataError):
    """Invalid pipeline or grammar configuration."""


class NumericalError(MorphgenError):
    """Non-finite value encountered during training or inference."""
