"""morphgen: morphology generation for gender/number-simplified text.

The package turns PoS-tagged, morphologically neutralized input
(``cuestión[NCGN000]``) back into fully inflected surface text by

1. predicting the missing gender/number classes with a windowed neural
   classifier (embedding, convolution, max pooling, LSTM, softmax),
2. rescoring class alternatives with k-best paths over a layered
   sentence graph combined with an n-gram language model,
3. repairing orthography (conjunction allomorphy, clitic accentuation),
4. generating surface forms from a lexicon with a fallback chain.
"""

from . import (
    classifier,
    corpus,
    fullform,
    ngram_lm,
    pipeline,
    rescoring,
    rules,
    synthesis,
    tagset,
)
from .errors import (
    ConfigError,
    CorpusError,
    DataError,
    LexiconError,
    MorphgenError,
    NumericalError,
    TagParseError,
)

__version__ = "0.1.0"

__all__ = [
    "classifier", "corpus", "fullform", "ngram_lm", "pipeline",
    "rescoring", "rules", "synthesis", "tagset",
    "MorphgenError", "DataError", "TagParseError", "CorpusError",
    "LexiconError", "ConfigError", "NumericalError",
    "__version__",
]
