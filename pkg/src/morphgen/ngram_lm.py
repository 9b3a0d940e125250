"""Smoothed n-gram language model for rescoring inflection alternatives.

Interpolated Kneser-Ney with one discount per order estimated from
counts-of-counts (D = n1 / (n1 + 2*n2)).  Lower orders use continuation
counts; the base distribution is uniform over the prediction vocabulary
(including UNK and the sentence-end symbol), which makes every
conditional distribution sum to exactly one and gives out-of-vocabulary
tokens nonzero mass.

Models are stored in ARPA-compatible plain text (log10 probabilities)
so outputs of third-party toolkits can be compared or imported.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Sequence

from .errors import ConfigError, CorpusError, DataError

BOS = "<s>"
EOS = "</s>"
UNK = "<unk>"

_LN10 = math.log(10.0)


@dataclass
class NGramModel:
    """ARPA-style tables: per order, gram (index tuple) -> [log10 p, log10 bow].

    A backoff weight of None means the gram is not a context of any
    higher-order entry (treated as log10 bow = 0).
    """

    order: int
    vocab: dict              # token string -> index; includes BOS/EOS/UNK
    tables: List[dict]       # tables[k] holds (k+1)-grams

    def __post_init__(self):
        self.inv_vocab = [None] * len(self.vocab)
        for tok, idx in self.vocab.items():
            self.inv_vocab[idx] = tok

    def index(self, token: str) -> int:
        return self.vocab.get(token, self.vocab[UNK])

    @property
    def prediction_vocab_size(self) -> int:
        return len(self.vocab) - 1  # everything but BOS

    def cond_log10(self, word: int, context: tuple) -> float:
        """log10 p(word | context) via the usual ARPA backoff walk."""
        if len(context) > self.order - 1:
            context = context[len(context) - self.order + 1 :]
        return _arpa_walk(self.tables, word, context)


def _arpa_walk(tables: List[dict], word: int, context: tuple) -> float:
    """Backoff evaluation: use the longest matching gram, accumulating
    backoff weights of the contexts that failed to match."""
    total = 0.0
    while True:
        entry = tables[len(context)].get(context + (word,))
        if entry is not None:
            return total + entry[0]
        if not context:
            raise DataError(f"word index {word} missing from unigram table")
        ctx_entry = tables[len(context) - 1].get(context)
        if ctx_entry is not None and ctx_entry[1] is not None:
            total += ctx_entry[1]
        context = context[1:]


def _sentence_ids(sentence: Sequence[str], vocab: dict) -> List[int]:
    unk = vocab[UNK]
    return [vocab.get(tok, unk) for tok in sentence]


def _discount(counts: Iterable[int]) -> float:
    coc = Counter(counts)
    n1, n2 = coc.get(1, 0), coc.get(2, 0)
    if n1 == 0 or n2 == 0:
        return 0.5
    return n1 / (n1 + 2.0 * n2)


def train_lm(sentences: Iterable[Sequence[str]], order: int) -> NGramModel:
    """Train an interpolated Kneser-Ney model of the given order.

    Deterministic for identical input.  Raises on an empty corpus or an
    order below 1.
    """
    if order < 1:
        raise ConfigError(f"language model order must be >= 1, got {order}")
    material = [list(s) for s in sentences]
    if not material or all(len(s) == 0 for s in material):
        raise CorpusError("cannot train a language model on an empty corpus")

    tokens = sorted({tok for sent in material for tok in sent} - {BOS, EOS, UNK})
    vocab = {BOS: 0, EOS: 1, UNK: 2}
    for tok in tokens:
        vocab[tok] = len(vocab)
    bos, eos = vocab[BOS], vocab[EOS]

    # Raw counts at the highest order from BOS-padded sentences.
    raw_top = Counter()
    for sent in material:
        seq = [bos] * (order - 1) + _sentence_ids(sent, vocab) + [eos]
        for i in range(order - 1, len(seq)):
            raw_top[tuple(seq[i - order + 1 : i + 1])] += 1

    # Continuation (adjusted) counts for the lower orders: the number of
    # distinct predecessor types.  BOS-initial grams pick theirs up from
    # the longer BOS runs in the padding.
    counts = [None] * (order + 1)
    counts[order] = raw_top
    for k in range(order - 1, 0, -1):
        lower = Counter()
        for gram in counts[k + 1]:
            lower[gram[1:]] += 1
        counts[k] = lower

    discounts = [None] + [_discount(counts[k].values()) for k in range(1, order + 1)]

    vocab_size = len(vocab)
    p0 = 1.0 / (vocab_size - 1)  # uniform over everything except BOS

    tables: List[dict] = [dict() for _ in range(order)]

    # Unigrams: an entry for every predictable word, plus a dummy for BOS.
    uni = counts[1]
    tot1 = sum(uni.values())
    ntypes1 = len(uni)
    d1 = discounts[1]
    for idx in range(vocab_size):
        if idx == bos:
            tables[0][(idx,)] = [-99.0, None]
            continue
        c = uni.get((idx,), 0)
        p = (max(c - d1, 0.0) + d1 * ntypes1 * p0) / tot1
        tables[0][(idx,)] = [math.log10(p), None]

    for k in range(2, order + 1):
        dk = discounts[k]
        by_context: dict = {}
        for gram, c in counts[k].items():
            by_context.setdefault(gram[:-1], []).append((gram[-1], c))
        for context, continuations in sorted(by_context.items()):
            tot = sum(c for _, c in continuations)
            bow = dk * len(continuations) / tot
            ctx_entry = tables[k - 2].get(context)
            if ctx_entry is None:
                # Contexts such as the all-BOS run have no own entry at the
                # lower order; create a prob-less placeholder for the bow.
                ctx_entry = [-99.0, None]
                tables[k - 2][context] = ctx_entry
            ctx_entry[1] = math.log10(bow)
            for word, c in continuations:
                lower = 10.0 ** _arpa_walk(tables, word, context[1:])
                p = max(c - dk, 0.0) / tot + bow * lower
                tables[k - 1][context + (word,)] = [math.log10(p), None]

    return NGramModel(order=order, vocab=vocab, tables=tables)


def score_sequence(model: NGramModel, tokens: Sequence[str]) -> float:
    """Natural-log probability of a token sequence.

    BOS padding on the left, EOS appended; OOV tokens scored as UNK.
    """
    ids = [model.index(tok) for tok in tokens]
    eos = model.vocab[EOS]
    bos = model.vocab[BOS]
    context = (bos,) * (model.order - 1)
    total = 0.0
    for word in ids + [eos]:
        total += model.cond_log10(word, context)
        if model.order > 1:
            context = (context + (word,))[1:]
    return total * _LN10


def perplexity(model: NGramModel, sentences: Iterable[Sequence[str]]) -> float:
    total, count = 0.0, 0
    for sent in sentences:
        total += score_sequence(model, sent) / _LN10
        count += len(sent) + 1  # EOS is predicted too
    if count == 0:
        raise CorpusError("cannot compute perplexity of an empty corpus")
    return 10.0 ** (-total / count)


def write_arpa(path: str, model: NGramModel) -> None:
    """Serialize to the plain-text ARPA format (log10, repr precision)."""
    inv = model.inv_vocab
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("\\data\\\n")
        for k in range(model.order):
            handle.write(f"ngram {k + 1}={len(model.tables[k])}\n")
        for k in range(model.order):
            handle.write(f"\n\\{k + 1}-grams:\n")
            entries = sorted(
                model.tables[k].items(),
                key=lambda kv: tuple(inv[i] for i in kv[0]),
            )
            for gram, (logp, bow) in entries:
                words = " ".join(inv[i] for i in gram)
                if bow is None:
                    handle.write(f"{logp!r}\t{words}\n")
                else:
                    handle.write(f"{logp!r}\t{words}\t{bow!r}\n")
        handle.write("\n\\end\\\n")


def read_arpa(path: str) -> NGramModel:
    with open(path, encoding="utf-8") as handle:
        lines = [line.rstrip("\n") for line in handle]
    if "\\data\\" not in lines:
        raise DataError(f"{path}: missing \\data\\ header")
    sizes = []
    i = lines.index("\\data\\") + 1
    while i < len(lines) and lines[i].strip():
        head, _, num = lines[i].partition("=")
        if not head.startswith("ngram"):
            raise DataError(f"{path}: bad data line {lines[i]!r}")
        sizes.append(int(num))
        i += 1
    order = len(sizes)
    if order < 1:
        raise DataError(f"{path}: no ngram sections declared")

    vocab = {BOS: 0, EOS: 1, UNK: 2}
    tables: List[dict] = [dict() for _ in range(order)]

    def intern(tok: str) -> int:
        if tok not in vocab:
            vocab[tok] = len(vocab)
        return vocab[tok]

    current = None
    for line in lines[i:]:
        stripped = line.strip()
        if not stripped:
            continue
        if stripped == "\\end\\":
            break
        if stripped.endswith("-grams:") and stripped.startswith("\\"):
            current = int(stripped[1:].split("-")[0]) - 1
            continue
        if current is None:
            raise DataError(f"{path}: entry outside any n-gram section")
        fields = line.split("\t")
        if len(fields) not in (2, 3):
            raise DataError(f"{path}: bad entry {line!r}")
        logp = float(fields[0])
        gram = tuple(intern(tok) for tok in fields[1].split(" "))
        if len(gram) != current + 1:
            raise DataError(f"{path}: gram {fields[1]!r} in wrong section")
        bow = float(fields[2]) if len(fields) == 3 else None
        tables[current][gram] = [logp, bow]

    for k, size in enumerate(sizes):
        if len(tables[k]) != size:
            raise DataError(
                f"{path}: section {k + 1} has {len(tables[k])} entries, header says {size}"
            )
    return NGramModel(order=order, vocab=vocab, tables=tables)
