"""Vocabularies, center-anchored windows and labeled datasets.

Window features follow the fixed-size, center-anchored scheme: the token
to classify sits in the middle, out-of-sentence positions are padded, and
every token type appears in windows (only determiners, adjectives, verbs,
pronouns and nouns become classification *targets*).  A window token is
the simplified ``lemma[TAG]`` string treated atomically.
"""

from __future__ import annotations

import hashlib
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, List, Optional

import numpy as np

from . import tagset
from .errors import CorpusError
from .tagset import GENDER, NUMBER, TaggedToken

PAD = 0
UNK = 1
PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"


@dataclass(frozen=True)
class Vocabulary:
    """Frequency-ranked token map with reserved PAD=0 and UNK=1 indices."""

    word_to_index: dict
    size_limit: int

    @property
    def size(self) -> int:
        return len(self.word_to_index) + 2

    def lookup(self, token: str) -> int:
        return self.word_to_index.get(token, UNK)

    def content_hash(self) -> str:
        lines = [f"{idx}\t{tok}" for tok, idx in sorted(self.word_to_index.items(), key=lambda kv: kv[1])]
        digest = hashlib.sha256("\n".join(lines).encode("utf-8"))
        return digest.hexdigest()


def build_vocabulary(sentences: Iterable[List[TaggedToken]], size_limit: int) -> Vocabulary:
    """Build a vocabulary over window tokens of a (simplified) corpus.

    Keeps the ``size_limit`` most frequent tokens; ties are broken
    lexicographically so the result is deterministic for identical input.
    """
    if size_limit < 1:
        raise CorpusError(f"vocabulary size limit must be >= 1, got {size_limit}")
    counts = Counter()
    seen_any = False
    for sentence in sentences:
        for token in sentence:
            seen_any = True
            counts[token.window_token()] += 1
    if not seen_any:
        raise CorpusError("cannot build a vocabulary from an empty corpus")
    ranked = sorted(counts.items(), key=lambda kv: (-kv[1], kv[0]))
    kept = [tok for tok, _ in ranked[:size_limit]]
    word_to_index = {tok: i + 2 for i, tok in enumerate(kept)}
    return Vocabulary(word_to_index=word_to_index, size_limit=size_limit)


def write_vocabulary(path: str, vocab: Vocabulary) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"# morphgen vocabulary v1\tsize_limit={vocab.size_limit}\n")
        for tok, idx in sorted(vocab.word_to_index.items(), key=lambda kv: kv[1]):
            handle.write(f"{idx}\t{tok}\n")


def read_vocabulary(path: str) -> Vocabulary:
    word_to_index = {}
    size_limit = None
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        if not header.startswith("# morphgen vocabulary v1"):
            raise CorpusError(f"{path}: not a morphgen vocabulary file")
        for part in header.strip().split("\t")[1:]:
            key, _, value = part.partition("=")
            if key == "size_limit":
                size_limit = int(value)
        if size_limit is None:
            raise CorpusError(f"{path}: missing size_limit in header")
        for line_no, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            idx_str, _, tok = line.partition("\t")
            idx = int(idx_str)
            if idx < 2:
                raise CorpusError(f"{path}:{line_no}: index {idx} collides with PAD/UNK")
            word_to_index[tok] = idx
    return Vocabulary(word_to_index=word_to_index, size_limit=size_limit)


@dataclass(frozen=True)
class Window:
    """Fixed odd-length run of vocabulary indices centered on the target."""

    indices: tuple

    @property
    def length(self) -> int:
        return len(self.indices)

    @property
    def center(self) -> int:
        return self.indices[(len(self.indices) - 1) // 2]


def extract_window(sentence: List[TaggedToken], position: int, length: int,
                   vocab: Vocabulary) -> Window:
    """Window of ``length`` vocabulary indices around ``position``.

    Out-of-sentence offsets are PAD.  ``length`` must be odd.
    """
    if length % 2 == 0 or length < 1:
        raise CorpusError(f"window length must be odd and positive, got {length}")
    if not 0 <= position < len(sentence):
        raise CorpusError(f"position {position} outside sentence of {len(sentence)} tokens")
    half = (length - 1) // 2
    indices = []
    for offset in range(-half, half + 1):
        j = position + offset
        if 0 <= j < len(sentence):
            indices.append(vocab.lookup(sentence[j].window_token()))
        else:
            indices.append(PAD)
    return Window(indices=tuple(indices))


def extract_label(token: TaggedToken, task: str) -> str:
    """Gold class for a token, read from its full (unsimplified) tag.

    M/F and S/P map to themselves; invariance markers (common gender C,
    invariable number N, not-applicable 0) map to class N.
    """
    if not tagset.needs_classification(token.tag, task):
        raise CorpusError(
            f"token {token.window_token()} has no {task} slot to label"
        )
    char = token.tag.slot_char(task)
    if task == GENDER:
        return char if char in ("M", "F") else "N"
    return char if char in ("S", "P") else "N"


@dataclass(frozen=True)
class LabeledExample:
    window: Window
    label: str
    task: str
    sentence_id: int
    token_id: int


def make_dataset(full_sentences: List[list], task: str, scheme: str,
                 window_length: int, vocab: Vocabulary,
                 simplified_sentences: Optional[List[list]] = None) -> List[LabeledExample]:
    """One example per classifiable token: window from the simplified view,
    gold label from the full view.  Order is deterministic (corpus order).
    """
    if simplified_sentences is None:
        simplified_sentences = tagset.simplify_corpus(full_sentences, scheme)
    if len(simplified_sentences) != len(full_sentences):
        raise CorpusError(
            f"full/simplified sentence counts differ: "
            f"{len(full_sentences)} vs {len(simplified_sentences)}"
        )
    examples = []
    for sid, (full, simple) in enumerate(zip(full_sentences, simplified_sentences)):
        if len(full) != len(simple):
            raise CorpusError(
                f"sentence {sid}: full has {len(full)} tokens, simplified {len(simple)}"
            )
        for tid, token in enumerate(full):
            if not tagset.needs_classification(token.tag, task):
                continue
            window = extract_window(simple, tid, window_length, vocab)
            examples.append(LabeledExample(
                window=window,
                label=extract_label(token, task),
                task=task,
                sentence_id=sid,
                token_id=tid,
            ))
    return examples


def dataset_arrays(examples: List[LabeledExample], task: str):
    """Pack examples into (windows int64 [N, n], class indices int64 [N])."""
    classes = tagset.CLASSES[task]
    if not examples:
        raise CorpusError("empty dataset")
    n = examples[0].window.length
    windows = np.empty((len(examples), n), dtype=np.int64)
    labels = np.empty(len(examples), dtype=np.int64)
    for i, ex in enumerate(examples):
        windows[i] = ex.window.indices
        labels[i] = classes.index(ex.label)
    return windows, labels


DATASET_MAGIC = "# morphgen dataset v1"


def write_dataset(path: str, examples: List[LabeledExample], task: str,
                  window_length: int, vocab_hash: str) -> None:
    """Cache file: versioned header, then one record per example:
    ``sentence_id TAB token_id TAB label TAB idx1,idx2,...``."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(f"{DATASET_MAGIC}\ttask={task}\twindow={window_length}\tvocab={vocab_hash}\n")
        for ex in examples:
            idx = ",".join(str(i) for i in ex.window.indices)
            handle.write(f"{ex.sentence_id}\t{ex.token_id}\t{ex.label}\t{idx}\n")


def read_dataset(path: str):
    """Returns (examples, task, window_length, vocab_hash)."""
    examples = []
    with open(path, encoding="utf-8") as handle:
        header = handle.readline().rstrip("\n")
        if not header.startswith(DATASET_MAGIC):
            raise CorpusError(f"{path}: not a morphgen dataset file")
        meta = dict(part.partition("=")[::2] for part in header.split("\t")[1:])
        task = meta.get("task")
        if task not in tagset.TASKS:
            raise CorpusError(f"{path}: bad task {task!r} in header")
        window_length = int(meta["window"])
        vocab_hash = meta.get("vocab", "")
        for line_no, line in enumerate(handle, start=2):
            line = line.rstrip("\n")
            if not line:
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise CorpusError(f"{path}:{line_no}: expected 4 fields")
            sid, tid, label, idx_str = fields
            if label not in tagset.CLASSES[task]:
                raise CorpusError(f"{path}:{line_no}: bad label {label!r}")
            indices = tuple(int(i) for i in idx_str.split(","))
            if len(indices) != window_length:
                raise CorpusError(f"{path}:{line_no}: window length mismatch")
            examples.append(LabeledExample(
                window=Window(indices=indices),
                label=label,
                task=task,
                sentence_id=int(sid),
                token_id=int(tid),
            ))
    return examples, task, window_length, vocab_hash


def read_text_file(path: str) -> List[List[str]]:
    """Plain surface corpus: one sentence per line, space-separated tokens."""
    sentences = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line:
                sentences.append(line.split())
    return sentences


def write_text_file(path: str, sentences: Iterable[List[str]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for sentence in sentences:
            handle.write(" ".join(sentence))
            handle.write("\n")
