"""Positional EAGLES-style PoS tags with addressable gender/number slots.

A tag is a short character string whose positions encode morphological
attributes (``NCFS000``: noun, common, feminine, singular).  Which position
holds gender and which holds number depends on the category (first letter)
and is driven by a slot-scheme table so that additional tag shapes can be
configured without code changes.

The shipped default table covers the shapes used by the bundled corpora:

    category     example    gender  number
    Noun         NCFS000    2       3
    Determiner   DA0MS0     3       4
    Adjective    AQ0MS0     3       4
    Verb         VMIP3S0    6       5
    Pronoun      P00CN00    3       4

plus slot-less categories (prepositions, conjunctions, punctuation,
adverbs and a catch-all Other).

Simplification replaces informative slot values with the placeholders
``G`` (gender) and ``N`` (number).  A ``0`` in a slot position means the
attribute does not apply to that form (e.g. number of an infinitive) and
is always left untouched.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Iterable, Optional, TextIO

from .errors import TagParseError

# Simplification schemes (Table-style names: number only, gender only, both).
SCHEME_NUM = "num"
SCHEME_GEN = "gen"
SCHEME_NUMGEN = "numgen"
SCHEMES = (SCHEME_NUM, SCHEME_GEN, SCHEME_NUMGEN)

# Classification tasks.
GENDER = "gender"
NUMBER = "number"
TASKS = (GENDER, NUMBER)

# Class inventories, in tie-break order (argmax ties pick the earlier one).
GENDER_CLASSES = ("M", "F", "N")
NUMBER_CLASSES = ("S", "P", "N")
CLASSES = {GENDER: GENDER_CLASSES, NUMBER: NUMBER_CLASSES}

# Placeholder letter written into a slot by simplification.
PLACEHOLDER = {GENDER: "G", NUMBER: "N"}

# Slot characters accepted at parse time. '0' = attribute not applicable.
VALID_SLOT_CHARS = {
    GENDER: set("MFCG0"),
    NUMBER: set("SPN0"),
}

# Writing a predicted class back into a placeholder slot.  Class N maps to
# the tagset's own invariance marker: common gender C, invariable number N.
CLASS_TO_SLOT = {
    GENDER: {"M": "M", "F": "F", "N": "C"},
    NUMBER: {"S": "S", "P": "P", "N": "N"},
}

CATEGORY_BY_LETTER = {
    "N": "Noun",
    "A": "Adjective",
    "V": "Verb",
    "D": "Determiner",
    "P": "Pronoun",
    "S": "Preposition",
    "C": "Conjunction",
    "F": "Punctuation",
    "R": "Adverb",
    "Z": "Other",
    "W": "Other",
    "I": "Other",
}

# Only these categories carry gender/number slots and get classified.
CLASSIFIABLE_CATEGORIES = frozenset(
    {"Determiner", "Adjective", "Verb", "Pronoun", "Noun"}
)

MIN_TAG_LEN = 1
MAX_TAG_LEN = 8

# Default slot-scheme table, same format as the external config file:
# one line per category prefix, tab-separated gender/number index, '-' absent.
_DEFAULT_SLOT_TABLE = """
N\t2\t3
D\t3\t4
A\t3\t4
V\t6\t5
P\t3\t4
S\t-\t-
C\t-\t-
F\t-\t-
R\t-\t-
Z\t-\t-
W\t-\t-
I\t-\t-
"""


def _parse_index(field: str, line_no: int) -> Optional[int]:
    if field == "-":
        return None
    try:
        value = int(field)
    except ValueError:
        raise TagParseError(f"slot table line {line_no}: bad index {field!r}")
    if value < 0:
        raise TagParseError(f"slot table line {line_no}: negative index {value}")
    return value


def parse_slot_table(lines: Iterable[str]) -> dict:
    """Parse a slot-scheme table: ``PREFIX<TAB>gender_idx<TAB>number_idx``.

    Blank lines and lines starting with ``#`` are ignored.  Returns a map
    from category prefix letter to (gender_index, number_index), where an
    index may be None for slot-less categories.
    """
    table = {}
    for line_no, line in enumerate(lines, start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise TagParseError(
                f"slot table line {line_no}: expected 3 tab-separated fields"
            )
        prefix, gender_field, number_field = fields
        if prefix in table:
            raise TagParseError(f"slot table line {line_no}: duplicate prefix {prefix!r}")
        table[prefix] = (
            _parse_index(gender_field, line_no),
            _parse_index(number_field, line_no),
        )
    return table


def load_slot_table(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        return parse_slot_table(handle)


DEFAULT_SLOT_TABLE = parse_slot_table(_DEFAULT_SLOT_TABLE.splitlines())


@dataclass(frozen=True)
class PosTag:
    """A parsed positional tag.  ``raw`` round-trips exactly."""

    raw: str
    category: str
    gender_slot: Optional[int]
    number_slot: Optional[int]

    def slot(self, task: str) -> Optional[int]:
        return self.gender_slot if task == GENDER else self.number_slot

    def slot_char(self, task: str) -> Optional[str]:
        idx = self.slot(task)
        return None if idx is None else self.raw[idx]


def parse_tag(raw: str, table: dict = DEFAULT_SLOT_TABLE) -> PosTag:
    """Parse a bare tag string like ``NCFS000`` into a PosTag.

    Raises TagParseError for unknown category letters, out-of-range
    lengths, tags too short to cover their category's slots, and invalid
    characters in a slot position.
    """
    if not raw:
        raise TagParseError("empty tag")
    if not (MIN_TAG_LEN <= len(raw) <= MAX_TAG_LEN):
        raise TagParseError(f"tag {raw!r}: length {len(raw)} outside {MIN_TAG_LEN}..{MAX_TAG_LEN}")
    letter = raw[0]
    category = CATEGORY_BY_LETTER.get(letter)
    if category is None:
        raise TagParseError(f"tag {raw!r}: unknown category letter {letter!r}")
    if letter not in table:
        raise TagParseError(f"tag {raw!r}: no slot scheme for prefix {letter!r}")
    gender_idx, number_idx = table[letter]
    for task, idx in ((GENDER, gender_idx), (NUMBER, number_idx)):
        if idx is None:
            continue
        if idx >= len(raw):
            raise TagParseError(
                f"tag {raw!r}: too short for {task} slot at index {idx}"
            )
        if raw[idx] not in VALID_SLOT_CHARS[task]:
            raise TagParseError(
                f"tag {raw!r}: invalid {task} value {raw[idx]!r} at index {idx}"
            )
    return PosTag(raw=raw, category=category, gender_slot=gender_idx, number_slot=number_idx)


def format_tag(tag: PosTag) -> str:
    return tag.raw


def _write_slot(raw: str, idx: int, char: str) -> str:
    return raw[:idx] + char + raw[idx + 1 :]


def simplify(tag: PosTag, scheme: str) -> PosTag:
    """Replace informative slot values with neutral placeholders.

    Under ``num`` the number slot becomes ``N``, under ``gen`` the gender
    slot becomes ``G``, under ``numgen`` both.  Slots holding ``0`` (the
    attribute does not apply to this form) keep their ``0``; tags without
    the slot are returned unchanged.  Idempotent.
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    raw = tag.raw
    tasks = (NUMBER,) if scheme == SCHEME_NUM else (GENDER,) if scheme == SCHEME_GEN else (GENDER, NUMBER)
    for task in tasks:
        idx = tag.slot(task)
        if idx is not None and raw[idx] != "0":
            raw = _write_slot(raw, idx, PLACEHOLDER[task])
    if raw == tag.raw:
        return tag
    return replace(tag, raw=raw)


def scheme_tasks(scheme: str) -> tuple:
    """The classification tasks whose information a scheme removes."""
    if scheme == SCHEME_NUM:
        return (NUMBER,)
    if scheme == SCHEME_GEN:
        return (GENDER,)
    if scheme == SCHEME_NUMGEN:
        return (GENDER, NUMBER)
    raise ValueError(f"unknown scheme {scheme!r}")


def needs_classification(tag: PosTag, task: str) -> bool:
    """Whether a token with this tag gets a classifier decision for task.

    True for determiners, adjectives, verbs, pronouns and nouns whose tag
    covers the relevant slot.  A slot holding ``0`` still counts: forms
    that are invariant in gender or number are classified too, with the
    dedicated None class as their expected output.
    """
    if task not in TASKS:
        raise ValueError(f"unknown task {task!r}")
    return tag.category in CLASSIFIABLE_CATEGORIES and tag.slot(task) is not None


@dataclass(frozen=True)
class TaggedToken:
    """A lemma with its tag.  ``surface`` equals the lemma until a surface
    form has been generated for it."""

    surface: str
    lemma: str
    tag: PosTag

    def window_token(self) -> str:
        """The atomic string used as a vocabulary item: ``lemma[TAG]``."""
        return f"{self.lemma}[{self.tag.raw}]"


def parse_tagged_token(text: str, table: dict = DEFAULT_SLOT_TABLE) -> TaggedToken:
    """Parse one ``lemma[TAG]`` token, e.g. ``cuestión[NCFS000]``."""
    bracket = text.find("[")
    if bracket <= 0 or not text.endswith("]"):
        raise TagParseError(f"token {text!r}: expected lemma[TAG]")
    lemma = text[:bracket]
    raw_tag = text[bracket + 1 : -1]
    if "[" in raw_tag or "]" in raw_tag:
        raise TagParseError(f"token {text!r}: malformed brackets")
    try:
        tag = parse_tag(raw_tag, table)
    except TagParseError as exc:
        raise TagParseError(f"token {text!r}: {exc}") from None
    return TaggedToken(surface=lemma, lemma=lemma, tag=tag)


def format_tagged_token(token: TaggedToken) -> str:
    return token.window_token()


def parse_tagged_sentence(line: str, table: dict = DEFAULT_SLOT_TABLE) -> list:
    return [parse_tagged_token(tok, table) for tok in line.split()]


def read_tagged_file(path: str, table: dict = DEFAULT_SLOT_TABLE) -> list:
    """Read a tagged corpus: one sentence per line, space-separated
    ``lemma[TAG]`` tokens.  Returns a list of sentences (token lists)."""
    sentences = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                sentences.append(parse_tagged_sentence(line, table))
            except TagParseError as exc:
                raise TagParseError(f"{path}:{line_no}: {exc}") from None
    return sentences


def write_tagged_file(path: str, sentences: Iterable[list]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        _write_tagged(handle, sentences)


def _write_tagged(handle: TextIO, sentences: Iterable[list]) -> None:
    for sentence in sentences:
        handle.write(" ".join(format_tagged_token(tok) for tok in sentence))
        handle.write("\n")


def simplify_token(token: TaggedToken, scheme: str) -> TaggedToken:
    simplified = simplify(token.tag, scheme)
    if simplified is token.tag:
        return token
    return TaggedToken(surface=token.lemma, lemma=token.lemma, tag=simplified)


def simplify_sentence(sentence: list, scheme: str) -> list:
    return [simplify_token(tok, scheme) for tok in sentence]


def simplify_corpus(sentences: Iterable[list], scheme: str) -> list:
    return [simplify_sentence(s, scheme) for s in sentences]
