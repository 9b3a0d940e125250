"""Full-form generation: (lemma, full tag) -> inflected surface.

Backed by a plain-text lexicon (TSV: surface TAB lemma TAB tag) with a
three-stage fallback chain: exact lookup, then alternative gender/number
slot values in descending prior probability, then the lemma itself
(typically only cities and demonyms end up there).

Lemmas may carry enclitic pronouns with a ``+`` separator
(``producir+se``): the base lemma is inflected through the lexicon and
the clitics are attached with the accentuation rule.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from . import tagset
from .errors import LexiconError
from .rules import clitic_accentuation_rule
from .tagset import GENDER, NUMBER, PLACEHOLDER, CLASS_TO_SLOT, PosTag, TaggedToken

EXACT = "exact"
INFLECTION_FALLBACK = "inflection_fallback"
LEMMA_FALLBACK = "lemma_fallback"

# Candidate slot values tried by the fallback chain.
SLOT_VALUES = {GENDER: ("M", "F", "C"), NUMBER: ("S", "P", "N")}


@dataclass
class Lexicon:
    """Immutable after load; safe to share between threads."""

    entries: Dict[Tuple[str, str], str] = field(default_factory=dict)
    by_lemma: Dict[str, List[str]] = field(default_factory=dict)
    # (category letter, task, value) -> count; empty means uniform priors
    prior_counts: Dict[Tuple[str, str, str], int] = field(default_factory=dict)

    def add(self, surface: str, lemma: str, tag: str) -> None:
        self.entries[(lemma, tag)] = surface
        self.by_lemma.setdefault(lemma, []).append(tag)

    def value_order(self, category_letter: str, task: str) -> List[str]:
        """Slot values in descending prior probability (count ties and the
        no-counts case fall back to the fixed declaration order)."""
        values = SLOT_VALUES[task]
        ranked = sorted(
            values,
            key=lambda v: (-self.prior_counts.get((category_letter, task, v), 0),
                           values.index(v)),
        )
        return ranked


def load_lexicon(path: str, priors_path: Optional[str] = None,
                 table: dict = tagset.DEFAULT_SLOT_TABLE) -> Lexicon:
    """Load a lexicon TSV; ``#`` starts a comment line.

    Duplicate (lemma, tag) keys with conflicting surfaces are an error
    naming both lines; an optional companion counts file
    (category TAB slot TAB value TAB count) supplies inflection priors.
    """
    lexicon = Lexicon()
    first_line: Dict[Tuple[str, str], int] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 3:
                raise LexiconError(f"{path}:{line_no}: expected surface<TAB>lemma<TAB>tag")
            surface, lemma, tag_raw = fields
            if not surface or not lemma:
                raise LexiconError(f"{path}:{line_no}: empty surface or lemma")
            try:
                tagset.parse_tag(tag_raw, table)
            except Exception as exc:
                raise LexiconError(f"{path}:{line_no}: {exc}") from None
            key = (lemma, tag_raw)
            if key in lexicon.entries:
                if lexicon.entries[key] != surface:
                    raise LexiconError(
                        f"{path}:{line_no}: ({lemma}, {tag_raw}) -> {surface!r} conflicts "
                        f"with line {first_line[key]} ({lexicon.entries[key]!r})"
                    )
                continue
            first_line[key] = line_no
            lexicon.add(surface, lemma, tag_raw)
    if priors_path is not None:
        lexicon.prior_counts = read_priors(priors_path)
    return lexicon


def write_lexicon(path: str, entries: Sequence[Tuple[str, str, str]]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("# surface\tlemma\ttag\n")
        for surface, lemma, tag in entries:
            handle.write(f"{surface}\t{lemma}\t{tag}\n")


def read_priors(path: str) -> Dict[Tuple[str, str, str], int]:
    counts: Dict[Tuple[str, str, str], int] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            fields = line.split("\t")
            if len(fields) != 4:
                raise LexiconError(f"{path}:{line_no}: expected category<TAB>slot<TAB>value<TAB>count")
            category, slot, value, count = fields
            if slot not in tagset.TASKS:
                raise LexiconError(f"{path}:{line_no}: bad slot {slot!r}")
            counts[(category, slot, value)] = int(count)
    return counts


def write_priors(path: str, counts: Dict[Tuple[str, str, str], int]) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("# category\tslot\tvalue\tcount\n")
        for (category, slot, value), count in sorted(counts.items()):
            handle.write(f"{category}\t{slot}\t{value}\t{count}\n")


def count_priors(sentences: Sequence[list]) -> Dict[Tuple[str, str, str], int]:
    """Per-category slot value counts over a full-form tagged corpus."""
    counts: Dict[Tuple[str, str, str], int] = {}
    for sentence in sentences:
        for token in sentence:
            for task in tagset.TASKS:
                char = token.tag.slot_char(task)
                if char is None or char == "0":
                    continue
                key = (token.tag.raw[0], task, char)
                counts[key] = counts.get(key, 0) + 1
    return counts


def _split_clitics(lemma: str) -> Tuple[str, List[str]]:
    if "+" not in lemma:
        return lemma, []
    base, *clitics = lemma.split("+")
    return base, clitics


def generate_form(lexicon: Lexicon, lemma: str, tag: PosTag) -> Tuple[str, str]:
    """Surface form for (lemma, full tag); returns (surface, provenance).

    Total: the chain ends at the lemma itself.  Clitic-carrying lemmas
    are inflected on their base and re-assembled with the accentuation
    rule applied.
    """
    base, clitics = _split_clitics(lemma)
    surface, provenance = _generate_base(lexicon, base, tag)
    if clitics:
        surface = clitic_accentuation_rule(surface, clitics)
    return surface, provenance


def _generate_base(lexicon: Lexicon, lemma: str, tag: PosTag) -> Tuple[str, str]:
    surface = lexicon.entries.get((lemma, tag.raw))
    if surface is not None:
        return surface, EXACT

    category = tag.raw[0]
    candidates: List[str] = []

    def add(raw: str) -> None:
        if raw != tag.raw and raw not in candidates:
            candidates.append(raw)

    number_alts = lexicon.value_order(category, NUMBER)
    gender_alts = lexicon.value_order(category, GENDER)
    # vary number first, then gender, then both
    if tag.number_slot is not None:
        for value in number_alts:
            add(_with(tag.raw, tag.number_slot, value))
    if tag.gender_slot is not None:
        for value in gender_alts:
            add(_with(tag.raw, tag.gender_slot, value))
    if tag.number_slot is not None and tag.gender_slot is not None:
        for n_value in number_alts:
            for g_value in gender_alts:
                add(_with(_with(tag.raw, tag.number_slot, n_value),
                          tag.gender_slot, g_value))

    for raw in candidates:
        surface = lexicon.entries.get((lemma, raw))
        if surface is not None:
            return surface, INFLECTION_FALLBACK
    return lemma, LEMMA_FALLBACK


def _with(raw: str, idx: int, value: str) -> str:
    return raw[:idx] + value + raw[idx + 1 :]


@dataclass
class RealizedToken:
    surface: str
    provenance: str
    full_tag: str
    clitics: Tuple[str, ...] = ()


def full_tag_for(token: TaggedToken, assignment: Dict[str, Optional[str]]) -> PosTag:
    """Write class values into the simplified tag's placeholder slots.

    A class is written only where the slot currently holds the task's
    placeholder; slots carrying ``0`` (attribute not applicable) stay.
    An assignment for a task whose slot does not exist at all signals an
    upstream graph-construction bug and raises.
    """
    raw = token.tag.raw
    for task, value in assignment.items():
        if value is None:
            continue
        idx = token.tag.slot(task)
        if idx is None:
            raise tagset.TagParseError(
                f"cannot write {task} class into slot-less tag {raw}"
            )
        if raw[idx] == PLACEHOLDER[task]:
            raw = _with(raw, idx, CLASS_TO_SLOT[task][value])
    if raw == token.tag.raw:
        return token.tag
    return tagset.parse_tag(raw)


def realize_sentence(lexicon: Lexicon, sentence: Sequence[TaggedToken],
                     assignments: Sequence[Dict[str, Optional[str]]]) -> List[RealizedToken]:
    """Surface tokens for a simplified sentence plus class assignments.

    ``assignments[i]`` maps task name to the class chosen for token i
    (None or missing for tokens the classifier does not touch).
    """
    if len(sentence) != len(assignments):
        raise LexiconError(
            f"sentence has {len(sentence)} tokens but {len(assignments)} assignments"
        )
    realized = []
    for token, assignment in zip(sentence, assignments):
        tag = full_tag_for(token, assignment)
        base, clitics = _split_clitics(token.lemma)
        surface, provenance = _generate_base(lexicon, base, tag)
        realized.append(RealizedToken(
            surface=surface,
            provenance=provenance,
            full_tag=tag.raw,
            clitics=tuple(clitics),
        ))
    return realized
