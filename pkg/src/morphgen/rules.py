"""Orthographic repair rules applied after full-form generation.

Two rules cover cases the classifiers cannot see:

1. Conjunction allomorphy: ``y`` becomes ``e`` before a word starting with
   the /i/ sound (``i``, ``í``, ``hi`` not followed by ``e``), and ``o``
   becomes ``u`` before the /o/ sound (``o``, ``ó``, ``ho``).

2. Clitic accentuation: attaching enclitic pronouns to a verb form can
   push the stressed syllable to antepenultimate position or earlier
   (esdrújula), which in Spanish always takes a written accent:
   diga + me -> dígame, produce + se -> prodúcese, but da + me -> dame.

The accent logic needs a syllabifier; the one here implements onset
maximization with the usual diphthong/hiatus, digraph and consonant
cluster handling.  ``h`` is treated as a plain consonant, so the rare
diphthong-across-h words (ahumar) gain a syllable; stress placement on
verb + clitic combinations is unaffected.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List, Sequence, Tuple

from .errors import DataError

# Closed set of Spanish enclitic pronouns.
CLITICS = frozenset(
    {"me", "te", "se", "le", "les", "lo", "los", "la", "las", "nos", "os"}
)

_VOWELS = set("aeiouáéíóúü")
# Open (strong) vowels; two adjacent strong vowels form a hiatus.
_STRONG = set("aeoáéó")
# Closed (weak) vowels; a written accent on a weak vowel breaks the diphthong.
_WEAK = set("iuü")
_ACCENTED_WEAK = set("íú")
_ACCENTED = set("áéíóú")

# Consonant pairs that always stay together as an onset.
_CLUSTERS = {
    "pr", "br", "tr", "dr", "cr", "gr", "fr", "kr",
    "pl", "bl", "cl", "gl", "fl", "kl",
}
# Digraphs behaving as single consonants.
_DIGRAPHS = {"ch", "ll", "rr"}

_ACCENT_MAP = {"a": "á", "e": "é", "i": "í", "o": "ó", "u": "ú"}

_LETTERS = set("abcdefghijklmnñopqrstuvwxyzáéíóúü")


class RuleError(DataError):
    """Invalid input to an orthographic rule."""


@dataclass
class RuleReport:
    """Trace of rule applications: (token_id, rule_name, before, after)."""

    applied: List[Tuple[int, str, str, str]] = field(default_factory=list)

    def record(self, token_id: int, rule: str, before: str, after: str) -> None:
        if before != after:
            self.applied.append((token_id, rule, before, after))


def _tokenize_units(word: str) -> List[str]:
    """Split a word into orthographic units: ch/ll/rr, and qu/gu before
    e or i, count as single consonants."""
    low = word.lower()
    units = []
    i = 0
    while i < len(word):
        pair = low[i : i + 2]
        if pair in _DIGRAPHS:
            units.append(word[i : i + 2])
            i += 2
            continue
        if pair in ("qu", "gu") and i + 2 < len(word) and low[i + 2] in "eiéí":
            units.append(word[i : i + 2])
            i += 2
            continue
        units.append(word[i])
        i += 1
    return units


def _vowel_flags(units: List[str]) -> List[bool]:
    flags = []
    for pos, unit in enumerate(units):
        low = unit.lower()
        if low in ("qu", "gu") or len(low) > 1:
            flags.append(False)
        elif low == "y":
            # Word-final y after a vowel is /i/ (estoy, hoy); the bare
            # word "y" is vocalic too.  Elsewhere y is a consonant.
            at_end = pos == len(units) - 1
            prev_vowel = pos > 0 and units[pos - 1][-1].lower() in _VOWELS
            flags.append(at_end and (prev_vowel or len(units) == 1))
        else:
            flags.append(low in _VOWELS)
    return flags


def _norm_vowel(ch: str) -> str:
    ch = ch.lower()
    return "i" if ch == "y" else ch


def _diphthong(a: str, b: str) -> bool:
    """Whether two adjacent vowels share a syllable."""
    a, b = _norm_vowel(a), _norm_vowel(b)
    if a in _WEAK and b in _WEAK:
        return True
    if a in _ACCENTED_WEAK or b in _ACCENTED_WEAK:
        return False
    return a in _WEAK or b in _WEAK


def _onset_split(consonants: List[str]) -> int:
    """How many intervocalic consonant units stay with the left syllable."""
    n = len(consonants)
    if n <= 1:
        return 0
    last_two = (consonants[-2] + consonants[-1]).lower()
    if len(last_two) == 2 and last_two in _CLUSTERS:
        return n - 2
    return n - 1


def syllabify(word: str) -> List[str]:
    """Standard Spanish syllabification of a single word.

    Onset maximization, strong-strong hiatus, accented-weak hiatus,
    inseparable clusters (pr, bl, ...) and digraphs (ch, ll, rr) intact.
    Concatenating the result reproduces the input exactly.
    """
    if not word:
        raise RuleError("cannot syllabify an empty string")
    for ch in word:
        if ch.lower() not in _LETTERS:
            raise RuleError(f"cannot syllabify {word!r}: non-letter {ch!r}")
    units = _tokenize_units(word)
    is_vowel = _vowel_flags(units)
    if not any(is_vowel):
        return [word]

    # Nucleus spans as [start, end) unit ranges, splitting hiatuses and
    # capping nuclei at triphthongs (weak + strong + weak).
    nuclei = []
    i = 0
    while i < len(units):
        if not is_vowel[i]:
            i += 1
            continue
        start = i
        i += 1
        while i < len(units) and is_vowel[i]:
            size = i - start
            if size == 1:
                if not _diphthong(units[i - 1], units[i]):
                    break
            elif size == 2:
                a, b, c = (_norm_vowel(units[j]) for j in (start, start + 1, i))
                if not (a in _WEAK and b in _STRONG and c in _WEAK):
                    break
            else:
                break
            i += 1
        nuclei.append((start, i))

    starts = [0]
    for k in range(1, len(nuclei)):
        cons_start = nuclei[k - 1][1]
        consonants = units[cons_start : nuclei[k][0]]
        starts.append(cons_start + _onset_split(consonants))
    ends = starts[1:] + [len(units)]
    return ["".join(units[s:e]) for s, e in zip(starts, ends)]


def _default_stress_index(syllables: Sequence[str], word: str) -> int:
    """Index of the stressed syllable under standard Spanish rules."""
    for i, syl in enumerate(syllables):
        if any(ch in _ACCENTED for ch in syl.lower()):
            return i
    if len(syllables) == 1:
        return 0
    final = word[-1].lower()
    if final in "aeiouns":
        return len(syllables) - 2
    return len(syllables) - 1


def _accent_target(syllable: str) -> int:
    """Character offset within the syllable of the vowel that would carry
    a written accent: the strong vowel of the nucleus, or the last weak
    vowel when the nucleus is all-weak (ui/iu)."""
    units = _tokenize_units(syllable)
    flags = _vowel_flags(units)
    positions = []
    offset = 0
    for unit, flag in zip(units, flags):
        if flag:
            positions.append((offset, unit))
        offset += len(unit)
    if not positions:
        raise RuleError(f"syllable {syllable!r} has no vowel")
    for off, unit in positions:
        if _norm_vowel(unit) in _STRONG or unit.lower() in _ACCENTED_WEAK:
            return off
    return positions[-1][0]


def _add_accent(word: str, char_index: int) -> str:
    ch = word[char_index]
    low = ch.lower()
    if low in _ACCENTED:
        return word
    accented = _ACCENT_MAP.get(_norm_vowel(low))
    if accented is None:
        raise RuleError(f"cannot accent {ch!r} in {word!r}")
    if ch.isupper():
        accented = accented.upper()
    return word[:char_index] + accented + word[char_index + 1 :]


def clitic_accentuation_rule(verb_form: str, clitics: Sequence[str]) -> str:
    """Attach enclitic pronouns and add the accent Spanish requires.

    Stress stays on the verb's originally stressed syllable (clitics are
    unstressed); if it ends up antepenultimate or earlier in the combined
    word, an acute accent is written there, otherwise the plain
    concatenation is returned.  Clitics outside the closed pronoun set
    are an error.
    """
    for clitic in clitics:
        if clitic not in CLITICS:
            raise RuleError(f"{clitic!r} is not a Spanish enclitic pronoun")
    word = verb_form + "".join(clitics)

    verb_syllables = syllabify(verb_form)
    stress_idx = _default_stress_index(verb_syllables, verb_form)
    stress_char = sum(len(s) for s in verb_syllables[:stress_idx])
    stress_char += _accent_target(verb_syllables[stress_idx])

    syllables = syllabify(word)
    acc, holder = 0, len(syllables) - 1
    for i, syl in enumerate(syllables):
        if acc <= stress_char < acc + len(syl):
            holder = i
            break
        acc += len(syl)
    if len(syllables) - holder < 3:
        return word
    target = sum(len(s) for s in syllables[:holder]) + _accent_target(syllables[holder])
    return _add_accent(word, target)


def _starts_i_sound(word: str) -> bool:
    low = word.lower()
    if low.startswith("hi"):
        return not low.startswith("hie")
    return low.startswith(("i", "í"))


def _starts_o_sound(word: str) -> bool:
    return word.lower().startswith(("o", "ó", "ho"))


def conjunction_rule(tokens: Sequence[str]) -> Tuple[List[str], RuleReport]:
    """Rewrite the conjunctions y -> e and o -> u before /i/ and /o/.

    Only tokens that are exactly ``y``/``o`` (case-insensitive) followed
    by a triggering word change; all other tokens stay byte-identical.
    The last token never changes (there is no following word).
    """
    report = RuleReport()
    out = list(tokens)
    for i in range(len(out) - 1):
        tok = out[i]
        low = tok.lower()
        if low == "y" and _starts_i_sound(out[i + 1]):
            new = "E" if tok == "Y" else "e"
        elif low == "o" and _starts_o_sound(out[i + 1]):
            new = "U" if tok == "O" else "u"
        else:
            continue
        report.record(i, "conjunction", tok, new)
        out[i] = new
    return out, report


def write_rule_trace(path: str, reports: Sequence[Tuple[int, RuleReport]]) -> None:
    """TSV rule trace: sentence_id, token_id, rule, before, after."""
    with open(path, "w", encoding="utf-8") as handle:
        handle.write("sentence_id\ttoken_id\trule\tbefore\tafter\n")
        for sid, report in reports:
            for token_id, rule, before, after in report.applied:
                handle.write(f"{sid}\t{token_id}\t{rule}\t{before}\t{after}\n")
