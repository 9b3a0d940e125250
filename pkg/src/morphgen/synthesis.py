"""Synthetic Spanish-like agreement corpus for desk-scale verification.

A small weighted grammar produces noun-phrase/verb-phrase sentences with
enforced agreement (determiner-noun-adjective concord, subject-verb
number concord), so gold labels stay recoverable from context by
construction:

* a plural NP always carries a numeral determiner (los dos temas), so
  number is visible in any window that covers the NP;
* noun gender is lexical, and common-gender nouns use a fixed article
  gender per lemma;
* bare nouns after prepositions or as objects (de sesiones, examina
  informes) have no agreeing neighbors: their number is deliberately
  ambiguous at a configurable rate, which is the headroom k-best
  rescoring gets to exploit;
* coordinated bare-noun subjects take a plural verb with ``y`` and a
  singular verb with ``o``, and i-/o-initial nouns exercise the
  conjunction allomorphy rule;
* reflexive verbs contribute ``se`` pronoun tokens, and infinitive or
  gerund forms with attached clitics (producir+se) exercise the
  accentuation rule.

The grammar config is plain JSON: lexical entries (forms are derived by
regular Spanish morphology unless overridden) plus construction weights.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from importlib import resources
from typing import Dict, List, Optional, Sequence, Tuple

from . import rules, tagset
from .errors import ConfigError
from .tagset import PosTag, TaggedToken

GRAMMAR_RESOURCE = "grammar_es.json"

_WEIGHT_KEYS = (
    "plural", "adjective", "coordination", "coordination_or",
    "determiner_indef", "determiner_demo",
    "object", "object_bare", "pp", "pp_bare", "bare_plural",
    "reflexive", "infinitive", "infinitive_reflexive",
    "gerund", "copula", "adverb",
)


def pluralize(word: str) -> str:
    """Regular Spanish noun/adjective plural."""
    if word.endswith("ión"):
        return word[:-3] + "iones"
    for ending, repl in (("án", "anes"), ("én", "enes"), ("ín", "ines"),
                         ("ón", "ones"), ("ún", "unes")):
        if word.endswith(ending):
            return word[: -len(ending)] + repl
    if word.endswith("z"):
        return word[:-1] + "ces"
    if word[-1] in "aeiou":
        return word + "s"
    return word + "es"


def verb_forms(lemma: str, overrides: Dict[str, str]) -> Dict[str, str]:
    """Third-person present forms, infinitive and gerund for a regular
    -ar/-er/-ir verb; irregulars supply overrides."""
    stem, conj = lemma[:-2], lemma[-2:]
    if conj == "ar":
        derived = {"pres3s": stem + "a", "pres3p": stem + "an", "gerund": stem + "ando"}
    elif conj in ("er", "ir"):
        derived = {"pres3s": stem + "e", "pres3p": stem + "en", "gerund": stem + "iendo"}
    else:
        raise ConfigError(f"verb lemma {lemma!r} is not an -ar/-er/-ir infinitive")
    derived.update(overrides)
    derived["infinitive"] = lemma
    return derived


@dataclass(frozen=True)
class NounEntry:
    lemma: str
    gender: str            # M, F or C (common)
    concord: str           # article/adjective gender, M or F
    invariable: bool       # number slot is N and the surface never changes
    singular: str
    plural: str

    def tag(self, number: str) -> str:
        num_char = "N" if self.invariable else number
        return f"NC{self.gender}{num_char}000"

    def surface(self, number: str) -> str:
        if self.invariable:
            return self.singular
        return self.singular if number == "S" else self.plural


@dataclass(frozen=True)
class AdjEntry:
    lemma: str
    common: bool
    forms: Dict[str, str]  # key "MS"/"FS"/"MP"/"FP" or "CS"/"CP"

    def tag(self, gender: str, number: str) -> str:
        g = "C" if self.common else gender
        return f"AQ0{g}{number}0"

    def surface(self, gender: str, number: str) -> str:
        key = ("C" if self.common else gender) + number
        return self.forms[key]


@dataclass(frozen=True)
class VerbEntry:
    lemma: str
    forms: Dict[str, str]
    reflexive: bool
    takes_infinitive: bool

    def tag(self, form: str) -> str:
        return {"pres3s": "VMIP3S0", "pres3p": "VMIP3P0",
                "infinitive": "VMN0000", "gerund": "VMG0000"}[form]


@dataclass
class Grammar:
    weights: Dict[str, float]
    nouns: List[NounEntry]
    adjectives: List[AdjEntry]
    verbs: List[VerbEntry]
    copula: VerbEntry
    determiners: Dict[str, Dict[str, str]]   # lemma -> {"MS": form, ...}
    determiner_tag: Dict[str, str]           # lemma -> tag template "DA0{g}{n}0"
    numerals: List[str]
    prepositions: List[str]
    adverbs: List[str]

    def lexicon_entries(self) -> List[Tuple[str, str, str]]:
        """Every (surface, lemma, tag) the grammar can produce."""
        entries: List[Tuple[str, str, str]] = []
        for noun in self.nouns:
            if noun.invariable:
                entries.append((noun.singular, noun.lemma, noun.tag("S")))
            else:
                entries.append((noun.singular, noun.lemma, noun.tag("S")))
                entries.append((noun.plural, noun.lemma, noun.tag("P")))
        for adj in self.adjectives:
            genders = ("C",) if adj.common else ("M", "F")
            for g in genders:
                for n in ("S", "P"):
                    entries.append((adj.forms[g + n], adj.lemma, f"AQ0{g}{n}0"))
        for verb in list(self.verbs) + [self.copula]:
            for form in ("pres3s", "pres3p", "infinitive", "gerund"):
                entries.append((verb.forms[form], verb.lemma, verb.tag(form)))
        for lemma, forms in self.determiners.items():
            template = self.determiner_tag[lemma]
            for key, form in forms.items():
                tag = template.format(g=key[0], n=key[1])
                entries.append((form, lemma, tag))
        for numeral in self.numerals:
            entries.append((numeral, numeral, "DN0CP0"))
        for prep in self.prepositions:
            entries.append((prep, prep, "SPS00"))
        for adverb in self.adverbs:
            entries.append((adverb, adverb, "RG"))
        entries.append(("se", "se", "P00CN00"))
        entries.append(("y", "y", "CC"))
        entries.append(("o", "o", "CC"))
        entries.append((".", ".", "Fp"))
        seen = set()
        unique = []
        for entry in entries:
            key = entry[1], entry[2]
            if key in seen:
                continue
            seen.add(key)
            unique.append(entry)
        return unique


def _noun_entry(raw: dict) -> NounEntry:
    lemma = raw["lemma"]
    gender = raw["gender"]
    if gender not in ("M", "F", "C"):
        raise ConfigError(f"noun {lemma!r}: gender must be M, F or C")
    concord = raw.get("concord", gender)
    if concord not in ("M", "F"):
        raise ConfigError(f"noun {lemma!r}: concord gender must be M or F")
    invariable = bool(raw.get("invariable", False))
    plural = raw.get("plural") or ("" if invariable else pluralize(lemma))
    return NounEntry(lemma=lemma, gender=gender, concord=concord,
                     invariable=invariable, singular=lemma, plural=plural)


def _adj_entry(raw: dict) -> AdjEntry:
    lemma = raw["lemma"]
    if "forms" in raw:
        forms = dict(raw["forms"])
        common = "CS" in forms
    elif lemma.endswith("o"):
        feminine = lemma[:-1] + "a"
        forms = {"MS": lemma, "FS": feminine,
                 "MP": pluralize(lemma), "FP": pluralize(feminine)}
        common = False
    else:
        forms = {"CS": lemma, "CP": pluralize(lemma)}
        common = True
    return AdjEntry(lemma=lemma, common=common, forms=forms)


def _verb_entry(raw: dict) -> VerbEntry:
    lemma = raw["lemma"]
    overrides = {k: raw[k] for k in ("pres3s", "pres3p", "gerund") if k in raw}
    return VerbEntry(
        lemma=lemma,
        forms=verb_forms(lemma, overrides),
        reflexive=bool(raw.get("reflexive", False)),
        takes_infinitive=bool(raw.get("takes_infinitive", False)),
    )


def load_grammar(path: Optional[str] = None) -> Grammar:
    """Load and validate a grammar config; default is the bundled one."""
    if path is None:
        text = resources.files("morphgen").joinpath("data", GRAMMAR_RESOURCE).read_text("utf-8")
    else:
        with open(path, encoding="utf-8") as handle:
            text = handle.read()
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"grammar config is not valid JSON: {exc}") from None

    weights = raw.get("weights", {})
    for key in _WEIGHT_KEYS:
        if key not in weights:
            raise ConfigError(f"grammar config missing weight {key!r}")
        value = weights[key]
        if not isinstance(value, (int, float)) or not 0.0 <= value <= 1.0:
            raise ConfigError(f"grammar weight {key!r} must be in [0, 1], got {value!r}")

    for section in ("nouns", "adjectives", "verbs", "numerals", "prepositions", "adverbs"):
        if not raw.get(section):
            raise ConfigError(f"grammar config section {section!r} is empty or missing")

    copula_raw = raw.get("copula")
    if not copula_raw:
        raise ConfigError("grammar config missing the copula verb")

    determiners = raw.get("determiners", {})
    determiner_tag = raw.get("determiner_tags", {})
    for name in ("el", "un", "este"):
        if name not in determiners or name not in determiner_tag:
            raise ConfigError(f"grammar config missing determiner {name!r}")

    grammar = Grammar(
        weights={k: float(weights[k]) for k in _WEIGHT_KEYS},
        nouns=[_noun_entry(n) for n in raw["nouns"]],
        adjectives=[_adj_entry(a) for a in raw["adjectives"]],
        verbs=[_verb_entry(v) for v in raw["verbs"]],
        copula=_verb_entry(copula_raw),
        determiners=determiners,
        determiner_tag=determiner_tag,
        numerals=list(raw["numerals"]),
        prepositions=list(raw["prepositions"]),
        adverbs=list(raw["adverbs"]),
    )
    for surface, lemma, tag in grammar.lexicon_entries():
        tagset.parse_tag(tag)  # malformed tags in the config surface here
        if not surface or not lemma:
            raise ConfigError(f"grammar produced an empty form for {lemma!r}/{tag}")
    if not any(v.reflexive for v in grammar.verbs):
        raise ConfigError("grammar needs at least one reflexive verb")
    if not any(v.takes_infinitive for v in grammar.verbs):
        raise ConfigError("grammar needs at least one infinitive-taking verb")
    return grammar


@dataclass
class SyntheticCorpus:
    """Full-form tagged sentences with their final surfaces attached."""

    sentences: List[List[TaggedToken]]
    lexicon_entries: List[Tuple[str, str, str]]

    @property
    def surface_sentences(self) -> List[List[str]]:
        return [[tok.surface for tok in sent] for sent in self.sentences]


class _Sampler:
    def __init__(self, grammar: Grammar, rng: random.Random):
        self.g = grammar
        self.rng = rng
        self.w = grammar.weights

    def flip(self, key: str) -> bool:
        return self.rng.random() < self.w[key]

    def noun_phrase(self) -> Tuple[List[Tuple[str, str, str]], str, str]:
        """Returns (tokens, concord_gender, semantic_number); tokens are
        (surface, lemma, tag) triples."""
        g = self.g
        noun = self.rng.choice(g.nouns)
        plural = self.flip("plural")
        number = "P" if plural else "S"
        gender = noun.concord
        tokens = []
        if plural:
            det = "este" if self.flip("determiner_demo") else "el"
            numeral = self.rng.choice(g.numerals)
            tokens.append(self._det(det, gender, "P"))
            tokens.append((numeral, numeral, "DN0CP0"))
        else:
            if self.flip("determiner_indef"):
                det = "un"
            elif self.flip("determiner_demo"):
                det = "este"
            else:
                det = "el"
            tokens.append(self._det(det, gender, "S"))
        tokens.append((noun.surface(number), noun.lemma, noun.tag(number)))
        if self.flip("adjective"):
            adj = self.rng.choice(g.adjectives)
            tokens.append((adj.surface(gender, number), adj.lemma, adj.tag(gender, number)))
        return tokens, gender, number

    def bare_noun(self) -> List[Tuple[str, str, str]]:
        noun = self.rng.choice(self.g.nouns)
        number = "P" if self.flip("bare_plural") else "S"
        return [(noun.surface(number), noun.lemma, noun.tag(number))]

    def _det(self, lemma: str, gender: str, number: str) -> Tuple[str, str, str]:
        form = self.g.determiners[lemma][gender + number]
        tag = self.g.determiner_tag[lemma].format(g=gender, n=number)
        return form, lemma, tag

    def verb_token(self, verb: VerbEntry, number: str) -> Tuple[str, str, str]:
        form = "pres3s" if number == "S" else "pres3p"
        return verb.forms[form], verb.lemma, verb.tag(form)

    def sentence(self) -> List[Tuple[str, str, str]]:
        g = self.g
        tokens: List[Tuple[str, str, str]] = []
        coordinated = self.flip("coordination")
        if coordinated:
            conj = "o" if self.flip("coordination_or") else "y"
            first = self.rng.choice(g.nouns)
            second = self.rng.choice(g.nouns)
            tokens.append((first.surface("S"), first.lemma, first.tag("S")))
            tokens.append((conj, conj, "CC"))
            tokens.append((second.surface("S"), second.lemma, second.tag("S")))
            number = "P" if conj == "y" else "S"
            gender = None
        else:
            np_tokens, gender, number = self.noun_phrase()
            tokens.extend(np_tokens)

        if not coordinated and self.flip("copula"):
            tokens.append(self.verb_token(g.copula, number))
            adj = self.rng.choice(g.adjectives)
            tokens.append((adj.surface(gender, number), adj.lemma, adj.tag(gender, number)))
        else:
            verb = self.rng.choice(g.verbs)
            if verb.reflexive and self.flip("reflexive"):
                tokens.append(("se", "se", "P00CN00"))
            tokens.append(self.verb_token(verb, number))
            if verb.takes_infinitive and self.flip("infinitive"):
                inf = self.rng.choice(g.verbs)
                lemma = inf.lemma
                if inf.reflexive and self.flip("infinitive_reflexive"):
                    lemma = inf.lemma + "+se"
                tokens.append((inf.forms["infinitive"], lemma, "VMN0000"))
            if self.flip("object"):
                if self.flip("object_bare"):
                    tokens.extend(self.bare_noun())
                else:
                    tokens.extend(self.noun_phrase()[0])
            if self.flip("pp"):
                prep = self.rng.choice(g.prepositions)
                tokens.append((prep, prep, "SPS00"))
                if self.flip("pp_bare"):
                    tokens.extend(self.bare_noun())
                else:
                    tokens.extend(self.noun_phrase()[0])
        if self.flip("gerund"):
            reflexives = [v for v in g.verbs if v.reflexive]
            verb = self.rng.choice(reflexives)
            tokens.append((verb.forms["gerund"], verb.lemma + "+se", "VMG0000"))
        if self.flip("adverb"):
            adverb = self.rng.choice(g.adverbs)
            tokens.append((adverb, adverb, "RG"))
        tokens.append((".", ".", "Fp"))
        return tokens


def generate_synthetic_corpus(seed: int, n_sentences: int,
                              grammar: Optional[Grammar] = None) -> SyntheticCorpus:
    """Deterministic per seed.  Surfaces already include the orthographic
    rules (conjunction allomorphy, clitic accentuation) so the corpus text
    is final Spanish-like output."""
    if n_sentences < 1:
        raise ConfigError(f"need at least one sentence, got {n_sentences}")
    if grammar is None:
        grammar = load_grammar()
    rng = random.Random(seed)
    sampler = _Sampler(grammar, rng)
    sentences: List[List[TaggedToken]] = []
    for _ in range(n_sentences):
        triples = sampler.sentence()
        surfaces = [s for s, _, _ in triples]
        surfaces, _ = rules.conjunction_rule(surfaces)
        tokens = []
        for surface, (raw_surface, lemma, tag_raw) in zip(surfaces, triples):
            if "+" in lemma:
                base, *clitics = lemma.split("+")
                surface = rules.clitic_accentuation_rule(raw_surface, clitics)
            tokens.append(TaggedToken(
                surface=surface, lemma=lemma, tag=tagset.parse_tag(tag_raw)
            ))
        sentences.append(tokens)
    return SyntheticCorpus(
        sentences=sentences,
        lexicon_entries=grammar.lexicon_entries(),
    )


_WILDCARDS = {"C", "N", "0"}


def _agree(a: Optional[str], b: Optional[str]) -> bool:
    if a is None or b is None:
        return True
    return a == b or a in _WILDCARDS or b in _WILDCARDS


def agreement_violations(sentences: Sequence[List[TaggedToken]]) -> List[str]:
    """Concord checker used as the by-construction test oracle.

    Verifies determiner-noun and noun-adjective gender/number agreement
    inside contiguous NPs and subject-verb number concord.  Returns
    human-readable violation descriptions (expected empty).
    """
    problems = []
    for sid, sentence in enumerate(sentences):
        cats = [tok.tag.category for tok in sentence]
        # determiner/adjective vs the head noun of the same NP
        for i, tok in enumerate(sentence):
            if cats[i] == "Determiner" and not tok.tag.raw.startswith("DN"):
                j = i + 1
                while j < len(sentence) and cats[j] == "Determiner":
                    j += 1  # numeral determiners sit between article and noun
                if j < len(sentence) and cats[j] == "Noun":
                    noun = sentence[j]
                    if not _agree(tok.tag.slot_char("gender"), noun.tag.slot_char("gender")):
                        problems.append(f"s{sid}: det {tok.surface} vs noun {noun.surface} gender")
                    if not _agree(tok.tag.slot_char("number"), noun.tag.slot_char("number")):
                        problems.append(f"s{sid}: det {tok.surface} vs noun {noun.surface} number")
            if cats[i] == "Adjective" and i > 0 and cats[i - 1] == "Noun":
                noun = sentence[i - 1]
                if not _agree(tok.tag.slot_char("gender"), noun.tag.slot_char("gender")):
                    problems.append(f"s{sid}: adj {tok.surface} vs noun {noun.surface} gender")
                if not _agree(tok.tag.slot_char("number"), noun.tag.slot_char("number")):
                    problems.append(f"s{sid}: adj {tok.surface} vs noun {noun.surface} number")
        # subject-verb number concord
        verb_idx = next((i for i, c in enumerate(cats) if c == "Verb"), None)
        if verb_idx is None:
            continue
        verb_number = sentence[verb_idx].tag.slot_char("number")
        if verb_number not in ("S", "P"):
            continue
        subject = sentence[:verb_idx]
        subj_number = None
        if any(tok.tag.raw == "CC" for tok in subject):
            conj = next(tok for tok in subject if tok.tag.raw == "CC")
            subj_number = "P" if conj.lemma == "y" else "S"
        elif any(tok.tag.raw.startswith("DN") for tok in subject):
            subj_number = "P"
        else:
            det = next((tok for tok in subject if tok.tag.category == "Determiner"), None)
            if det is not None:
                subj_number = det.tag.slot_char("number")
            elif subject and subject[0].tag.category == "Noun":
                subj_number = subject[0].tag.slot_char("number")
        if subj_number in ("S", "P") and subj_number != verb_number:
            problems.append(f"s{sid}: subject number {subj_number} vs verb {verb_number}")
    return problems
