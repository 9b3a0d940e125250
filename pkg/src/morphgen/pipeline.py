"""Pipeline orchestration: prepare, train, generate, evaluate, tune.

The stages wire the block diagram together: classify each token of the
morphology-simplified input, build the sentence graph, enumerate k-best
paths, realize and LM-rescore the candidates, repair orthography, and
emit full-form text.  All randomness flows from the single configured
seed; identical config + inputs give bit-identical artifacts.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import classifier, corpus, fullform, ngram_lm, rescoring, rules, synthesis, tagset
from .errors import ConfigError, DataError
from .tagset import GENDER, NUMBER, CLASSES

RESCORING_MODES = ("number", "joint", "off")


@dataclass
class PipelineConfig:
    workdir: str = "work"
    corpus_train: str = ""        # full-form tagged corpus (lemma[TAG] lines)
    corpus_heldout: str = ""
    lexicon: str = ""             # empty: workdir/lexicon.tsv
    grammar: str = ""             # empty: bundled default grammar
    scheme: str = tagset.SCHEME_NUMGEN
    seed: int = 42
    # classifier settings; number/gender defaults follow the small-corpus setup
    window_number: int = 9
    window_gender: int = 7
    vocab_number: int = 7000
    vocab_gender: int = 9000
    embedding_dim: int = 128
    filter_number: int = 7
    filter_gender: int = 5
    conv_filters: int = 0
    lstm_units: int = 70
    optimizer: str = "adam"
    learning_rate: float = 0.001
    batch_size: int = 32
    epochs: int = 20
    # language model and rescoring
    lm_order: int = 3
    k_best: int = 10
    lambda_weight: float = 0.5
    rescoring_mode: str = "number"
    # synthetic corpus sizes (synthesize-corpus command)
    synth_train: int = 10000
    synth_heldout: int = 1000
    capitalize: bool = False
    fail_fast: bool = False

    def __post_init__(self):
        if self.scheme not in tagset.SCHEMES:
            raise ConfigError(f"scheme must be one of {tagset.SCHEMES}, got {self.scheme!r}")
        if self.rescoring_mode not in RESCORING_MODES:
            raise ConfigError(
                f"rescoring_mode must be one of {RESCORING_MODES}, got {self.rescoring_mode!r}"
            )
        if self.k_best < 1:
            raise ConfigError(f"k_best must be >= 1, got {self.k_best}")

    # -- paths ---------------------------------------------------------
    def path(self, name: str) -> str:
        return os.path.join(self.workdir, name)

    def lexicon_path(self) -> str:
        return self.lexicon or self.path("lexicon.tsv")

    def corpus_path(self, split: str) -> str:
        configured = self.corpus_train if split == "train" else self.corpus_heldout
        return configured or self.path(f"corpus/{split}.tagged")

    def text_path(self, split: str) -> str:
        base = self.corpus_path(split)
        return base[: -len(".tagged")] + ".txt" if base.endswith(".tagged") else base + ".txt"

    def vocab_path(self, task: str) -> str:
        return self.path(f"vocab.{task}.txt")

    def dataset_path(self, task: str, split: str) -> str:
        return self.path(f"dataset.{task}.{split}.tsv")

    def model_path(self, task: str) -> str:
        return self.path(f"model.{task}.bin")

    def hyper_for(self, task: str, vocab_size: int) -> classifier.Hyperparameters:
        return classifier.Hyperparameters(
            window_length=self.window_number if task == NUMBER else self.window_gender,
            vocab_size=vocab_size,
            embedding_dim=self.embedding_dim,
            conv_filter_size=self.filter_number if task == NUMBER else self.filter_gender,
            conv_filters=self.conv_filters,
            lstm_units=self.lstm_units,
            optimizer=self.optimizer,
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            rng_seed=self.seed,
        )


_CONFIG_ALIASES = {"lambda": "lambda_weight"}


def read_config(path: str, overrides: Optional[dict] = None) -> PipelineConfig:
    """Key-value config file: ``key = value`` lines, # comments."""
    values: Dict[str, str] = {}
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected key = value")
            key, _, raw = line.partition("=")
            values[key.strip()] = raw.strip()
    return build_config(values, overrides)


def build_config(values: Dict[str, str], overrides: Optional[dict] = None) -> PipelineConfig:
    fields = {f.name: f for f in dataclasses.fields(PipelineConfig)}
    kwargs = {}
    for key, raw in values.items():
        name = _CONFIG_ALIASES.get(key, key)
        if name not in fields:
            raise ConfigError(f"unknown config key {key!r}")
        ftype = fields[name].type
        try:
            if ftype == "int":
                kwargs[name] = int(raw)
            elif ftype == "float":
                kwargs[name] = float(raw)
            elif ftype == "bool":
                if raw.lower() not in ("true", "false", "0", "1", "yes", "no"):
                    raise ValueError(raw)
                kwargs[name] = raw.lower() in ("true", "1", "yes")
            else:
                kwargs[name] = raw
        except ValueError:
            raise ConfigError(f"config key {key!r}: cannot parse {raw!r}") from None
    if overrides:
        kwargs.update(overrides)
    return PipelineConfig(**kwargs)


def write_config(path: str, config: PipelineConfig) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for f in dataclasses.fields(PipelineConfig):
            handle.write(f"{f.name} = {getattr(config, f.name)}\n")


# ---------------------------------------------------------------------------
# synthesize-corpus


def cmd_synthesize(config: PipelineConfig) -> Dict[str, str]:
    """Write train/heldout tagged corpora, their surface text, and the
    lexicon derived from the grammar."""
    grammar = synthesis.load_grammar(config.grammar or None)
    os.makedirs(os.path.join(config.workdir, "corpus"), exist_ok=True)
    produced = {}
    for split, count, seed in (
        ("train", config.synth_train, config.seed),
        ("heldout", config.synth_heldout, config.seed + 1),
    ):
        corp = synthesis.generate_synthetic_corpus(seed, count, grammar)
        tagged_path = config.corpus_path(split)
        text_path = config.text_path(split)
        os.makedirs(os.path.dirname(tagged_path) or ".", exist_ok=True)
        tagset.write_tagged_file(tagged_path, corp.sentences)
        corpus.write_text_file(text_path, corp.surface_sentences)
        produced[f"{split}_tagged"] = tagged_path
        produced[f"{split}_text"] = text_path
    lex_path = config.lexicon_path()
    os.makedirs(os.path.dirname(lex_path) or ".", exist_ok=True)
    fullform.write_lexicon(lex_path, grammar.lexicon_entries())
    produced["lexicon"] = lex_path
    return produced


# ---------------------------------------------------------------------------
# prepare


def _load_corpora(config: PipelineConfig):
    train_path = config.corpus_path("train")
    if not os.path.exists(train_path):
        raise DataError(f"training corpus not found: {train_path}")
    train = tagset.read_tagged_file(train_path)
    heldout_path = config.corpus_path("heldout")
    heldout = tagset.read_tagged_file(heldout_path) if os.path.exists(heldout_path) else []
    return train, heldout


def cmd_prepare(config: PipelineConfig) -> Dict[str, str]:
    """Build vocabularies, dataset caches, the rescoring LM and the
    inflection priors.  Idempotent: re-running overwrites deterministically."""
    os.makedirs(config.workdir, exist_ok=True)
    train, heldout = _load_corpora(config)
    train_simple = tagset.simplify_corpus(train, config.scheme)
    heldout_simple = tagset.simplify_corpus(heldout, config.scheme)
    produced = {}

    for task in tagset.scheme_tasks(config.scheme):
        limit = config.vocab_number if task == NUMBER else config.vocab_gender
        window = config.window_number if task == NUMBER else config.window_gender
        vocab = corpus.build_vocabulary(train_simple, limit)
        corpus.write_vocabulary(config.vocab_path(task), vocab)
        produced[f"vocab_{task}"] = config.vocab_path(task)
        for split, full, simple in (("train", train, train_simple),
                                    ("heldout", heldout, heldout_simple)):
            if not full:
                continue
            examples = corpus.make_dataset(full, task, config.scheme, window, vocab, simple)
            path = config.dataset_path(task, split)
            corpus.write_dataset(path, examples, task, window, vocab.content_hash())
            produced[f"dataset_{task}_{split}"] = path

    # rescoring LM over the training surface text (lexicon-realized when
    # no surface file accompanies the corpus)
    text_path = config.text_path("train")
    if os.path.exists(text_path):
        surfaces = corpus.read_text_file(text_path)
    else:
        lexicon = fullform.load_lexicon(config.lexicon_path())
        surfaces = [_gold_surfaces(lexicon, sentence) for sentence in train]
    lm = ngram_lm.train_lm(surfaces, config.lm_order)
    ngram_lm.write_arpa(config.path("lm.arpa"), lm)
    produced["lm"] = config.path("lm.arpa")

    priors = fullform.count_priors(train)
    fullform.write_priors(config.path("priors.tsv"), priors)
    produced["priors"] = config.path("priors.tsv")
    return produced


def _gold_surfaces(lexicon: fullform.Lexicon, sentence: List[tagset.TaggedToken]) -> List[str]:
    """Reference surfaces for a full-form tagged sentence via the lexicon,
    with the orthographic rules applied."""
    realized = []
    for token in sentence:
        surface, _ = fullform.generate_form(lexicon, token.lemma, token.tag)
        realized.append(surface)
    final, _ = rules.conjunction_rule(realized)
    return final


# ---------------------------------------------------------------------------
# train


def cmd_train(config: PipelineConfig, task: str) -> str:
    """Train one task's model from the prepared dataset caches."""
    if task not in tagset.TASKS:
        raise ConfigError(f"unknown task {task!r}")
    if config.epochs < 1:
        raise ConfigError("refusing to train a model for zero epochs")
    vocab = corpus.read_vocabulary(config.vocab_path(task))
    examples, _, window, vocab_hash = corpus.read_dataset(config.dataset_path(task, "train"))
    if vocab_hash != vocab.content_hash():
        raise DataError(f"dataset cache for {task} was built with a different vocabulary")
    heldout_path = config.dataset_path(task, "heldout")
    heldout = corpus.read_dataset(heldout_path)[0] if os.path.exists(heldout_path) else None
    hyper = config.hyper_for(task, vocab.size)
    log_path = config.path(f"train.{task}.log")
    with open(log_path, "w", encoding="utf-8") as log_handle:
        model, _ = classifier.train(
            examples, hyper, task, vocab.content_hash(),
            heldout=heldout, log_handle=log_handle,
        )
    classifier.save_model(config.model_path(task), model)
    return config.model_path(task)


# ---------------------------------------------------------------------------
# generate


@dataclass
class GenerationResources:
    config: PipelineConfig
    lexicon: fullform.Lexicon
    lm: Optional[ngram_lm.NGramModel]
    models: Dict[str, classifier.Model]
    vocabs: Dict[str, corpus.Vocabulary]

    @property
    def tasks(self) -> tuple:
        return tagset.scheme_tasks(self.config.scheme)


def load_resources(config: PipelineConfig, need_lm: bool = True) -> GenerationResources:
    lexicon = fullform.load_lexicon(
        config.lexicon_path(),
        priors_path=config.path("priors.tsv") if os.path.exists(config.path("priors.tsv")) else None,
    )
    lm = None
    if need_lm and config.rescoring_mode != "off" and os.path.exists(config.path("lm.arpa")):
        lm = ngram_lm.read_arpa(config.path("lm.arpa"))
    models, vocabs = {}, {}
    for task in tagset.scheme_tasks(config.scheme):
        model_path = config.model_path(task)
        if not os.path.exists(model_path):
            raise DataError(f"missing trained model: {model_path}")
        models[task] = classifier.load_model(model_path)
        vocabs[task] = corpus.read_vocabulary(config.vocab_path(task))
    return GenerationResources(config=config, lexicon=lexicon, lm=lm,
                               models=models, vocabs=vocabs)


@dataclass
class SentenceResult:
    sentence_id: int
    tokens: List[str]                  # final surface tokens
    full_tags: List[str]
    assignments: List[Dict[str, Optional[str]]]
    rule_report: rules.RuleReport
    nbest_lines: List[str] = field(default_factory=list)
    kbest_classes: List[Tuple[int, float, Optional[float], Optional[float], List[Optional[str]]]] = field(default_factory=list)


def _argmax_assignments(preds, task: str) -> List[Optional[str]]:
    classes = CLASSES[task]
    out = []
    for pred in preds:
        dist = pred.get(task)
        out.append(None if dist is None else classes[int(np.argmax(dist))])
    return out


def _finalize(realized: List[fullform.RealizedToken]) -> Tuple[List[str], rules.RuleReport]:
    """Apply the orthographic rules in order: conjunction allomorphy over
    the plain concatenations, then clitic accentuation."""
    plain = [r.surface + "".join(r.clitics) for r in realized]
    tokens, report = rules.conjunction_rule(plain)
    for i, r in enumerate(realized):
        if r.clitics and tokens[i] == plain[i]:
            accented = rules.clitic_accentuation_rule(r.surface, list(r.clitics))
            report.record(i, "clitic_accentuation", tokens[i], accented)
            tokens[i] = accented
    return tokens, report


def _rescored_assignment(resources: GenerationResources, sentence, preds,
                         base_assignments: List[Dict[str, Optional[str]]],
                         task: str, result: SentenceResult) -> List[Optional[str]]:
    """Run graph -> k-best -> realize -> LM rescore for one task, keeping
    the other tasks' assignments fixed."""
    config = resources.config
    dists = [p.get(task) for p in preds]
    graph = rescoring.build_graph(sentence, dists, task)
    paths = rescoring.yen_k_best(graph, config.k_best)
    realized_sentences = []
    for path in paths:
        class_values = path.class_values(graph)
        assignments = [dict(a) for a in base_assignments]
        for i, value in enumerate(class_values):
            if value is not None:
                assignments[i][task] = value
        realized = fullform.realize_sentence(resources.lexicon, sentence, assignments)
        tokens, _ = _finalize(realized)
        realized_sentences.append(tokens)
    if resources.lm is not None and len(paths) > 1:
        best = rescoring.rescore(paths, realized_sentences, resources.lm,
                                 config.lambda_weight)
    else:
        best = paths[0]
    result.nbest_lines.extend(
        rescoring.format_nbest(result.sentence_id, paths, realized_sentences))
    for rank, path in enumerate(paths):
        result.kbest_classes.append(
            (rank, path.classifier_score, path.lm_score, path.combined_score,
             path.class_values(graph)))
    return best.class_values(graph)


def generate_sentence(resources: GenerationResources, sentence_id: int,
                      sentence: List[tagset.TaggedToken]) -> SentenceResult:
    config = resources.config
    preds = classifier.predict_sentence(
        resources.models.get(GENDER), resources.models.get(NUMBER),
        sentence, resources.vocabs.get(GENDER), resources.vocabs.get(NUMBER))

    assignments: List[Dict[str, Optional[str]]] = []
    for pred in preds:
        entry: Dict[str, Optional[str]] = {}
        for task in resources.tasks:
            dist = pred.get(task)
            if dist is not None:
                entry[task] = CLASSES[task][int(np.argmax(dist))]
        assignments.append(entry)

    result = SentenceResult(sentence_id=sentence_id, tokens=[], full_tags=[],
                            assignments=assignments, rule_report=rules.RuleReport())

    rescored_tasks: tuple = ()
    if config.rescoring_mode == "number" and NUMBER in resources.tasks:
        rescored_tasks = (NUMBER,)
    elif config.rescoring_mode == "joint":
        rescored_tasks = tuple(t for t in (NUMBER, GENDER) if t in resources.tasks)

    for task in rescored_tasks:
        values = _rescored_assignment(resources, sentence, preds, assignments,
                                      task, result)
        for i, value in enumerate(values):
            if value is not None:
                assignments[i][task] = value

    realized = fullform.realize_sentence(resources.lexicon, sentence, assignments)
    tokens, report = _finalize(realized)
    if config.capitalize and tokens:
        tokens[0] = tokens[0][:1].upper() + tokens[0][1:]
    result.tokens = tokens
    result.full_tags = [r.full_tag for r in realized]
    result.rule_report = report
    return result


def cmd_generate(config: PipelineConfig, input_path: str, output_path: str,
                 trace: bool = False, trace_rules: bool = False) -> List[SentenceResult]:
    """Run the full generation pipeline over a simplified tagged file."""
    resources = load_resources(config)
    sentences = tagset.read_tagged_file(input_path)
    results: List[SentenceResult] = []
    failures: List[str] = []
    for sid, sentence in enumerate(sentences):
        try:
            results.append(generate_sentence(resources, sid, sentence))
        except Exception as exc:
            if config.fail_fast:
                raise DataError(f"sentence {sid}: {exc}") from exc
            failures.append(f"sentence {sid}: {exc}")
            results.append(SentenceResult(
                sentence_id=sid, tokens=[tok.lemma for tok in sentence],
                full_tags=[tok.tag.raw for tok in sentence],
                assignments=[{} for _ in sentence], rule_report=rules.RuleReport()))
    corpus.write_text_file(output_path, [r.tokens for r in results])
    if failures:
        with open(output_path + ".errors", "w", encoding="utf-8") as handle:
            handle.write("\n".join(failures) + "\n")
    if trace or trace_rules:
        rules.write_rule_trace(output_path + ".rules.tsv",
                               [(r.sentence_id, r.rule_report) for r in results])
    if trace:
        with open(output_path + ".tags", "w", encoding="utf-8") as handle:
            for r, sentence in zip(results, sentences):
                handle.write(" ".join(
                    f"{tok.lemma}[{tag}]" for tok, tag in zip(sentence, r.full_tags)))
                handle.write("\n")
        with open(output_path + ".nbest", "w", encoding="utf-8") as handle:
            for r in results:
                for line in r.nbest_lines:
                    handle.write(line + "\n")
        with open(output_path + ".kbest.tsv", "w", encoding="utf-8") as handle:
            handle.write("sentence_id\trank\tclassifier\tlm\tcombined\tclasses\n")
            for r in results:
                for rank, cscore, lm, comb, classes in r.kbest_classes:
                    cls = ",".join("-" if c is None else c for c in classes)
                    lm_s = "-" if lm is None else f"{lm:.6f}"
                    comb_s = "-" if comb is None else f"{comb:.6f}"
                    handle.write(f"{r.sentence_id}\t{rank}\t{cscore:.6f}\t{lm_s}\t{comb_s}\t{cls}\n")
    return results


# ---------------------------------------------------------------------------
# evaluate


@dataclass
class EvaluationReport:
    accuracy: Dict[str, float]
    confusion: Dict[str, np.ndarray]     # rows gold, cols predicted
    support: Dict[str, int]
    token_recovery: Optional[float] = None
    oracle_accuracy: Dict[str, float] = field(default_factory=dict)
    rule_counts: Dict[str, int] = field(default_factory=dict)

    def validate(self) -> None:
        for task, matrix in self.confusion.items():
            if int(matrix.sum()) != self.support[task]:
                raise DataError(f"{task}: confusion mass != support")
            trace_acc = float(np.trace(matrix)) / max(1, self.support[task])
            if abs(trace_acc - self.accuracy[task]) > 1e-9:
                raise DataError(f"{task}: accuracy inconsistent with confusion trace")

    def format_text(self) -> str:
        lines = []
        for task in sorted(self.accuracy):
            lines.append(f"{task} accuracy: {self.accuracy[task]:.4f} "
                         f"({self.support[task]} tokens)")
            classes = CLASSES[task]
            lines.append("  gold\\pred  " + "  ".join(f"{c:>6}" for c in classes))
            for i, c in enumerate(classes):
                row = "  ".join(f"{int(v):>6}" for v in self.confusion[task][i])
                lines.append(f"  {c:>9}  {row}")
            if task in self.oracle_accuracy:
                lines.append(f"  oracle over k-best: {self.oracle_accuracy[task]:.4f}")
        if self.token_recovery is not None:
            lines.append(f"token-exact recovery: {self.token_recovery:.4f}")
        for rule, count in sorted(self.rule_counts.items()):
            lines.append(f"rule {rule}: {count} applications")
        return "\n".join(lines)


def classification_report(hyp_sentences: List[list], ref_sentences: List[list],
                          tasks: Sequence[str]) -> EvaluationReport:
    if len(hyp_sentences) != len(ref_sentences):
        raise DataError(
            f"hypothesis has {len(hyp_sentences)} sentences, reference {len(ref_sentences)}"
        )
    accuracy, confusion, support = {}, {}, {}
    for task in tasks:
        classes = CLASSES[task]
        matrix = np.zeros((len(classes), len(classes)), dtype=np.int64)
        for sid, (hyp, ref) in enumerate(zip(hyp_sentences, ref_sentences)):
            if len(hyp) != len(ref):
                raise DataError(
                    f"sentence {sid}: hypothesis has {len(hyp)} tokens, reference {len(ref)}"
                )
            for h_tok, r_tok in zip(hyp, ref):
                if not tagset.needs_classification(r_tok.tag, task):
                    continue
                gold = corpus.extract_label(r_tok, task)
                if tagset.needs_classification(h_tok.tag, task):
                    pred = corpus.extract_label(h_tok, task)
                else:
                    pred = "N"
                matrix[classes.index(gold), classes.index(pred)] += 1
        support[task] = int(matrix.sum())
        accuracy[task] = float(np.trace(matrix)) / max(1, support[task])
        confusion[task] = matrix
    report = EvaluationReport(accuracy=accuracy, confusion=confusion, support=support)
    report.validate()
    return report


def token_recovery(hyp_text: List[List[str]], ref_text: List[List[str]]) -> float:
    if len(hyp_text) != len(ref_text):
        raise DataError("hypothesis/reference sentence counts differ")
    total, hit = 0, 0
    for sid, (hyp, ref) in enumerate(zip(hyp_text, ref_text)):
        if len(hyp) != len(ref):
            raise DataError(f"sentence {sid}: token counts differ ({len(hyp)} vs {len(ref)})")
        total += len(ref)
        hit += sum(1 for a, b in zip(hyp, ref) if a == b)
    return hit / max(1, total)


def read_kbest_trace(path: str) -> Dict[int, List[List[Optional[str]]]]:
    """sentence_id -> class-value lists in rank order."""
    out: Dict[int, List[List[Optional[str]]]] = {}
    with open(path, encoding="utf-8") as handle:
        header = handle.readline()
        if not header.startswith("sentence_id\t"):
            raise DataError(f"{path}: not a k-best trace file")
        for line in handle:
            line = line.rstrip("\n")
            if not line:
                continue
            sid, rank, _, _, _, classes = line.split("\t")
            values = [None if c == "-" else c for c in classes.split(",")]
            out.setdefault(int(sid), []).append(values)
    return out


def oracle_accuracy(kbest: Dict[int, List[List[Optional[str]]]],
                    ref_sentences: List[list], task: str) -> float:
    """Best achievable accuracy picking one path per sentence from the
    k-best list (tokens outside the list keep their reference count)."""
    total, best_correct = 0, 0
    for sid, ref in enumerate(ref_sentences):
        gold = [
            corpus.extract_label(tok, task) if tagset.needs_classification(tok.tag, task) else None
            for tok in ref
        ]
        n_classified = sum(1 for g in gold if g is not None)
        total += n_classified
        candidates = kbest.get(sid)
        if not candidates:
            continue
        best = 0
        for values in candidates:
            correct = sum(
                1 for g, v in zip(gold, values) if g is not None and v == g
            )
            best = max(best, correct)
        best_correct += best
    return best_correct / max(1, total)


def cmd_evaluate(config: PipelineConfig, hyp_tags: str, ref_tags: str,
                 hyp_text: Optional[str] = None, ref_text: Optional[str] = None,
                 kbest_trace: Optional[str] = None,
                 rules_trace: Optional[str] = None) -> EvaluationReport:
    hyp = tagset.read_tagged_file(hyp_tags)
    ref = tagset.read_tagged_file(ref_tags)
    report = classification_report(hyp, ref, tagset.scheme_tasks(config.scheme))
    if hyp_text and ref_text:
        report.token_recovery = token_recovery(
            corpus.read_text_file(hyp_text), corpus.read_text_file(ref_text))
    if kbest_trace:
        kbest = read_kbest_trace(kbest_trace)
        for task in tagset.scheme_tasks(config.scheme):
            if config.rescoring_mode == "number" and task != NUMBER:
                continue
            report.oracle_accuracy[task] = oracle_accuracy(kbest, ref, task)
    if rules_trace and os.path.exists(rules_trace):
        with open(rules_trace, encoding="utf-8") as handle:
            handle.readline()
            for line in handle:
                fields = line.rstrip("\n").split("\t")
                if len(fields) == 5:
                    report.rule_counts[fields[2]] = report.rule_counts.get(fields[2], 0) + 1
    return report


# ---------------------------------------------------------------------------
# tune-lambda


def cmd_tune_lambda(config: PipelineConfig, input_path: str, ref_tags: str,
                    grid: Optional[Sequence[float]] = None) -> Tuple[float, List[Tuple[float, float]]]:
    """Grid-search the LM interpolation weight on a held-out set.

    Zero is always part of the grid, so the tuned weight never scores
    below the pure-classifier baseline on the tuning corpus.
    """
    if grid is None:
        grid = [0.0, 0.1, 0.2, 0.3, 0.5, 0.7, 1.0, 1.5, 2.0]
    grid = sorted(set(float(g) for g in grid) | {0.0})
    ref = tagset.read_tagged_file(ref_tags)
    results = []
    best_lambda, best_acc = 0.0, -1.0
    for lam in grid:
        tuned = dataclasses.replace(config, lambda_weight=lam)
        resources = load_resources(tuned)
        sentences = tagset.read_tagged_file(input_path)
        hyp = []
        for sid, sentence in enumerate(sentences):
            result = generate_sentence(resources, sid, sentence)
            hyp.append([
                tagset.TaggedToken(surface=tok.lemma, lemma=tok.lemma,
                                   tag=tagset.parse_tag(tag))
                for tok, tag in zip(sentence, result.full_tags)
            ])
        report = classification_report(hyp, ref, (NUMBER,))
        acc = report.accuracy[NUMBER]
        results.append((lam, acc))
        if acc > best_acc:
            best_lambda, best_acc = lam, acc
    return best_lambda, results
