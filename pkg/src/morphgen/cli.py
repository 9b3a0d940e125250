"""Command-line interface.

Subcommands: synthesize-corpus, prepare, train, generate, evaluate,
tune-lambda.  Exit codes: 0 success, 1 usage error, 2 data error,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import sys

from . import pipeline, tagset
from .errors import DataError, MorphgenError, NumericalError

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NUMERICAL = 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="morphgen",
                     description="Morphology generation for simplified tagged text")
    parser.add_argument("--config", default=None, help="pipeline config file (key = value lines)")
    parser.add_argument("--seed", type=int, default=None, help="override the config seed")
    parser.add_argument("--trace", action="store_true",
                        help="write per-stage intermediate files next to outputs")
    parser.add_argument("--fail-fast", action="store_true",
                        help="abort on the first per-sentence error instead of skipping")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("synthesize-corpus",
                   help="generate the synthetic agreement corpus and its lexicon")
    sub.add_parser("prepare",
                   help="build vocabularies, dataset caches, language model and priors")

    p_train = sub.add_parser("train", help="train one classifier")
    p_train.add_argument("--task", required=True, choices=list(tagset.TASKS))
    p_train.add_argument("--epochs", type=int, default=None, help="override config epochs")

    p_gen = sub.add_parser("generate", help="inflect a simplified tagged file")
    p_gen.add_argument("--input", required=True, help="simplified tagged text (lemma[TAG] lines)")
    p_gen.add_argument("--output", required=True, help="surface text output path")
    p_gen.add_argument("--trace-rules", action="store_true",
                       help="write the orthographic rule trace TSV")

    p_eval = sub.add_parser("evaluate", help="score a generated hypothesis against a reference")
    p_eval.add_argument("--hyp-tags", required=True)
    p_eval.add_argument("--ref-tags", required=True)
    p_eval.add_argument("--hyp-text", default=None)
    p_eval.add_argument("--ref-text", default=None)
    p_eval.add_argument("--kbest-trace", default=None,
                        help="k-best trace from generate --trace, enables the oracle metric")
    p_eval.add_argument("--rules-trace", default=None)

    p_tune = sub.add_parser("tune-lambda", help="grid-search the LM weight on a held-out set")
    p_tune.add_argument("--input", required=True, help="simplified tagged held-out input")
    p_tune.add_argument("--ref-tags", required=True, help="full-form tagged reference")
    p_tune.add_argument("--grid", default=None,
                        help="comma-separated lambda values (0 is always included)")
    return parser


def _load_config(args) -> pipeline.PipelineConfig:
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.fail_fast:
        overrides["fail_fast"] = True
    if getattr(args, "epochs", None) is not None:
        overrides["epochs"] = args.epochs
    if args.config:
        return pipeline.read_config(args.config, overrides)
    return pipeline.build_config({}, overrides)


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    config = _load_config(args)

    if args.command == "synthesize-corpus":
        produced = pipeline.cmd_synthesize(config)
        for name, path in sorted(produced.items()):
            print(f"{name}: {path}")
    elif args.command == "prepare":
        produced = pipeline.cmd_prepare(config)
        for name, path in sorted(produced.items()):
            print(f"{name}: {path}")
    elif args.command == "train":
        path = pipeline.cmd_train(config, args.task)
        print(f"model: {path}")
    elif args.command == "generate":
        results = pipeline.cmd_generate(config, args.input, args.output,
                                        trace=args.trace, trace_rules=args.trace_rules)
        print(f"output: {args.output} ({len(results)} sentences)")
    elif args.command == "evaluate":
        report = pipeline.cmd_evaluate(
            config, args.hyp_tags, args.ref_tags,
            hyp_text=args.hyp_text, ref_text=args.ref_text,
            kbest_trace=args.kbest_trace, rules_trace=args.rules_trace)
        print(report.format_text())
    elif args.command == "tune-lambda":
        grid = None
        if args.grid:
            grid = [float(v) for v in args.grid.split(",")]
        best, results = pipeline.cmd_tune_lambda(config, args.input, args.ref_tags, grid)
        for lam, acc in results:
            print(f"lambda={lam:g}\tnumber_accuracy={acc:.4f}")
        print(f"best lambda: {best:g}")
    return EXIT_OK


def main() -> None:
    try:
        sys.exit(run())
    except SystemExit:
        raise
    except NumericalError as exc:
        print(f"morphgen: numerical failure: {exc}", file=sys.stderr)
        sys.exit(EXIT_NUMERICAL)
    except DataError as exc:
        print(f"morphgen: data error: {exc}", file=sys.stderr)
        sys.exit(EXIT_DATA)
    except FileNotFoundError as exc:
        print(f"morphgen: data error: {exc}", file=sys.stderr)
        sys.exit(EXIT_DATA)
    except MorphgenError as exc:
        print(f"morphgen: error: {exc}", file=sys.stderr)
        sys.exit(EXIT_DATA)


if __name__ == "__main__":
    main()
