"""Metric benchmark command: score sentence pairs, correlate with gold
similarity, and bucket by token overlap.

Pairs come either from a score<TAB>s1<TAB>s2 file or from a constructed
perturbation test (lexicon-driven word replacement). The report is JSON.
"""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from .cli import EXIT_BACKEND, EXIT_INPUT, EXIT_OK, EXIT_OUTPUT, _backend_from_config
from .errors import BackendError, DiveditError
from .evalharness import (
    Lexicon,
    fetch_ratio_default,
    filter_by_overlap,
    load_sts_tsv,
    make_perturbation_pairs,
    run_benchmark,
    standard_metrics,
)
from .metrics import NddConfig


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distort-bench",
        description="Compare similarity metrics on sentence pairs.",
    )
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--pairs", help="TSV file: score<TAB>sentence1<TAB>sentence2")
    source.add_argument("--construct", choices=("syn_ant", "pos", "term", "lemma"),
                        help="build labeled pairs by lexical replacement")
    parser.add_argument("--sentences", help="text file, one sentence per line (with --construct)")
    parser.add_argument("--lexicon", help="lexicon JSONL (with --construct)")
    parser.add_argument("--ratio", type=float, default=None,
                        help="fraction of eligible words to replace "
                             "(default 0.2; term test uses 1.0)")
    parser.add_argument("--min-overlap", type=float, default=None,
                        help="keep only pairs with at least this token overlap")
    parser.add_argument("--buckets", type=int, default=10)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--report", help="report JSON path (default: stdout)")
    parser.add_argument("--divergence", choices=("hellinger", "kl"), default="hellinger")
    parser.add_argument("--weighting", choices=("mean", "exponential"), default="mean")
    parser.add_argument("--mu", type=float, default=1.0)
    parser.add_argument("--ensemble-ratio", dest="ensemble_ratio", type=float, default=0.0025)
    parser.add_argument("--epsilon", type=float, default=1e-8)
    parser.add_argument("--top-k", dest="top_k", type=int, default=128)
    parser.add_argument("--alpha", type=float, default=0.1)
    backend_group = parser.add_mutually_exclusive_group(required=True)
    backend_group.add_argument("--backend-cmd", dest="backend_cmd")
    backend_group.add_argument("--backend-tcp", dest="backend_tcp", metavar="HOST:PORT")
    backend_group.add_argument("--reference-corpus", dest="reference_corpus")
    parser.add_argument("--mask-token", dest="mask_token", default="<mask>")
    return parser


def run_bench(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    backend_config = {
        "reference_corpus": args.reference_corpus,
        "backend_cmd": args.backend_cmd,
        "backend_tcp": args.backend_tcp,
        "alpha": args.alpha,
        "top_k": args.top_k,
        "epsilon": args.epsilon,
        "mask_token": args.mask_token,
    }
    try:
        backend, _ = _backend_from_config(backend_config)
    except (OSError, DiveditError) as exc:
        print(f"distort-bench: backend setup failed: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    try:
        if args.pairs:
            pairs = load_sts_tsv(args.pairs)
        else:
            if not args.sentences or not args.lexicon:
                parser.error("--construct needs --sentences and --lexicon")
            with open(args.sentences, encoding="utf-8") as handle:
                sentences = [tuple(line.split()) for line in handle if line.strip()]
            lexicon = Lexicon.from_jsonl(args.lexicon)
            ratio = fetch_ratio_default(args.construct, args.ratio)
            pairs = make_perturbation_pairs(
                sentences, lexicon, args.construct, ratio, np.random.default_rng(args.seed)
            )
        if args.min_overlap is not None:
            pairs = filter_by_overlap(pairs, args.min_overlap)
        cfg = NddConfig(
            divergence=args.divergence,
            weighting=args.weighting,
            mu=args.mu,
            ensemble_ratio=args.ensemble_ratio,
            epsilon=args.epsilon,
        )
        report = run_benchmark(pairs, standard_metrics(backend, cfg), buckets=args.buckets)
    except BackendError as exc:
        print(f"distort-bench: backend failed: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (OSError, DiveditError) as exc:
        print(f"distort-bench: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        backend.close()

    text = json.dumps(report, indent=2)
    if args.report:
        try:
            with open(args.report, "w", encoding="utf-8") as handle:
                handle.write(text + "\n")
        except OSError as exc:
            print(f"distort-bench: cannot write report: {exc}", file=sys.stderr)
            return EXIT_OUTPUT
    else:
        print(text)
    return EXIT_OK


def main() -> None:
    sys.exit(run_bench(sys.argv[1:]))


if __name__ == "__main__":
    main()
