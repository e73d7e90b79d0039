"""Command-line distortion pipeline.

Reads annotated documents, rewrites each sensitive span with the
least-perturbing candidate, and writes distorted JSONL plus a run manifest.

Exit codes: 0 success, 2 usage error, 3 backend failure, 4 input parse or
validation failure, 5 output I/O failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict

import numpy as np

from .backends import MlmBackend, RemoteBackend, build_reference_backend
from .distortion import DistortionConfig
from .docio import (
    AnnotatedDocument,
    RunManifest,
    distort_annotated,
    load_documents,
    load_phrase_bank,
    write_documents_jsonl,
)
from .errors import BackendError, DiveditError, InvalidArgumentError, ParseError
from .metrics import NddConfig

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BACKEND = 3
EXIT_INPUT = 4
EXIT_OUTPUT = 5

CONFIG_KEYS = (
    "input",
    "format",
    "mode",
    "k",
    "mu",
    "weighting",
    "divergence",
    "temperature",
    "epsilon",
    "top_k",
    "fallback",
    "bank",
    "label_filter",
    "backend_cmd",
    "backend_tcp",
    "reference_corpus",
    "alpha",
    "mask_token",
    "workers",
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="distort",
        description="Rewrite sensitive spans while preserving sentence semantics.",
    )
    parser.add_argument("input", nargs="?", help="annotated documents (JSONL or CoNLL)")
    parser.add_argument("-o", "--output", help="distorted JSONL output path")
    parser.add_argument("--format", choices=("jsonl", "conll"), default="jsonl")
    parser.add_argument("--mode", choices=("generative", "substitutive"), default="substitutive")
    parser.add_argument("--k", type=int, default=8, help="candidates per span")
    parser.add_argument("--mu", type=float, default=1.0, help="exponential weight base, in (0, 1]")
    parser.add_argument("--weighting", choices=("mean", "exponential"), default="mean")
    parser.add_argument("--divergence", choices=("hellinger", "kl"), default="hellinger")
    parser.add_argument("--temperature", type=float, default=1.0)
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--epsilon", type=float, default=1e-8, help="floor probability")
    parser.add_argument("--top-k", type=int, default=128, dest="top_k",
                        help="distribution truncation width")
    parser.add_argument("--fallback", choices=("error", "ppl"), default="error",
                        help="scoring of spans that cover a whole sentence")
    parser.add_argument("--bank", help="phrase bank file (substitutive mode)")
    parser.add_argument("--no-label-filter", dest="label_filter", action="store_false",
                        help="let bank phrases replace spans of any label")
    backend_group = parser.add_mutually_exclusive_group()
    backend_group.add_argument("--backend-cmd", dest="backend_cmd",
                               help="command for a wire-protocol backend child process")
    backend_group.add_argument("--backend-tcp", dest="backend_tcp", metavar="HOST:PORT",
                               help="TCP address of a wire-protocol backend")
    backend_group.add_argument("--reference-corpus", dest="reference_corpus",
                               help="text file (one sentence per line) for the in-tree count backend")
    parser.add_argument("--alpha", type=float, default=0.1,
                        help="reference backend smoothing")
    parser.add_argument("--mask-token", dest="mask_token", default="<mask>",
                        help="mask token string of the remote model")
    parser.add_argument("--manifest", help="manifest path (default: OUTPUT.manifest.json)")
    parser.add_argument("--workers", type=int, default=1)
    parser.add_argument("--replay", help="rerun the configuration recorded in a manifest")
    return parser


def _backend_from_config(config: dict) -> tuple[MlmBackend, object]:
    """Build the configured backend plus a factory for per-worker clones."""
    if config.get("reference_corpus"):
        with open(config["reference_corpus"], encoding="utf-8") as handle:
            corpus = [line.split() for line in handle if line.strip()]
        backend = build_reference_backend(
            corpus, alpha=config["alpha"], top_k=config["top_k"], floor=config["epsilon"]
        )
        return backend, None  # shared: in-process and read-only
    if config.get("backend_cmd"):
        factory = lambda: RemoteBackend(
            command=config["backend_cmd"],
            top_k=config["top_k"],
            mask_token=config["mask_token"],
            floor=config["epsilon"],
        )
        return factory(), factory
    if config.get("backend_tcp"):
        host, _, port = config["backend_tcp"].rpartition(":")
        try:
            address = (host, int(port))
        except ValueError:
            raise BackendError(f"bad --backend-tcp address {config['backend_tcp']!r}")
        factory = lambda: RemoteBackend(
            tcp=address,
            top_k=config["top_k"],
            mask_token=config["mask_token"],
            floor=config["epsilon"],
        )
        return factory(), factory
    raise BackendError("no backend configured")


def _distortion_config(config: dict) -> DistortionConfig:
    return DistortionConfig(
        mode=config["mode"],
        k=config["k"],
        temperature=config["temperature"],
        label_filter=config["label_filter"],
        seed=config["seed"],
        fallback=config["fallback"],
        ndd=NddConfig(
            divergence=config["divergence"],
            weighting=config["weighting"],
            mu=config["mu"],
            epsilon=config["epsilon"],
        ),
    )


def _run(config: dict, output: str, manifest_path: str) -> int:
    started = time.time()
    try:
        cfg = _distortion_config(config)
    except InvalidArgumentError as exc:
        print(f"distort: bad configuration: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        documents = load_documents(config["input"], config["format"])
    except OSError as exc:
        print(f"distort: cannot read input: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ParseError as exc:
        print(f"distort: {exc}", file=sys.stderr)
        return EXIT_INPUT

    try:
        backend, factory = _backend_from_config(config)
    except (OSError, DiveditError) as exc:
        print(f"distort: backend setup failed: {exc}", file=sys.stderr)
        return EXIT_BACKEND

    spawned = [backend]
    local = threading.local()

    def worker_backend() -> MlmBackend:
        if factory is None or config["workers"] <= 1:
            return backend
        if not hasattr(local, "backend"):
            local.backend = factory()
            spawned.append(local.backend)
        return local.backend

    try:
        bank = None
        if config["mode"] == "substitutive":
            if not config.get("bank"):
                print("distort: substitutive mode requires --bank", file=sys.stderr)
                return EXIT_USAGE
            bank = load_phrase_bank(config["bank"], tokenizer=backend.tokenize)

        seed = config["seed"]

        def process(indexed: tuple[int, AnnotatedDocument]) -> dict:
            index, document = indexed
            rng = np.random.default_rng([seed, index])
            return distort_annotated(document, worker_backend(), bank, cfg, rng)

        if config["workers"] > 1:
            with ThreadPoolExecutor(max_workers=config["workers"]) as pool:
                records = list(pool.map(process, enumerate(documents)))
        else:
            records = [process(item) for item in enumerate(documents)]
    except BackendError as exc:
        print(f"distort: backend failed: {exc}", file=sys.stderr)
        return EXIT_BACKEND
    except (OSError, DiveditError) as exc:
        print(f"distort: {exc}", file=sys.stderr)
        return EXIT_INPUT
    finally:
        for instance in spawned:
            instance.close()

    manifest = RunManifest(
        config=config,
        backend=asdict(backend.descriptor),
        seed=seed,
        documents=[
            {"id": record["id"], "spans": record["audit"]} for record in records
        ],
        timing={"started": started, "elapsed_s": time.time() - started},
    )
    try:
        write_documents_jsonl(
            [{k: record[k] for k in ("id", "text", "spans", "audit")} for record in records],
            output,
        )
        with open(manifest_path, "w", encoding="utf-8") as handle:
            handle.write(manifest.to_json() + "\n")
    except OSError as exc:
        print(f"distort: cannot write output: {exc}", file=sys.stderr)
        return EXIT_OUTPUT
    return EXIT_OK


def run_cli(argv: list[str]) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.replay:
        try:
            with open(args.replay, encoding="utf-8") as handle:
                manifest = RunManifest.from_json(handle.read())
        except (OSError, ValueError, KeyError) as exc:
            print(f"distort: cannot load manifest: {exc}", file=sys.stderr)
            return EXIT_INPUT
        config = dict(manifest.config)
        config["seed"] = manifest.seed
        output = args.output or config.get("output")
        if not output:
            parser.error("--replay needs -o/--output (manifest lacks one)")
    else:
        if not args.input or not args.output:
            parser.print_usage(sys.stderr)
            print("distort: input and -o/--output are required", file=sys.stderr)
            return EXIT_USAGE
        if not (args.backend_cmd or args.backend_tcp or args.reference_corpus):
            print(
                "distort: one of --backend-cmd / --backend-tcp / --reference-corpus is required",
                file=sys.stderr,
            )
            return EXIT_USAGE
        config = {key: getattr(args, key) for key in CONFIG_KEYS}
        config["seed"] = args.seed
        output = args.output
    config["output"] = output

    manifest_path = args.manifest or f"{output}.manifest.json"
    return _run(config, output, manifest_path)


def main() -> None:
    sys.exit(run_cli(sys.argv[1:]))


if __name__ == "__main__":
    main()
