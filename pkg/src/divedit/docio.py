"""Document and phrase-bank ingestion, distorted-corpus emission, and run
manifests.

Annotated documents carry character-level entity spans; the pipeline maps
them to token spans (extending partial overlaps to whole tokens), rewrites
the tokens, and splices the replacement text back so every unedited character
region survives verbatim.
"""

from __future__ import annotations

import json
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from .backends.base import MlmBackend
from .distortion import DistortionConfig, PhraseBank, distort_document
from .errors import EmptyBankError, InvalidArgumentError, ParseError
from .textmodel import Span, TokenSequence, token_span_for_chars

__all__ = [
    "AnnotatedDocument",
    "RunManifest",
    "load_documents",
    "load_phrase_bank",
    "distort_annotated",
    "write_documents_jsonl",
]

MANIFEST_VERSION = 1


@dataclass(frozen=True, slots=True)
class AnnotatedDocument:
    """Raw text with (char_start, char_end, label) sensitive spans."""

    id: str
    text: str
    spans: tuple[tuple[int, int, str | None], ...] = ()

    def __post_init__(self):
        spans = tuple(
            (int(s), int(e), label) for s, e, label in self.spans
        )
        object.__setattr__(self, "spans", spans)
        previous_end = 0
        for start, end, _ in sorted(spans):
            if start < 0 or end > len(self.text) or end <= start:
                raise InvalidArgumentError(
                    f"document {self.id!r}: span ({start}, {end}) out of bounds"
                )
            if start < previous_end:
                raise InvalidArgumentError(
                    f"document {self.id!r}: overlapping spans at ({start}, {end})"
                )
            previous_end = end


def load_documents(path, format: str = "jsonl") -> list[AnnotatedDocument]:
    """Load annotated documents from JSONL or 4-column CoNLL (BIO tags)."""
    if format == "jsonl":
        return _load_jsonl(path)
    if format == "conll":
        return _load_conll(path)
    raise InvalidArgumentError(f"unknown document format {format!r}")


def _load_jsonl(path) -> list[AnnotatedDocument]:
    documents = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc}", path=path, line=lineno) from exc
            if not isinstance(record, dict) or "id" not in record or "text" not in record:
                raise ParseError("record needs 'id' and 'text'", path=path, line=lineno)
            raw_spans = record.get("spans", [])
            try:
                spans = tuple((int(s[0]), int(s[1]), s[2]) for s in raw_spans)
            except (TypeError, ValueError, IndexError) as exc:
                raise ParseError(
                    "spans must be [char_start, char_end, label] triples",
                    path=path,
                    line=lineno,
                ) from exc
            try:
                documents.append(
                    AnnotatedDocument(str(record["id"]), str(record["text"]), spans)
                )
            except InvalidArgumentError as exc:
                raise ParseError(str(exc), path=path, line=lineno) from exc
    return documents


def _load_conll(path) -> list[AnnotatedDocument]:
    """One document per sentence; entities decoded from the 4th (NER) column."""
    documents = []
    tokens: list[str] = []
    tags: list[str] = []

    def flush(lineno):
        if not tokens:
            return
        text = " ".join(tokens)
        offsets = []
        cursor = 0
        for token in tokens:
            offsets.append((cursor, cursor + len(token)))
            cursor += len(token) + 1
        spans = []
        current = None  # (start_tok, end_tok, label)
        for i, tag in enumerate(tags):
            if tag == "O" or tag == "":
                if current:
                    spans.append(current)
                current = None
                continue
            if "-" in tag:
                marker, label = tag.split("-", 1)
            else:
                marker, label = "B", tag
            if marker == "I" and current and current[2] == label:
                current = (current[0], i + 1, label)
            else:
                if current:
                    spans.append(current)
                current = (i, i + 1, label)
        if current:
            spans.append(current)
        char_spans = tuple(
            (offsets[s][0], offsets[e - 1][1], label) for s, e, label in spans
        )
        documents.append(
            AnnotatedDocument(f"{len(documents):06d}", text, char_spans)
        )
        tokens.clear()
        tags.clear()

    with open(path, encoding="utf-8") as handle:
        lineno = 0
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                flush(lineno)
                continue
            if line.startswith("-DOCSTART-"):
                flush(lineno)
                continue
            columns = line.split()
            if len(columns) != 4:
                raise ParseError(
                    f"expected 4 columns (token POS chunk NER), got {len(columns)}",
                    path=path,
                    line=lineno,
                )
            tokens.append(columns[0])
            tags.append(columns[3])
        flush(lineno)
    return documents


def load_phrase_bank(path, tokenizer: Callable[[str], Sequence[str]] | None = None) -> PhraseBank:
    """One phrase per line, optional tab-separated label; blank lines skipped.

    ``tokenizer`` maps a phrase string to tokens (the CLI passes the
    backend's); whitespace splitting is the default.
    """
    phrases = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.rstrip("\n")
            if not line.strip():
                continue
            phrase, _, label = line.partition("\t")
            label = label.strip() or None
            if tokenizer is None:
                tokens = tuple(phrase.split())
            else:
                result = tokenizer(phrase)
                tokens = tuple(result.tokens if isinstance(result, TokenSequence) else result)
            phrases.append((tokens, label))
    if not phrases:
        raise EmptyBankError(f"phrase bank {path} is empty")
    return PhraseBank(tuple(phrases))


def distort_annotated(
    document: AnnotatedDocument,
    backend: MlmBackend,
    bank: PhraseBank | None,
    cfg: DistortionConfig,
    rng: np.random.Generator,
) -> dict:
    """Rewrite one document's sensitive spans; returns the output record.

    The record mirrors the input schema ({"id", "text", "spans"}) with spans
    re-pointed at the replacements, plus per-span audit entries.
    """
    if not document.spans:
        return {"id": document.id, "text": document.text, "spans": [], "audit": []}
    sentence = backend.tokenize(document.text)
    ordered = sorted(document.spans)
    token_spans: list[tuple[Span, str | None]] = []
    for char_start, char_end, label in ordered:
        token_spans.append(
            (token_span_for_chars(sentence, char_start, char_end), label)
        )
    previous_end = 0
    for span, _ in token_spans:
        if span.start < previous_end:
            raise InvalidArgumentError(
                f"document {document.id!r}: spans overlap after extension "
                "to token boundaries"
            )
        previous_end = span.end

    _, winners = distort_document(sentence, token_spans, bank, backend, cfg, rng)

    parts: list[str] = []
    new_spans: list[list] = []
    audit: list[dict] = []
    cursor = 0
    length = 0
    for (span, label), winner in zip(token_spans, winners):
        char_start = sentence.offsets[span.start][0]
        char_end = sentence.offsets[span.end - 1][1]
        kept = document.text[cursor:char_start]
        parts.append(kept)
        length += len(kept)
        replacement_text = " ".join(winner.replacement)
        new_spans.append([length, length + len(replacement_text), label])
        parts.append(replacement_text)
        length += len(replacement_text)
        cursor = char_end
        audit.append(
            {
                "original": document.text[char_start:char_end],
                "replacement": replacement_text,
                "ndd_total": winner.score,
                "origin": winner.origin,
            }
        )
    parts.append(document.text[cursor:])
    return {"id": document.id, "text": "".join(parts), "spans": new_spans, "audit": audit}


def write_documents_jsonl(records: Sequence[dict], path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for record in records:
            handle.write(json.dumps(record, ensure_ascii=False) + "\n")


@dataclass(slots=True)
class RunManifest:
    """Everything needed to reproduce a run: config snapshot, backend
    descriptor, seed, and the per-document audit trail."""

    config: dict
    backend: dict
    seed: int
    documents: list = field(default_factory=list)
    timing: dict = field(default_factory=dict)
    version: int = MANIFEST_VERSION

    def to_json(self) -> str:
        return json.dumps(
            {
                "version": self.version,
                "config": self.config,
                "backend": self.backend,
                "seed": self.seed,
                "documents": self.documents,
                "timing": self.timing,
            },
            ensure_ascii=False,
            indent=2,
        )

    @classmethod
    def from_json(cls, text: str) -> "RunManifest":
        record = json.loads(text)
        return cls(
            config=record["config"],
            backend=record.get("backend", {}),
            seed=int(record["seed"]),
            documents=record.get("documents", []),
            timing=record.get("timing", {}),
            version=int(record.get("version", MANIFEST_VERSION)),
        )
