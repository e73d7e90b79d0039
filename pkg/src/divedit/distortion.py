"""Span rewriting: generative (left-to-right masked-LM sampling) and
substitutive (phrase bank) candidate generation, with minimal-perturbance
selection.

Each span gets k candidate rewrites; every candidate is scored by the
neighboring distribution divergence it would cause, and the lowest-scoring
one wins (ties go to the earliest draw, for reproducibility).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .backends.base import MlmBackend
from .errors import EmptyBankError, InvalidArgumentError, NoNeighborsError
from .metrics import NddConfig, NddReport, delta_ppl, ndd
from .textmodel import Span, SpanEdit, TokenSequence, align_neighbors, apply_edit

__all__ = [
    "PhraseBank",
    "CandidateResult",
    "DistortionConfig",
    "mask_span",
    "generate_candidate",
    "score_candidates",
    "distort_span",
    "distort_document",
]

DEFAULT_CANDIDATE_COUNT = 8

FALLBACKS = ("error", "ppl")
MODES = ("generative", "substitutive")


@dataclass(frozen=True, slots=True)
class PhraseBank:
    """Pre-collected replacement phrases, optionally labeled by entity type."""

    phrases: tuple[tuple[tuple[str, ...], str | None], ...]

    def __post_init__(self):
        normalized = []
        for tokens, label in self.phrases:
            tokens = tuple(tokens)
            if not tokens or any(t == "" for t in tokens):
                raise InvalidArgumentError("bank phrases need at least one non-empty token")
            normalized.append((tokens, label))
        object.__setattr__(self, "phrases", tuple(normalized))

    def __len__(self):
        return len(self.phrases)

    def filtered(self, label: str | None) -> list[tuple[int, tuple[str, ...]]]:
        """(bank index, tokens) pairs whose label matches; None matches all."""
        if label is None:
            return [(i, tokens) for i, (tokens, _) in enumerate(self.phrases)]
        return [
            (i, tokens)
            for i, (tokens, phrase_label) in enumerate(self.phrases)
            if phrase_label == label
        ]


@dataclass(frozen=True, slots=True)
class CandidateResult:
    """A candidate rewrite with its score and provenance.

    ``origin`` is "generated", "bank:<index>", or "original". Exactly one of
    ``ndd`` / ``fallback_score`` is set; the latter only on whole-sentence
    spans scored by perplexity delta under fallback="ppl".
    """

    replacement: tuple[str, ...]
    ndd: NddReport | None
    origin: str
    fallback_score: float | None = None

    def __post_init__(self):
        if (self.ndd is None) == (self.fallback_score is None):
            raise InvalidArgumentError("exactly one of ndd / fallback_score must be set")
        if self.ndd is not None and self.ndd.total < 0.0:
            raise InvalidArgumentError("candidate divergence total cannot be negative")

    @property
    def score(self) -> float:
        return self.ndd.total if self.ndd is not None else self.fallback_score


@dataclass(frozen=True, slots=True)
class DistortionConfig:
    """Candidate generation and selection settings.

    k is the number of candidates drawn per span (default 8); temperature
    scales generative sampling sharpness; label_filter restricts bank phrases
    to the span's entity label; fallback chooses what to do when a span
    covers the whole sentence ("error", or "ppl" to score candidates by
    perplexity delta instead).
    """

    mode: str = "substitutive"
    k: int = DEFAULT_CANDIDATE_COUNT
    temperature: float = 1.0
    label_filter: bool = True
    seed: int = 0
    fallback: str = "error"
    ndd: NddConfig = field(default_factory=NddConfig)

    def __post_init__(self):
        if self.mode not in MODES:
            raise InvalidArgumentError(f"mode must be one of {MODES}")
        if self.k < 1:
            raise InvalidArgumentError("candidate count k must be >= 1")
        if self.temperature <= 0.0:
            raise InvalidArgumentError("temperature must be > 0")
        if self.fallback not in FALLBACKS:
            raise InvalidArgumentError(f"fallback must be one of {FALLBACKS}")


def mask_span(sentence: TokenSequence, span: Span, length: int, backend: MlmBackend) -> TokenSequence:
    """Replace a span by ``length`` copies of the backend's mask token."""
    if length < 1:
        raise InvalidArgumentError("mask length must be >= 1")
    mask = backend.descriptor.mask_token
    return apply_edit(sentence, SpanEdit(span, (mask,) * length))


def generate_candidate(
    sentence: TokenSequence,
    span: Span,
    length: int,
    backend: MlmBackend,
    rng: np.random.Generator,
    temperature: float = 1.0,
) -> tuple[str, ...]:
    """Sample a replacement by filling masked positions left to right.

    Each position's distribution conditions on the tokens sampled so far:
    the sampled token is written into the sentence before the next position
    is predicted. Sampling uses temperature scaling in log space, so small
    temperatures converge to argmax without underflow.
    """
    if temperature <= 0.0:
        raise InvalidArgumentError("temperature must be > 0")
    current = mask_span(sentence, span, length, backend)
    sampled = []
    for position in range(span.start, span.start + length):
        dist = backend.mlm_distribution(current, position)
        tokens = list(dist.tokens())
        logits = np.array([math.log(p) / temperature for _, p in dist.items()])
        logits -= logits.max()
        weights = np.exp(logits)
        weights /= weights.sum()
        draw = rng.random()
        acc = 0.0
        choice = len(tokens) - 1
        for idx, w in enumerate(weights):
            acc += w
            if draw < acc:
                choice = idx
                break
        token = tokens[choice]
        sampled.append(token)
        current = apply_edit(current, SpanEdit(Span(position, position + 1), (token,)))
    return tuple(sampled)


def _score_edit(
    sentence: TokenSequence,
    span: Span,
    replacement: tuple[str, ...],
    origin: str,
    backend: MlmBackend,
    cfg: DistortionConfig,
) -> CandidateResult:
    edit = SpanEdit(span, replacement)
    if len(align_neighbors(sentence, edit)) == 0:
        if cfg.fallback != "ppl":
            raise NoNeighborsError(
                "span covers the whole sentence; rerun with fallback='ppl' "
                "to score such spans by perplexity delta"
            )
        score = delta_ppl(sentence, apply_edit(sentence, edit), backend)
        return CandidateResult(replacement, ndd=None, origin=origin, fallback_score=score)
    report = ndd(sentence, edit, backend, cfg.ndd)
    return CandidateResult(replacement, ndd=report, origin=origin)


def _draw_candidates(
    sentence: TokenSequence,
    span: Span,
    bank: PhraseBank | None,
    backend: MlmBackend,
    cfg: DistortionConfig,
    rng: np.random.Generator,
    label: str | None,
) -> list[tuple[tuple[str, ...], str]]:
    """Candidate (replacement, origin) pairs, in draw order."""
    if cfg.mode == "generative":
        length = len(span)
        return [
            (generate_candidate(sentence, span, length, backend, rng, cfg.temperature), "generated")
            for _ in range(cfg.k)
        ]
    if bank is None or len(bank) == 0:
        raise EmptyBankError("substitutive mode requires a non-empty phrase bank")
    pool = bank.filtered(label if cfg.label_filter else None)
    if not pool:
        raise EmptyBankError(f"no bank phrase carries label {label!r}")
    order = rng.permutation(len(pool))[: cfg.k]
    return [(pool[i][1], f"bank:{pool[i][0]}") for i in order]


def score_candidates(
    sentence: TokenSequence,
    span: Span,
    candidates: list[tuple[tuple[str, ...], str]],
    backend: MlmBackend,
    cfg: DistortionConfig,
) -> list[CandidateResult]:
    """Score (replacement, origin) pairs against one sentence, in order."""
    return [
        _score_edit(sentence, span, tuple(replacement), origin, backend, cfg)
        for replacement, origin in candidates
    ]


def _argmin_by_draw(results: list[CandidateResult]) -> CandidateResult:
    best = results[0]
    for result in results[1:]:
        if result.score < best.score:
            best = result
    return best


def distort_span(
    sentence: TokenSequence,
    span: Span,
    bank: PhraseBank | None,
    backend: MlmBackend,
    cfg: DistortionConfig,
    label: str | None = None,
    rng: np.random.Generator | None = None,
) -> tuple[TokenSequence, CandidateResult]:
    """Rewrite one span with the least-perturbing of k candidates.

    Generative candidates keep the span's original length; substitutive
    candidates keep each phrase's own length. Returns the edited sentence
    and the winning candidate's audit record.
    """
    span.check_within(sentence)
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    drawn = _draw_candidates(sentence, span, bank, backend, cfg, rng, label)
    results = score_candidates(sentence, span, drawn, backend, cfg)
    winner = _argmin_by_draw(results)
    return apply_edit(sentence, SpanEdit(span, winner.replacement)), winner


def distort_document(
    document: TokenSequence,
    spans: list[tuple[Span, str | None]],
    bank: PhraseBank | None,
    backend: MlmBackend,
    cfg: DistortionConfig,
    rng: np.random.Generator | None = None,
) -> tuple[TokenSequence, list[CandidateResult]]:
    """Rewrite several spans left to right, re-basing later spans after each
    length-changing edit. Spans must be sorted and non-overlapping; each edit
    is scored against the current (already partially rewritten) sentence.
    """
    previous_end = 0
    for span, _ in spans:
        span.check_within(document)
        if span.start < previous_end:
            raise InvalidArgumentError(
                f"spans overlap or are unsorted at [{span.start}, {span.end})"
            )
        previous_end = span.end
    if rng is None:
        rng = np.random.default_rng(cfg.seed)
    current = document
    offset = 0
    results = []
    for span, label in spans:
        shifted = Span(span.start + offset, span.end + offset)
        current, winner = distort_span(current, shifted, bank, backend, cfg, label, rng)
        offset += len(winner.replacement) - len(span)
        results.append(winner)
    return current, results
