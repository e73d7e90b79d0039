"""Sentence-level metrics: pseudo-perplexity, embedding cosine, sparse
divergences, distance weighting, neighboring distribution divergence, and the
divergence+cosine ensemble.

Neighboring distribution divergence (NDD) measures how much an edit perturbs
the rest of the sentence: for every unedited position, compare the masked-LM
predictive distribution before and after the edit, then sum the per-position
divergences under a distance-based or uniform weighting. An edit that leaves
the sentence's meaning alone barely moves the neighbors' distributions.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from . import kernels
from .backends.base import MlmBackend
from .errors import InvalidArgumentError, NoNeighborsError
from .probdist import DEFAULT_FLOOR, ProbDist
from .textmodel import (
    NeighborAlignment,
    Span,
    SpanEdit,
    TokenSequence,
    align_neighbors,
    apply_edit,
)

__all__ = [
    "NddConfig",
    "NddReport",
    "perplexity",
    "delta_ppl",
    "cosine_similarity",
    "kl_divergence",
    "hellinger",
    "distance_weights",
    "ndd",
    "ensemble_score",
    "DEFAULT_ENSEMBLE_RATIO",
]

DEFAULT_ENSEMBLE_RATIO = 0.0025

DIVERGENCES = ("kl", "hellinger")
WEIGHTINGS = ("exponential", "mean")


@dataclass(frozen=True, slots=True)
class NddConfig:
    """Scoring configuration.

    divergence: "kl" (unbounded, the original formulation) or "hellinger"
        (bounded to [0, 1], keeping totals bounded too).
    weighting: "exponential" decays per-neighbor weight as mu**distance from
        the edited span; "mean" averages uniformly over neighbors.
    mu: exponential decay base, in (0, 1]; 1.0 keeps every weight at 1.
    ensemble_ratio: weight on the cosine term when combining with an
        embedding similarity; 0 disables the ensemble.
    epsilon: floor probability for out-of-support lookups.
    """

    divergence: str = "hellinger"
    weighting: str = "mean"
    mu: float = 1.0
    ensemble_ratio: float = DEFAULT_ENSEMBLE_RATIO
    epsilon: float = DEFAULT_FLOOR

    def __post_init__(self):
        if self.divergence not in DIVERGENCES:
            raise InvalidArgumentError(f"divergence must be one of {DIVERGENCES}")
        if self.weighting not in WEIGHTINGS:
            raise InvalidArgumentError(f"weighting must be one of {WEIGHTINGS}")
        if not 0.0 < self.mu <= 1.0:
            raise InvalidArgumentError(f"mu must be in (0, 1], got {self.mu}")
        if self.ensemble_ratio < 0.0:
            raise InvalidArgumentError("ensemble_ratio must be >= 0")
        if self.epsilon <= 0.0:
            raise InvalidArgumentError("epsilon must be > 0")

    def with_(self, **changes) -> "NddConfig":
        return replace(self, **changes)


@dataclass(frozen=True, slots=True)
class NddReport:
    """Total divergence plus the per-neighbor audit trail.

    ``per_position`` rows are (neighbor index in the original sentence,
    divergence, weight) in ascending index order; ``total`` is exactly the
    sum of weight * divergence over those rows.
    """

    total: float
    per_position: tuple[tuple[int, float, float], ...] = field(default=())

    def recompute_total(self) -> float:
        acc = 0.0
        for _, div, weight in self.per_position:
            acc += weight * div
        return acc


def perplexity(sentence: TokenSequence, backend: MlmBackend) -> float:
    """Average negative log probability of each token under one-at-a-time
    masking (pseudo-perplexity). Lookups are floored, so the value is finite."""
    total = 0.0
    for i, token in enumerate(sentence.tokens):
        total -= math.log(backend.mlm_distribution(sentence, i).prob(token))
    return total / len(sentence)


def delta_ppl(
    sentence_x: TokenSequence, sentence_y: TokenSequence, backend: MlmBackend
) -> float:
    """Absolute pseudo-perplexity difference between two sentences."""
    return abs(perplexity(sentence_y, backend) - perplexity(sentence_x, backend))


def cosine_similarity(
    sentence_x: TokenSequence, sentence_y: TokenSequence, backend: MlmBackend
) -> float:
    """Cosine of the backend's sentence embeddings; 0 when either norm is 0."""
    ex = backend.sentence_embedding(sentence_x)
    ey = backend.sentence_embedding(sentence_y)
    nx = float(np.linalg.norm(ex))
    ny = float(np.linalg.norm(ey))
    if nx == 0.0 or ny == 0.0:
        return 0.0
    return float(np.dot(ex, ey) / (nx * ny))


def kl_divergence(d_edited: ProbDist, d_original: ProbDist, eps: float | None = None) -> float:
    """KL(d_edited || d_original) over the union of stored supports.

    Out-of-support lookups use the eps floor; no implicit tail term beyond
    the stored entries. Clamped at 0 against floating-point cancellation.
    """
    if eps is None:
        eps = d_original.floor
    return kernels.kl_div(d_edited.as_dict(), d_original.as_dict(), eps)


def hellinger(d: ProbDist, d_prime: ProbDist, eps: float | None = None) -> float:
    """Hellinger distance between two distributions, in [0, 1].

    Symmetric; 0 for identical stored entries, 1 for (effectively) disjoint
    point masses. Computed over the union of stored supports with eps floors
    and clamped into the unit interval, which floor mass could otherwise
    minutely overshoot.
    """
    if eps is None:
        eps = d.floor
    return kernels.hellinger_div(d.as_dict(), d_prime.as_dict(), eps)


def distance_weights(
    alignment: NeighborAlignment, span: Span, cfg: NddConfig
) -> list[float]:
    """Per-neighbor weights for an alignment around an edited span.

    Exponential weighting gives each neighbor mu**distance where distance is
    1 at either edge of the span and grows outward; mean weighting gives
    1/len(alignment) uniformly. Empty alignment yields an empty list.
    """
    if len(alignment) == 0:
        return []
    if cfg.weighting == "mean":
        w = 1.0 / len(alignment)
        return [w] * len(alignment)
    weights = []
    for original_index, _ in alignment:
        if original_index < span.start:
            distance = span.start - original_index
        else:
            distance = original_index - span.end + 1
        weights.append(cfg.mu**distance)
    return weights


def _divergence_fn(cfg: NddConfig):
    if cfg.divergence == "kl":
        return lambda d_orig, d_edit: kernels.kl_div(
            d_edit.as_dict(), d_orig.as_dict(), cfg.epsilon
        )
    return lambda d_orig, d_edit: kernels.hellinger_div(
        d_orig.as_dict(), d_edit.as_dict(), cfg.epsilon
    )


def ndd(
    sentence: TokenSequence,
    edit: SpanEdit,
    backend: MlmBackend,
    cfg: NddConfig | None = None,
) -> NddReport:
    """Neighboring distribution divergence of one span edit.

    For every unedited position, query the backend's predictive distribution
    in the original and in the edited sentence, take the configured
    divergence (KL uses the edited side as left argument), and sum under the
    configured weights in ascending neighbor order. Total is 0 when the
    replacement equals the original span.
    """
    cfg = cfg or NddConfig()
    alignment = align_neighbors(sentence, edit)
    if len(alignment) == 0:
        raise NoNeighborsError(
            "edit covers the whole sentence; no neighboring positions to score"
        )
    edited = apply_edit(sentence, edit)
    weights = distance_weights(alignment, edit.span, cfg)
    div = _divergence_fn(cfg)
    rows = []
    total = 0.0
    for (orig_idx, edit_idx), weight in zip(alignment, weights):
        d_orig = backend.mlm_distribution(sentence, orig_idx)
        d_edit = backend.mlm_distribution(edited, edit_idx)
        value = div(d_orig, d_edit)
        rows.append((orig_idx, value, weight))
        total += weight * value
    return NddReport(total=total, per_position=tuple(rows))


def ensemble_score(ndd_total: float, cos_sim: float, ratio: float) -> float:
    """Combined dissimilarity: divergence total plus ratio-weighted cosine
    dissimilarity (1 - similarity). Both terms vanish on identical sentences;
    ratio 0 returns the divergence total unchanged."""
    if ratio < 0.0:
        raise InvalidArgumentError("ensemble ratio must be >= 0")
    return ndd_total + ratio * (1.0 - cos_sim)
