"""Deterministic in-tree backend built from neighbor co-occurrence counts.

Every expected value in the test suite is hand-computable from the training
corpus: the predictive distribution for a masked position is the
Laplace-smoothed count of tokens observed between the same left and right
neighbors, falling back to one-sided bigram counts at sentence edges (and to
unigram counts for single-token sentences). Long-range context is ignored on
purpose.
"""

from __future__ import annotations

from collections import Counter
from collections.abc import Iterable, Sequence

import numpy as np

from ..errors import InvalidArgumentError
from ..probdist import ProbDist
from ..textmodel import TokenSequence
from .base import BackendDescriptor, MlmBackend

__all__ = ["ReferenceBackend", "build_reference_backend"]

MASK_TOKEN = "[MASK]"


class ReferenceBackend(MlmBackend):
    """Count-based masked-LM stand-in, exactly reproducible from
    (corpus, alpha, top_k)."""

    def __init__(
        self,
        corpus: Sequence[TokenSequence],
        alpha: float = 0.1,
        top_k: int = 128,
        floor: float = 1e-8,
    ):
        if not corpus:
            raise InvalidArgumentError("corpus must contain at least one sentence")
        if alpha <= 0.0:
            raise InvalidArgumentError("smoothing alpha must be > 0")
        if top_k < 1:
            raise InvalidArgumentError("top_k must be >= 1")
        self.alpha = float(alpha)
        self.floor = float(floor)

        self._between: dict[tuple[str, str], Counter] = {}
        self._after: dict[str, Counter] = {}
        self._before: dict[str, Counter] = {}
        self._unigram: Counter = Counter()
        for sentence in corpus:
            toks = sentence.tokens if isinstance(sentence, TokenSequence) else tuple(sentence)
            n = len(toks)
            for i, tok in enumerate(toks):
                self._unigram[tok] += 1
                if i + 1 < n:
                    self._after.setdefault(tok, Counter())[toks[i + 1]] += 1
                    self._before.setdefault(toks[i + 1], Counter())[tok] += 1
                if 0 < i < n - 1:
                    key = (toks[i - 1], toks[i + 1])
                    self._between.setdefault(key, Counter())[tok] += 1

        self.vocab: tuple[str, ...] = tuple(sorted(self._unigram))
        top_k = min(top_k, len(self.vocab))
        self._descriptor = BackendDescriptor(
            kind="reference",
            top_k=top_k,
            vocab_size=len(self.vocab),
            mask_token=MASK_TOKEN,
        )
        self._token_index = {t: i for i, t in enumerate(self.vocab)}
        self._dist_cache: dict[tuple, ProbDist] = {}
        self._vector_cache: dict[str, np.ndarray] = {}

    @property
    def descriptor(self) -> BackendDescriptor:
        return self._descriptor

    def context_counts(self, sentence: TokenSequence, index: int) -> Counter:
        """Raw continuation counts for the context around ``index``.

        The token at ``index`` itself never participates: it is masked.
        """
        self._check_index(sentence, index)
        toks = sentence.tokens
        n = len(toks)
        if n == 1:
            return self._unigram
        if index == 0:
            return self._before.get(toks[1], Counter())
        if index == n - 1:
            return self._after.get(toks[n - 2], Counter())
        return self._between.get((toks[index - 1], toks[index + 1]), Counter())

    def _cache_key(self, sentence: TokenSequence, index: int):
        toks = sentence.tokens
        n = len(toks)
        if n == 1:
            return ("unigram",)
        if index == 0:
            return ("before", toks[1])
        if index == n - 1:
            return ("after", toks[n - 2])
        return ("between", toks[index - 1], toks[index + 1])

    def mlm_distribution(self, sentence: TokenSequence, index: int) -> ProbDist:
        self._check_index(sentence, index)
        key = self._cache_key(sentence, index)
        cached = self._dist_cache.get(key)
        if cached is not None:
            return cached
        counts = self.context_counts(sentence, index)
        weights = {t: counts.get(t, 0) + self.alpha for t in self.vocab}
        dist = ProbDist.from_weights(
            weights, floor=self.floor, top_k=self._descriptor.top_k
        )
        self._dist_cache[key] = dist
        return dist

    def token_vector(self, token: str) -> np.ndarray:
        """Smoothed adjacency-count vector for one token (corpus-vocab axis)."""
        cached = self._vector_cache.get(token)
        if cached is not None:
            return cached
        vec = np.full(len(self.vocab), self.alpha, dtype=np.float64)
        for neighbor, count in self._after.get(token, {}).items():
            vec[self._token_index[neighbor]] += count
        for neighbor, count in self._before.get(token, {}).items():
            vec[self._token_index[neighbor]] += count
        self._vector_cache[token] = vec
        return vec

    def sentence_embedding(self, sentence: TokenSequence) -> np.ndarray:
        mean = np.zeros(len(self.vocab), dtype=np.float64)
        for token in sentence.tokens:
            mean += self.token_vector(token)
        mean /= len(sentence)
        norm = float(np.linalg.norm(mean))
        return mean / norm if norm > 0.0 else mean

    def tokenize(self, text: str) -> TokenSequence:
        """Whitespace tokenization with character offsets."""
        tokens = []
        offsets = []
        pos = 0
        for piece in text.split():
            start = text.index(piece, pos)
            tokens.append(piece)
            offsets.append((start, start + len(piece)))
            pos = start + len(piece)
        if not tokens:
            raise InvalidArgumentError("cannot tokenize empty text")
        return TokenSequence(tuple(tokens), tuple(offsets))


def build_reference_backend(
    corpus: Iterable[Sequence[str] | TokenSequence | str],
    alpha: float = 0.1,
    top_k: int = 128,
    floor: float = 1e-8,
) -> ReferenceBackend:
    """Construct a :class:`ReferenceBackend`, accepting raw strings
    (whitespace-split), token lists, or TokenSequences."""
    sentences = []
    for item in corpus:
        if isinstance(item, TokenSequence):
            sentences.append(item)
        elif isinstance(item, str):
            sentences.append(TokenSequence(tuple(item.split())))
        else:
            sentences.append(TokenSequence(tuple(item)))
    return ReferenceBackend(sentences, alpha=alpha, top_k=top_k, floor=floor)
