"""Tiny hand-steerable backends used as oracles in metric tests."""

from __future__ import annotations

import numpy as np

from divedit.backends.base import BackendDescriptor, MlmBackend
from divedit.probdist import ProbDist
from divedit.textmodel import TokenSequence


class CluelessOracleBackend(MlmBackend):
    """Assigns probability 1 to whatever token is actually there."""

    def __init__(self):
        self._descriptor = BackendDescriptor(kind="reference", top_k=1)

    @property
    def descriptor(self):
        return self._descriptor

    def mlm_distribution(self, sentence: TokenSequence, index: int) -> ProbDist:
        self._check_index(sentence, index)
        return ProbDist({sentence.tokens[index]: 1.0})


class UniformBackend(MlmBackend):
    """Uniform distribution over a fixed vocabulary, regardless of input."""

    def __init__(self, vocab):
        self.vocab = tuple(vocab)
        self._descriptor = BackendDescriptor(
            kind="reference", top_k=len(self.vocab), vocab_size=len(self.vocab)
        )
        self._dist = ProbDist({t: 1.0 / len(self.vocab) for t in self.vocab})

    @property
    def descriptor(self):
        return self._descriptor

    def mlm_distribution(self, sentence: TokenSequence, index: int) -> ProbDist:
        self._check_index(sentence, index)
        return self._dist


class FixedEmbeddingBackend(MlmBackend):
    """Sentence embeddings looked up from a table keyed by the token tuple."""

    def __init__(self, table):
        self.table = {tuple(k): np.asarray(v, dtype=np.float64) for k, v in table.items()}
        self._descriptor = BackendDescriptor(kind="reference", top_k=1)

    @property
    def descriptor(self):
        return self._descriptor

    def mlm_distribution(self, sentence, index):
        raise NotImplementedError("embedding-only stub")

    def sentence_embedding(self, sentence: TokenSequence) -> np.ndarray:
        return self.table[sentence.tokens]
