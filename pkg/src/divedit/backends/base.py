"""Backend interface and descriptor."""

from __future__ import annotations

import abc
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, UnsupportedCapabilityError
from ..probdist import ProbDist
from ..textmodel import TokenSequence

__all__ = ["BackendDescriptor", "MlmBackend"]


@dataclass(frozen=True, slots=True)
class BackendDescriptor:
    """What a backend is and how it truncates its distributions.

    ``vocab_size`` is None for remote backends: the wire protocol has no
    introspection request, so the dictionary size is unknown client-side.
    ``mask_token`` is the string the backend's tokenizer treats as its mask;
    span masking inserts it verbatim.
    """

    kind: str
    top_k: int
    vocab_size: int | None = None
    mask_token: str = "[MASK]"

    def __post_init__(self):
        if self.kind not in ("reference", "remote"):
            raise InvalidArgumentError(f"unknown backend kind {self.kind!r}")
        if self.top_k < 1:
            raise InvalidArgumentError("top_k must be >= 1")
        if self.vocab_size is not None and self.top_k > self.vocab_size:
            raise InvalidArgumentError(
                f"top_k {self.top_k} exceeds vocabulary size {self.vocab_size}"
            )


class MlmBackend(abc.ABC):
    """Provider of masked-position distributions and sentence embeddings.

    Implementations must be deterministic for a fixed input and safe for
    concurrent queries.
    """

    @property
    @abc.abstractmethod
    def descriptor(self) -> BackendDescriptor: ...

    @abc.abstractmethod
    def mlm_distribution(self, sentence: TokenSequence, index: int) -> ProbDist:
        """Predictive distribution for ``index`` with that position masked.

        Truncated to the descriptor's top_k and renormalized. Independent of
        the token currently at ``index``.
        """

    def sentence_embedding(self, sentence: TokenSequence) -> np.ndarray:
        raise UnsupportedCapabilityError(
            f"{self.descriptor.kind} backend does not provide embeddings"
        )

    def tokenize(self, text: str) -> TokenSequence:
        raise UnsupportedCapabilityError(
            f"{self.descriptor.kind} backend does not provide tokenization"
        )

    def close(self) -> None:
        """Release held resources; in-process backends have none."""

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
        return False

    def _check_index(self, sentence: TokenSequence, index: int) -> None:
        if not 0 <= index < len(sentence):
            raise InvalidArgumentError(
                f"position {index} out of range for {len(sentence)}-token sentence"
            )
