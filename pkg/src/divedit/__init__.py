"""divedit: rewrite sensitive text spans while preserving sentence semantics.

Candidate rewrites are scored by the divergence they induce in a masked
language model's predictive distributions at the unedited neighboring
positions; the least-perturbing candidate wins.
"""

from .backends import (
    BackendDescriptor,
    MlmBackend,
    ReferenceBackend,
    RemoteBackend,
    build_reference_backend,
)
from .distortion import (
    CandidateResult,
    DistortionConfig,
    PhraseBank,
    distort_document,
    distort_span,
    generate_candidate,
    mask_span,
)
from .errors import (
    BackendError,
    DiveditError,
    EmptyBankError,
    InvalidArgumentError,
    InvalidSpanError,
    NoNeighborsError,
    ParseError,
    UndefinedCorrelationError,
    UnsupportedCapabilityError,
)
from .kernels import KERNEL_BACKEND
from .metrics import (
    NddConfig,
    NddReport,
    cosine_similarity,
    delta_ppl,
    distance_weights,
    ensemble_score,
    hellinger,
    kl_divergence,
    ndd,
    perplexity,
)
from .probdist import ProbDist
from .textmodel import (
    NeighborAlignment,
    Span,
    SpanEdit,
    TokenSequence,
    align_neighbors,
    apply_edit,
    token_span_for_chars,
)

__version__ = "0.1.0"

__all__ = [
    "BackendDescriptor",
    "BackendError",
    "CandidateResult",
    "DistortionConfig",
    "DiveditError",
    "EmptyBankError",
    "InvalidArgumentError",
    "InvalidSpanError",
    "KERNEL_BACKEND",
    "MlmBackend",
    "NddConfig",
    "NddReport",
    "NeighborAlignment",
    "NoNeighborsError",
    "ParseError",
    "PhraseBank",
    "ProbDist",
    "ReferenceBackend",
    "RemoteBackend",
    "Span",
    "SpanEdit",
    "TokenSequence",
    "UndefinedCorrelationError",
    "UnsupportedCapabilityError",
    "align_neighbors",
    "apply_edit",
    "build_reference_backend",
    "cosine_similarity",
    "delta_ppl",
    "distance_weights",
    "distort_document",
    "distort_span",
    "ensemble_score",
    "generate_candidate",
    "hellinger",
    "kl_divergence",
    "mask_span",
    "ndd",
    "perplexity",
    "token_span_for_chars",
    "__version__",
]
