"""Masked-LM backends: providers of masked-position predictive distributions
and sentence embeddings."""

from .base import BackendDescriptor, MlmBackend
from .reference import ReferenceBackend, build_reference_backend
from .remote import RemoteBackend

__all__ = [
    "BackendDescriptor",
    "MlmBackend",
    "ReferenceBackend",
    "build_reference_backend",
    "RemoteBackend",
]
