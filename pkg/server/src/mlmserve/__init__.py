"""Wire-protocol model server: masked-position distributions, sentence
embeddings, and tokenization over newline-delimited JSON."""

from .config import ServerConfig
from .service import MlmService

__version__ = "0.1.0"

__all__ = ["ServerConfig", "MlmService", "__version__"]
