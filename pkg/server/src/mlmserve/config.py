"""Server configuration."""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True, slots=True)
class ServerConfig:
    """What to serve and how.

    model: Hugging Face model name or local path of a masked LM.
    listen: "stdio" or "tcp".
    port: TCP port (tcp mode only).
    top_k: default distribution truncation when a request omits top_k.
    max_length: hard cap on input length including special tokens.
    device: torch device string.
    """

    model: str
    listen: str = "stdio"
    port: int | None = None
    top_k: int = 128
    max_length: int = 512
    device: str = "cpu"

    def __post_init__(self):
        if self.listen not in ("stdio", "tcp"):
            raise ValueError("listen must be 'stdio' or 'tcp'")
        if self.listen == "tcp" and not self.port:
            raise ValueError("tcp mode needs a port")
        if self.top_k < 1:
            raise ValueError("top_k must be >= 1")
        if self.max_length < 2:
            raise ValueError("max_length must be >= 2")
