"""Wire-protocol client for external model servers.

Transport is newline-delimited JSON over a byte stream: either the standard
streams of a child process, or a TCP connection. One JSON object per line;
response ids echo request ids; unknown response fields are ignored. Requests
on one connection are serialized (the protocol has no interleaving), so a
single client is safe to share between threads.
"""

from __future__ import annotations

import json
import shlex
import socket
import subprocess
import threading

import numpy as np

from ..errors import BackendError, UnsupportedCapabilityError
from ..probdist import ProbDist
from ..textmodel import TokenSequence
from .base import BackendDescriptor, MlmBackend

__all__ = ["RemoteBackend"]

UNSUPPORTED_PREFIX = "unsupported_capability"


class RemoteBackend(MlmBackend):
    """Client side of the fill_mask / embed / tokenize protocol."""

    def __init__(
        self,
        command: str | list[str] | None = None,
        tcp: tuple[str, int] | None = None,
        top_k: int = 128,
        mask_token: str = "<mask>",
        floor: float = 1e-8,
        timeout: float = 120.0,
    ):
        if (command is None) == (tcp is None):
            raise BackendError("exactly one of command / tcp must be given")
        self.top_k = int(top_k)
        self.floor = float(floor)
        self.timeout = timeout
        self._descriptor = BackendDescriptor(
            kind="remote", top_k=self.top_k, vocab_size=None, mask_token=mask_token
        )
        self._lock = threading.Lock()
        self._next_id = 0
        self._proc = None
        self._sock = None
        if command is not None:
            argv = shlex.split(command) if isinstance(command, str) else list(command)
            try:
                self._proc = subprocess.Popen(
                    argv,
                    stdin=subprocess.PIPE,
                    stdout=subprocess.PIPE,
                    text=True,
                    bufsize=1,
                )
            except OSError as exc:
                raise BackendError(f"cannot launch backend {argv!r}: {exc}") from exc
            self._reader = self._proc.stdout
            self._writer = self._proc.stdin
        else:
            host, port = tcp
            try:
                self._sock = socket.create_connection((host, port), timeout=timeout)
            except OSError as exc:
                raise BackendError(
                    f"cannot connect to backend at {host}:{port}: {exc}"
                ) from exc
            stream = self._sock.makefile("rw", encoding="utf-8", newline="\n")
            self._reader = stream
            self._writer = stream

    @property
    def descriptor(self) -> BackendDescriptor:
        return self._descriptor

    def _diagnose_death(self) -> str:
        if self._proc is not None and self._proc.poll() is not None:
            return f" (backend process exited with code {self._proc.returncode})"
        return ""

    def _call(self, request: dict) -> dict:
        with self._lock:
            self._next_id += 1
            request_id = self._next_id
            request["id"] = request_id
            line = json.dumps(request, ensure_ascii=False)
            try:
                self._writer.write(line + "\n")
                self._writer.flush()
                response_line = self._reader.readline()
            except (OSError, ValueError) as exc:
                raise BackendError(
                    f"backend I/O failed: {exc}{self._diagnose_death()}"
                ) from exc
        if not response_line:
            raise BackendError(
                f"backend closed the stream{self._diagnose_death()}"
            )
        try:
            response = json.loads(response_line)
        except json.JSONDecodeError as exc:
            raise BackendError(
                f"backend sent invalid JSON: {response_line[:200]!r}"
            ) from exc
        if not isinstance(response, dict):
            raise BackendError(f"backend response is not an object: {response!r}")
        if response.get("id") != request_id:
            raise BackendError(
                f"response id {response.get('id')!r} does not echo request id {request_id}"
            )
        if not response.get("ok"):
            error = str(response.get("error", "unknown error"))
            if error.startswith(UNSUPPORTED_PREFIX):
                raise UnsupportedCapabilityError(error)
            raise BackendError(f"backend error: {error}")
        return response

    def mlm_distribution(self, sentence: TokenSequence, index: int) -> ProbDist:
        self._check_index(sentence, index)
        response = self._call(
            {
                "op": "fill_mask",
                "tokens": list(sentence.tokens),
                "mask_index": index,
                "top_k": self.top_k,
            }
        )
        dist = response.get("dist")
        if not isinstance(dist, list) or not dist:
            raise BackendError(f"fill_mask response carries no distribution: {response!r}")
        try:
            entries = {str(token): float(prob) for token, prob in dist}
        except (TypeError, ValueError) as exc:
            raise BackendError(f"malformed distribution entries: {dist[:5]!r}") from exc
        return ProbDist(entries, floor=self.floor)

    def sentence_embedding(self, sentence: TokenSequence) -> np.ndarray:
        response = self._call({"op": "embed", "tokens": list(sentence.tokens)})
        vector = response.get("vector")
        if not isinstance(vector, list) or not vector:
            raise BackendError(f"embed response carries no vector: {response!r}")
        return np.asarray(vector, dtype=np.float64)

    def tokenize(self, text: str) -> TokenSequence:
        response = self._call({"op": "tokenize", "text": text})
        tokens = response.get("tokens")
        if not isinstance(tokens, list) or not tokens:
            raise BackendError(f"tokenize response carries no tokens: {response!r}")
        offsets = response.get("offsets")
        if offsets is not None:
            offsets = tuple((int(s), int(e)) for s, e in offsets)
        return TokenSequence(tuple(str(t) for t in tokens), offsets)

    def close(self) -> None:
        if self._proc is not None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
            self._proc = None
        if self._sock is not None:
            try:
                self._reader.close()
            except OSError:
                pass
            self._sock.close()
            self._sock = None
