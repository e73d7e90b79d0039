"""Model-backed request handlers.

One service instance owns one model and tokenizer. Inference runs in eval
mode under no_grad with a fixed seed at load time; a lock serializes forward
passes so concurrent connections cannot interleave batched state.
"""

from __future__ import annotations

import threading

import torch
from transformers import AutoModelForMaskedLM, AutoTokenizer

from .config import ServerConfig


class RequestError(ValueError):
    """Client-visible failure; the message becomes the error string."""


class MlmService:
    def __init__(self, config: ServerConfig):
        self.config = config
        torch.manual_seed(0)
        self.tokenizer = AutoTokenizer.from_pretrained(config.model)
        self.model = AutoModelForMaskedLM.from_pretrained(config.model)
        self.model.to(config.device)
        self.model.eval()
        self._lock = threading.Lock()

        if self.tokenizer.mask_token_id is None:
            raise ValueError(f"model {config.model!r} has no mask token")
        # ids never returned inside distributions
        self._banned_ids = set(self.tokenizer.all_special_ids)

        self._prefix = []
        self._suffix = []
        cls = self.tokenizer.cls_token_id
        if cls is None:
            cls = self.tokenizer.bos_token_id
        sep = self.tokenizer.sep_token_id
        if sep is None:
            sep = self.tokenizer.eos_token_id
        if cls is not None:
            self._prefix = [cls]
        if sep is not None:
            self._suffix = [sep]

    def _check_length(self, tokens):
        total = len(tokens) + len(self._prefix) + len(self._suffix)
        if total > self.config.max_length:
            raise RequestError("too_long")

    def _input_ids(self, tokens: list[str]) -> list[int]:
        if not tokens or not all(isinstance(t, str) and t for t in tokens):
            raise RequestError("tokens must be a non-empty list of non-empty strings")
        self._check_length(tokens)
        ids = self.tokenizer.convert_tokens_to_ids(tokens)
        unk = self.tokenizer.unk_token_id
        return [unk if i is None else i for i in ids]

    def fill_mask(self, tokens: list[str], mask_index: int, top_k: int | None) -> list[list]:
        """Distribution for ``mask_index`` with that position masked:
        top-k (token, prob) pairs, probabilities descending and renormalized,
        special tokens excluded."""
        ids = self._input_ids(tokens)
        if not isinstance(mask_index, int) or not 0 <= mask_index < len(ids):
            raise RequestError(f"mask_index {mask_index!r} out of range")
        if top_k is None:
            top_k = self.config.top_k
        if not isinstance(top_k, int) or top_k < 1:
            raise RequestError(f"top_k {top_k!r} must be a positive integer")
        ids[mask_index] = self.tokenizer.mask_token_id
        input_ids = torch.tensor(
            [self._prefix + ids + self._suffix], device=self.config.device
        )
        position = mask_index + len(self._prefix)
        with self._lock, torch.no_grad():
            logits = self.model(input_ids=input_ids).logits[0, position]
        probs = torch.softmax(logits.double(), dim=-1)
        for banned in self._banned_ids:
            if banned < probs.shape[0]:
                probs[banned] = 0.0
        k = min(top_k, int((probs > 0).sum()))
        values, indices = torch.topk(probs, k)
        values = values / values.sum()
        pairs = [
            [self.tokenizer.convert_ids_to_tokens(int(i)), float(v)]
            for v, i in zip(values, indices)
        ]
        pairs.sort(key=lambda tp: (-tp[1], tp[0]))
        return pairs

    def embed(self, tokens: list[str]) -> list[float]:
        """Sentence vector: the first position's final hidden state."""
        ids = self._input_ids(tokens)
        input_ids = torch.tensor(
            [self._prefix + ids + self._suffix], device=self.config.device
        )
        with self._lock, torch.no_grad():
            output = self.model(input_ids=input_ids, output_hidden_states=True)
        return [float(v) for v in output.hidden_states[-1][0, 0]]

    def tokenize(self, text: str) -> tuple[list[str], list[list[int]]]:
        """Model-native tokens of raw text plus character offsets."""
        if not isinstance(text, str) or not text.strip():
            raise RequestError("text must be a non-empty string")
        encoding = self.tokenizer(
            text, add_special_tokens=False, return_offsets_mapping=True
        )
        ids = encoding["input_ids"]
        if not ids:
            raise RequestError("text produced no tokens")
        self._check_length(ids)
        tokens = self.tokenizer.convert_ids_to_tokens(ids)
        offsets = [[int(s), int(e)] for s, e in encoding["offset_mapping"]]
        return tokens, offsets
