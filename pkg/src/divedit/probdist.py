"""Sparse, floored, normalized probability distributions over vocabulary tokens."""

from __future__ import annotations

from collections.abc import Iterable, Mapping

from .errors import InvalidArgumentError

__all__ = ["ProbDist", "DEFAULT_FLOOR", "NORMALIZATION_TOLERANCE"]

DEFAULT_FLOOR = 1e-8
NORMALIZATION_TOLERANCE = 1e-6


class ProbDist:
    """Probability distribution stored as a sparse token -> probability map.

    Stored probabilities are strictly positive and sum to 1 within
    ``NORMALIZATION_TOLERANCE``. Looking up a token outside the stored
    support returns the floor ``eps`` instead of zero, so downstream
    logarithms and ratios are always defined. Entries are kept in
    descending-probability order (ties broken by token string) so iteration
    and sampling are deterministic.
    """

    __slots__ = ("_entries", "floor")

    def __init__(self, entries: Mapping[str, float], floor: float = DEFAULT_FLOOR):
        if floor <= 0.0:
            raise InvalidArgumentError("floor probability must be > 0")
        if not entries:
            raise InvalidArgumentError("a distribution needs at least one entry")
        cleaned = {}
        for token, prob in entries.items():
            p = float(prob)
            if p <= 0.0:
                raise InvalidArgumentError(
                    f"stored probability for {token!r} must be > 0, got {p}"
                )
            cleaned[token] = p
        total = sum(cleaned.values())
        if abs(total - 1.0) > NORMALIZATION_TOLERANCE:
            raise InvalidArgumentError(
                f"stored probabilities sum to {total}, expected 1 +/- "
                f"{NORMALIZATION_TOLERANCE}; normalize first (ProbDist.from_weights)"
            )
        ordered = sorted(cleaned.items(), key=lambda kv: (-kv[1], kv[0]))
        self._entries = dict(ordered)
        self.floor = float(floor)

    @classmethod
    def from_weights(
        cls,
        weights: Mapping[str, float],
        floor: float = DEFAULT_FLOOR,
        top_k: int | None = None,
    ) -> "ProbDist":
        """Normalize non-negative weights into a distribution.

        With ``top_k``, keeps the k heaviest tokens (ties broken by token
        string) and renormalizes over the kept set.
        """
        positive = {t: float(w) for t, w in weights.items() if w > 0.0}
        if not positive:
            raise InvalidArgumentError("no positive weights to normalize")
        if top_k is not None:
            if top_k < 1:
                raise InvalidArgumentError("top_k must be >= 1")
            kept = sorted(positive.items(), key=lambda kv: (-kv[1], kv[0]))[:top_k]
            positive = dict(kept)
        total = sum(positive.values())
        return cls({t: w / total for t, w in positive.items()}, floor=floor)

    def prob(self, token: str) -> float:
        """Stored probability of ``token``, or the floor if absent."""
        return self._entries.get(token, self.floor)

    def items(self) -> Iterable[tuple[str, float]]:
        return self._entries.items()

    def tokens(self) -> Iterable[str]:
        return self._entries.keys()

    def as_dict(self) -> dict[str, float]:
        return dict(self._entries)

    def truncated(self, top_k: int) -> "ProbDist":
        """Top-k truncation with renormalization over the kept entries."""
        return ProbDist.from_weights(self._entries, floor=self.floor, top_k=top_k)

    def __len__(self):
        return len(self._entries)

    def __contains__(self, token):
        return token in self._entries

    def __eq__(self, other):
        if not isinstance(other, ProbDist):
            return NotImplemented
        return self._entries == other._entries and self.floor == other.floor

    def __repr__(self):
        head = ", ".join(f"{t!r}: {p:.4g}" for t, p in list(self.items())[:4])
        extra = "" if len(self) <= 4 else f", ... ({len(self)} entries)"
        return f"ProbDist({{{head}{extra}}}, floor={self.floor:g})"
