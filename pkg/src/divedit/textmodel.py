"""Sentences, spans, edits, and neighbor alignment between an original and
an edited sentence.

All types are immutable values and safe to share between threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import InvalidSpanError

__all__ = [
    "TokenSequence",
    "Span",
    "SpanEdit",
    "NeighborAlignment",
    "apply_edit",
    "align_neighbors",
    "token_span_for_chars",
]


@dataclass(frozen=True, slots=True)
class TokenSequence:
    """A tokenized sentence, optionally with character offsets into its source.

    Tokens are whatever unit the model backend produces (words or subwords);
    positions in every operation of this package refer to indices into
    ``tokens``. ``offsets`` holds per-token (start, end) character ranges and
    is absent for synthetic sentences that never existed as raw text.
    """

    tokens: tuple[str, ...]
    offsets: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "tokens", tuple(self.tokens))
        if not self.tokens:
            raise ValueError("a sentence must contain at least one token")
        if any(t == "" for t in self.tokens):
            raise ValueError("tokens must be non-empty strings")
        if self.offsets is not None:
            offsets = tuple((int(s), int(e)) for s, e in self.offsets)
            object.__setattr__(self, "offsets", offsets)
            if len(offsets) != len(self.tokens):
                raise ValueError("offsets must match tokens one-to-one")
            prev_end = 0
            for start, end in offsets:
                if end <= start:
                    raise ValueError(f"offset ({start}, {end}) is empty or reversed")
                if start < prev_end:
                    raise ValueError("offsets must be non-overlapping and ordered")
                prev_end = end

    def __len__(self):
        return len(self.tokens)

    def __iter__(self):
        return iter(self.tokens)


@dataclass(frozen=True, slots=True)
class Span:
    """Half-open token range [start, end) within a sentence."""

    start: int
    end: int

    def __post_init__(self):
        if self.start < 0 or self.end <= self.start:
            raise InvalidSpanError(f"invalid span [{self.start}, {self.end})")

    def __len__(self):
        return self.end - self.start

    def check_within(self, sentence: TokenSequence) -> None:
        if self.end > len(sentence):
            raise InvalidSpanError(
                f"span [{self.start}, {self.end}) out of bounds for "
                f"{len(sentence)}-token sentence"
            )

    def covers(self, sentence: TokenSequence) -> bool:
        return self.start == 0 and self.end == len(sentence)


@dataclass(frozen=True, slots=True)
class SpanEdit:
    """Replacement of a token span by a (possibly empty) token list.

    An empty replacement denotes deletion; the type permits it, but the
    distortion pipeline only ever substitutes.
    """

    span: Span
    replacement: tuple[str, ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "replacement", tuple(self.replacement))
        if any(t == "" for t in self.replacement):
            raise ValueError("replacement tokens must be non-empty strings")

    @property
    def length_delta(self) -> int:
        return len(self.replacement) - len(self.span)


@dataclass(frozen=True, slots=True)
class NeighborAlignment:
    """Index pairs (position in the original, position in the edited
    sentence) for every token left untouched by an edit, in order."""

    pairs: tuple[tuple[int, int], ...]

    def __len__(self):
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)


def apply_edit(sentence: TokenSequence, edit: SpanEdit) -> TokenSequence:
    """Apply a span edit, producing the edited sentence.

    The result is prefix + replacement + suffix and has length
    ``n - len(span) + len(replacement)``. Offsets are dropped: the edited
    sentence is synthetic.
    """
    edit.span.check_within(sentence)
    tokens = (
        sentence.tokens[: edit.span.start]
        + edit.replacement
        + sentence.tokens[edit.span.end :]
    )
    if not tokens:
        raise InvalidSpanError("edit deletes the entire sentence")
    return TokenSequence(tokens)


def align_neighbors(sentence: TokenSequence, edit: SpanEdit) -> NeighborAlignment:
    """Pair up the positions of unedited tokens before and after an edit.

    Positions left of the span are unchanged; positions right of it shift by
    the edit's length delta. Empty when the span covers the whole sentence.
    """
    edit.span.check_within(sentence)
    delta = edit.length_delta
    pairs = [(i, i) for i in range(edit.span.start)]
    pairs += [(i, i + delta) for i in range(edit.span.end, len(sentence))]
    return NeighborAlignment(tuple(pairs))


def token_span_for_chars(sentence: TokenSequence, char_start: int, char_end: int) -> Span:
    """Map a character range to the minimal token span covering it.

    Partial overlap with a token extends the span to that whole token:
    entity annotations rarely align with subword boundaries.
    """
    if sentence.offsets is None:
        raise InvalidSpanError("sentence has no character offsets")
    if char_end <= char_start:
        raise InvalidSpanError(f"empty character range ({char_start}, {char_end})")
    start_tok = None
    end_tok = None
    for idx, (s, e) in enumerate(sentence.offsets):
        if e > char_start and s < char_end:
            if start_tok is None:
                start_tok = idx
            end_tok = idx + 1
    if start_tok is None:
        raise InvalidSpanError(
            f"character range ({char_start}, {char_end}) covers no token"
        )
    return Span(start_tok, end_tok)
