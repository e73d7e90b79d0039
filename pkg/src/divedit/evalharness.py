"""Metric comparison harness: perturbation-pair construction, pair scoring,
Pearson correlation, and overlap-ratio bucketing.

Constructed tests replace words under a lexical relation (synonym/antonym,
part of speech, verb term forms, lemma) to produce a positive and a negative
variant of each sentence; metrics are then judged by how well they separate
the two. Real similarity files (score<TAB>sentence1<TAB>sentence2) plug into
the same scoring and bucketing path.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .backends.base import MlmBackend
from .errors import InvalidArgumentError, ParseError, UndefinedCorrelationError
from .kernels import lcs_length
from .metrics import NddConfig, cosine_similarity, delta_ppl, ensemble_score
from .textmodel import TokenSequence

__all__ = [
    "LexiconEntry",
    "Lexicon",
    "ScoredPair",
    "Metric",
    "PERTURBATION_KINDS",
    "fetch_ratio_default",
    "make_perturbation_pairs",
    "lcs_overlap_ratio",
    "lcs_pairs",
    "pair_ndd",
    "pearson",
    "standard_metrics",
    "run_benchmark",
    "load_sts_tsv",
    "filter_by_overlap",
]

PERTURBATION_KINDS = ("syn_ant", "pos", "term", "lemma")

DEFAULT_REPLACE_RATIO = 0.2  # one word in five; the term test replaces all verbs


def fetch_ratio_default(kind: str, ratio: float | None) -> float:
    """Resolve the replacement ratio: explicit value wins, otherwise 20%
    (100% for the verb-term test)."""
    if ratio is not None:
        return ratio
    return 1.0 if kind == "term" else DEFAULT_REPLACE_RATIO


@dataclass(frozen=True, slots=True)
class LexiconEntry:
    word: str
    synonyms: tuple[str, ...] = ()
    antonyms: tuple[str, ...] = ()
    pos: str | None = None
    lemma: str | None = None
    terms: tuple[str, ...] = ()

    def __post_init__(self):
        if self.word in self.antonyms:
            raise InvalidArgumentError(f"{self.word!r} listed as its own antonym")


class Lexicon:
    """Per-word lexical records backing the constructed perturbation tests."""

    def __init__(self, entries: Sequence[LexiconEntry]):
        self.entries: dict[str, LexiconEntry] = {}
        for entry in entries:
            self.entries[entry.word] = entry

    def __len__(self):
        return len(self.entries)

    def get(self, word: str) -> LexiconEntry | None:
        return self.entries.get(word)

    def words_with_pos(self, pos: str, same: bool) -> list[str]:
        return [
            w
            for w, e in self.entries.items()
            if e.pos is not None and (e.pos == pos) == same
        ]

    def words_with_lemma(self, lemma: str, same: bool) -> list[str]:
        return [
            w
            for w, e in self.entries.items()
            if e.lemma is not None and (e.lemma == lemma) == same
        ]

    def verbs(self) -> list[str]:
        return [w for w, e in self.entries.items() if e.pos == "VERB"]

    @classmethod
    def from_jsonl(cls, path) -> "Lexicon":
        """Load records like {"word": ..., "synonyms": [], "antonyms": [],
        "pos": ..., "lemma": ..., "terms": []}; absent fields default empty."""
        entries = []
        with open(path, encoding="utf-8") as handle:
            for lineno, line in enumerate(handle, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    record = json.loads(line)
                except json.JSONDecodeError as exc:
                    raise ParseError(f"invalid JSON: {exc}", path=path, line=lineno) from exc
                if "word" not in record:
                    raise ParseError("record lacks 'word'", path=path, line=lineno)
                try:
                    entries.append(
                        LexiconEntry(
                            word=str(record["word"]),
                            synonyms=tuple(record.get("synonyms", ())),
                            antonyms=tuple(record.get("antonyms", ())),
                            pos=record.get("pos"),
                            lemma=record.get("lemma"),
                            terms=tuple(record.get("terms", ())),
                        )
                    )
                except InvalidArgumentError as exc:
                    raise ParseError(str(exc), path=path, line=lineno) from exc
        return cls(entries)


@dataclass(slots=True)
class ScoredPair:
    """A sentence pair with gold similarity, cached metric scores, and the
    token-overlap ratio used for bucketing."""

    left: tuple[str, ...]
    right: tuple[str, ...]
    gold: float
    overlap_ratio: float = field(default=-1.0)
    scores: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        self.left = tuple(self.left)
        self.right = tuple(self.right)
        if self.overlap_ratio < 0.0:
            self.overlap_ratio = lcs_overlap_ratio(self.left, self.right)
        if not 0.0 <= self.overlap_ratio <= 1.0:
            raise InvalidArgumentError("overlap ratio must lie in [0, 1]")


def lcs_overlap_ratio(left: Sequence[str], right: Sequence[str]) -> float:
    """LCS length divided by the shorter sentence's length."""
    if not left or not right:
        raise InvalidArgumentError("overlap ratio needs two non-empty sentences")
    return lcs_length(left, right) / min(len(left), len(right))


def lcs_pairs(left: Sequence[str], right: Sequence[str]) -> list[tuple[int, int]]:
    """Matched (left index, right index) pairs of one longest common
    subsequence, in order."""
    m, n = len(left), len(right)
    table = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if left[i - 1] == right[j - 1]:
                table[i][j] = table[i - 1][j - 1] + 1
            else:
                table[i][j] = max(table[i - 1][j], table[i][j - 1])
    pairs = []
    i, j = m, n
    while i > 0 and j > 0:
        if left[i - 1] == right[j - 1]:
            pairs.append((i - 1, j - 1))
            i -= 1
            j -= 1
        elif table[i - 1][j] >= table[i][j - 1]:
            i -= 1
        else:
            j -= 1
    pairs.reverse()
    return pairs


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Sample Pearson correlation coefficient."""
    if len(xs) != len(ys):
        raise InvalidArgumentError("inputs must have equal length")
    if len(xs) < 2:
        raise InvalidArgumentError("correlation needs at least 2 points")
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    cov = math.fsum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = math.fsum((x - mean_x) ** 2 for x in xs)
    var_y = math.fsum((y - mean_y) ** 2 for y in ys)
    if var_x == 0.0 or var_y == 0.0:
        raise UndefinedCorrelationError("zero variance input")
    return cov / math.sqrt(var_x * var_y)


def _freq_weights(words: Sequence[str], freq: Counter) -> np.ndarray:
    weights = np.array([freq.get(w, 0) + 1.0 for w in words], dtype=np.float64)
    return weights / weights.sum()


def _replacement_candidates(
    word: str, lexicon: Lexicon, kind: str, positive: bool
) -> list[str]:
    entry = lexicon.get(word)
    if entry is None:
        return []
    if kind == "syn_ant":
        return [w for w in (entry.synonyms if positive else entry.antonyms) if w != word]
    if kind == "pos":
        if entry.pos is None:
            return []
        return [w for w in lexicon.words_with_pos(entry.pos, same=positive) if w != word]
    if kind == "term":
        if entry.pos != "VERB":
            return []
        if positive:
            return [w for w in entry.terms if w != word]
        return [
            w
            for w in lexicon.verbs()
            if w != word and w not in entry.terms and word not in (lexicon.get(w).terms if lexicon.get(w) else ())
        ]
    if kind == "lemma":
        if entry.lemma is None:
            return []
        return [w for w in lexicon.words_with_lemma(entry.lemma, same=positive) if w != word]
    raise InvalidArgumentError(f"kind must be one of {PERTURBATION_KINDS}")


def make_perturbation_pairs(
    sentences: Sequence[Sequence[str]],
    lexicon: Lexicon,
    kind: str,
    ratio: float,
    rng: np.random.Generator,
) -> list[ScoredPair]:
    """Build one positive (gold 1) and one negative (gold 0) pair per sentence.

    Eligible words are those with both a positive and a negative replacement
    under ``kind``. ceil(ratio * eligible) positions are replaced, sampled by
    corpus frequency of their word; the replacement word is drawn from the
    relation's candidates, also frequency-weighted (+1 smoothing). Both
    variants replace the same positions. Sentences with no eligible word are
    skipped. The term test applies to verbs only; pass ratio 1.0 for the
    100%-of-verbs setting.
    """
    if kind not in PERTURBATION_KINDS:
        raise InvalidArgumentError(f"kind must be one of {PERTURBATION_KINDS}")
    if not 0.0 < ratio <= 1.0:
        raise InvalidArgumentError("ratio must lie in (0, 1]")
    if not any(
        _replacement_candidates(w, lexicon, kind, True)
        and _replacement_candidates(w, lexicon, kind, False)
        for w in lexicon.entries
    ):
        raise InvalidArgumentError(f"lexicon has no usable {kind} relation")

    freq = Counter()
    for sentence in sentences:
        freq.update(sentence)

    pairs = []
    for sentence in sentences:
        tokens = tuple(sentence)
        eligible = [
            i
            for i, w in enumerate(tokens)
            if _replacement_candidates(w, lexicon, kind, True)
            and _replacement_candidates(w, lexicon, kind, False)
        ]
        if not eligible:
            continue
        n_replace = math.ceil(ratio * len(eligible))
        weights = _freq_weights([tokens[i] for i in eligible], freq)
        chosen = rng.choice(len(eligible), size=n_replace, replace=False, p=weights)
        positions = sorted(eligible[i] for i in chosen)
        positive = list(tokens)
        negative = list(tokens)
        for pos in positions:
            for variant, is_positive in ((positive, True), (negative, False)):
                candidates = _replacement_candidates(tokens[pos], lexicon, kind, is_positive)
                cand_weights = _freq_weights(candidates, freq)
                variant[pos] = candidates[rng.choice(len(candidates), p=cand_weights)]
        pairs.append(ScoredPair(tokens, tuple(positive), gold=1.0))
        pairs.append(ScoredPair(tokens, tuple(negative), gold=0.0))
    return pairs


def pair_ndd(
    left: Sequence[str],
    right: Sequence[str],
    backend: MlmBackend,
    cfg: NddConfig | None = None,
) -> float:
    """Neighboring distribution divergence generalized to arbitrary pairs.

    Tokens matched by a longest common subsequence act as the unedited
    neighbors; everything else counts as edited. Mean weighting averages over
    matched positions; exponential weighting decays with distance to the
    nearest unmatched position on either side. Returns 0 when nothing is
    matched (no neighbors to compare).
    """
    cfg = cfg or NddConfig()
    matched = lcs_pairs(left, right)
    if not matched:
        return 0.0
    left_seq = TokenSequence(tuple(left))
    right_seq = TokenSequence(tuple(right))
    unmatched_left = sorted(set(range(len(left))) - {i for i, _ in matched})
    unmatched_right = sorted(set(range(len(right))) - {j for _, j in matched})

    def weight(i: int, j: int) -> float:
        if cfg.weighting == "mean":
            return 1.0 / len(matched)
        distances = [abs(i - u) for u in unmatched_left]
        distances += [abs(j - u) for u in unmatched_right]
        return cfg.mu ** min(distances) if distances else 1.0

    total = 0.0
    for i, j in matched:
        d_left = backend.mlm_distribution(left_seq, i)
        d_right = backend.mlm_distribution(right_seq, j)
        if cfg.divergence == "kl":
            value = kernels.kl_div(d_right.as_dict(), d_left.as_dict(), cfg.epsilon)
        else:
            value = kernels.hellinger_div(d_left.as_dict(), d_right.as_dict(), cfg.epsilon)
        total += weight(i, j) * value
    return total


@dataclass(frozen=True, slots=True)
class Metric:
    """A named pair scorer. Dissimilarities are negated before correlating
    with gold similarity, so every metric correlates positively when good."""

    name: str
    fn: Callable[[tuple[str, ...], tuple[str, ...]], float]
    kind: str = "similarity"

    def __post_init__(self):
        if self.kind not in ("similarity", "dissimilarity"):
            raise InvalidArgumentError("metric kind must be similarity or dissimilarity")

    def signed(self, value: float) -> float:
        return -value if self.kind == "dissimilarity" else value


def standard_metrics(backend: MlmBackend, cfg: NddConfig | None = None) -> list[Metric]:
    """The four comparison metrics: perplexity delta, embedding cosine,
    divergence, and the divergence+cosine ensemble."""
    cfg = cfg or NddConfig()

    def _ppl(left, right):
        return delta_ppl(TokenSequence(left), TokenSequence(right), backend)

    def _cos(left, right):
        return cosine_similarity(TokenSequence(left), TokenSequence(right), backend)

    def _ndd(left, right):
        return pair_ndd(left, right, backend, cfg)

    def _ensemble(left, right):
        return ensemble_score(_ndd(left, right), _cos(left, right), cfg.ensemble_ratio)

    return [
        Metric("delta_ppl", _ppl, "dissimilarity"),
        Metric("cosine", _cos, "similarity"),
        Metric("ndd", _ndd, "dissimilarity"),
        Metric("ndd+cosine", _ensemble, "dissimilarity"),
    ]


def run_benchmark(
    pairs: Sequence[ScoredPair],
    metrics: Sequence[Metric],
    buckets: int = 10,
) -> dict:
    """Score pairs, correlate against gold overall and per overlap bucket.

    Buckets split [0, 1] evenly; the last bucket is closed so ratio 1.0 lands
    in it and every pair lands in exactly one bucket. Buckets where the
    correlation is undefined (fewer than 2 pairs, or degenerate variance)
    report null.
    """
    if buckets < 1:
        raise InvalidArgumentError("need at least one bucket")
    if len(pairs) < 2:
        raise InvalidArgumentError("need at least two pairs")
    for pair in pairs:
        for metric in metrics:
            if metric.name not in pair.scores:
                pair.scores[metric.name] = metric.fn(pair.left, pair.right)

    bucket_members: list[list[ScoredPair]] = [[] for _ in range(buckets)]
    for pair in pairs:
        index = min(int(pair.overlap_ratio * buckets), buckets - 1)
        bucket_members[index].append(pair)

    gold = [p.gold for p in pairs]
    report: dict = {"n_pairs": len(pairs), "bucket_width": 1.0 / buckets, "metrics": {}}
    for metric in metrics:
        signed = [metric.signed(p.scores[metric.name]) for p in pairs]
        per_bucket = []
        for index, members in enumerate(bucket_members):
            entry = {
                "lo": index / buckets,
                "hi": (index + 1) / buckets,
                "count": len(members),
                "pearson": None,
            }
            if len(members) >= 2:
                try:
                    entry["pearson"] = pearson(
                        [p.gold for p in members],
                        [metric.signed(p.scores[metric.name]) for p in members],
                    )
                except UndefinedCorrelationError:
                    pass
            per_bucket.append(entry)
        try:
            overall = pearson(gold, signed)
        except UndefinedCorrelationError as exc:
            raise UndefinedCorrelationError(
                f"metric {metric.name!r} (or the gold labels) has zero variance "
                f"over {len(pairs)} pairs"
            ) from exc
        report["metrics"][metric.name] = {
            "overall": overall,
            "per_bucket": per_bucket,
        }
    return report


def load_sts_tsv(path) -> list[ScoredPair]:
    """Load score<TAB>sentence1<TAB>sentence2 lines; sentences are
    whitespace-tokenized and gold scores kept as given (0-5 style)."""
    pairs = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 3:
                raise ParseError(
                    f"expected 3 tab-separated fields, got {len(parts)}",
                    path=path,
                    line=lineno,
                )
            score, left, right = parts
            try:
                gold = float(score)
            except ValueError as exc:
                raise ParseError(f"bad score {score!r}", path=path, line=lineno) from exc
            left_tokens = tuple(left.split())
            right_tokens = tuple(right.split())
            if not left_tokens or not right_tokens:
                raise ParseError("empty sentence", path=path, line=lineno)
            pairs.append(ScoredPair(left_tokens, right_tokens, gold=gold))
    return pairs


def filter_by_overlap(pairs: Sequence[ScoredPair], min_ratio: float = 0.8) -> list[ScoredPair]:
    """Keep pairs whose token overlap ratio is at least ``min_ratio``."""
    return [p for p in pairs if p.overlap_ratio >= min_ratio]
