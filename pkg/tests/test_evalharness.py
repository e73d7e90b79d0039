import json
import math
import random

import numpy as np
import pytest

from divedit.backends import build_reference_backend
from divedit.errors import (
    InvalidArgumentError,
    ParseError,
    UndefinedCorrelationError,
)
from divedit.evalharness import (
    Lexicon,
    LexiconEntry,
    Metric,
    ScoredPair,
    fetch_ratio_default,
    filter_by_overlap,
    lcs_overlap_ratio,
    lcs_pairs,
    load_sts_tsv,
    make_perturbation_pairs,
    pair_ndd,
    pearson,
    run_benchmark,
    standard_metrics,
)
from divedit.metrics import NddConfig
from oracles import oracle_lcs, oracle_pearson


class TestLcsOverlap:
    def test_identical(self):
        assert lcs_overlap_ratio(("a", "b", "c"), ("a", "b", "c")) == 1.0

    def test_disjoint(self):
        assert lcs_overlap_ratio(("a", "b"), ("x", "y")) == 0.0

    def test_partial_against_dp_oracle(self):
        left, right = ["a", "b", "c", "d"], ["a", "x", "c"]
        assert lcs_overlap_ratio(left, right) == pytest.approx(2 / 3)
        assert lcs_overlap_ratio(left, right) == oracle_lcs(left, right) / min(
            len(left), len(right)
        )

    def test_symmetric(self):
        rng = random.Random(5)
        for _ in range(50):
            left = [rng.choice("abcd") for _ in range(rng.randint(1, 12))]
            right = [rng.choice("abcd") for _ in range(rng.randint(1, 12))]
            assert lcs_overlap_ratio(left, right) == lcs_overlap_ratio(right, left)

    def test_subsequence_gives_one(self):
        assert lcs_overlap_ratio(("a", "c"), ("a", "b", "c", "d")) == 1.0

    def test_pairs_form_a_common_subsequence(self):
        left, right = ("a", "b", "c", "d", "b"), ("b", "c", "x", "b")
        pairs = lcs_pairs(left, right)
        assert len(pairs) == oracle_lcs(left, right)
        for (i1, j1), (i2, j2) in zip(pairs, pairs[1:]):
            assert i1 < i2 and j1 < j2
        assert all(left[i] == right[j] for i, j in pairs)


class TestPearson:
    def test_perfect_linear(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert pearson(xs, [2 * x + 1 for x in xs]) == pytest.approx(1.0, abs=1e-12)

    def test_perfect_inverse(self):
        xs = [1.0, 2.0, 3.0, 4.0]
        assert pearson(xs, [-x for x in xs]) == pytest.approx(-1.0, abs=1e-12)

    def test_random_points_match_independent_formula(self):
        rng = random.Random(3)
        for _ in range(30):
            xs = [rng.uniform(-5, 5) for _ in range(5)]
            ys = [rng.uniform(-5, 5) for _ in range(5)]
            assert pearson(xs, ys) == pytest.approx(oracle_pearson(xs, ys), abs=1e-12)

    def test_zero_variance_rejected(self):
        with pytest.raises(UndefinedCorrelationError):
            pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])

    def test_length_validation(self):
        with pytest.raises(InvalidArgumentError):
            pearson([1.0], [1.0])
        with pytest.raises(InvalidArgumentError):
            pearson([1.0, 2.0], [1.0])


def tiny_lexicon():
    return Lexicon(
        [
            LexiconEntry("good", synonyms=("fine",), antonyms=("bad",),
                         pos="ADJ", lemma="good"),
            LexiconEntry("fine", synonyms=("good",), antonyms=("bad",),
                         pos="ADJ", lemma="fine"),
            LexiconEntry("bad", synonyms=("awful",), antonyms=("good",),
                         pos="ADJ", lemma="bad"),
            LexiconEntry("awful", pos="ADJ", lemma="bad"),
            LexiconEntry("day", pos="NOUN", lemma="day"),
            LexiconEntry("week", pos="NOUN", lemma="week"),
            LexiconEntry("runs", pos="VERB", lemma="run",
                         terms=("ran", "running")),
            LexiconEntry("ran", pos="VERB", lemma="run", terms=("runs", "running")),
            LexiconEntry("walks", pos="VERB", lemma="walk", terms=("walked",)),
            LexiconEntry("walked", pos="VERB", lemma="walk", terms=("walks",)),
        ]
    )


class TestLexicon:
    def test_own_antonym_rejected(self):
        with pytest.raises(InvalidArgumentError):
            LexiconEntry("odd", antonyms=("odd",))

    def test_jsonl_round_trip(self, tmp_path):
        path = tmp_path / "lex.jsonl"
        path.write_text(
            '{"word":"good","synonyms":["fine"],"antonyms":["bad"],"pos":"ADJ","lemma":"good"}\n'
            '{"word":"runs","pos":"VERB","terms":["ran"]}\n'
        )
        lexicon = Lexicon.from_jsonl(path)
        assert lexicon.get("good").synonyms == ("fine",)
        assert lexicon.get("runs").terms == ("ran",)

    def test_jsonl_errors_name_line(self, tmp_path):
        path = tmp_path / "lex.jsonl"
        path.write_text('{"word":"a"}\n{oops}\n')
        with pytest.raises(ParseError, match=":2"):
            Lexicon.from_jsonl(path)


class TestMakePerturbationPairs:
    def test_single_eligible_word_synonym_antonym(self):
        rng = np.random.default_rng(0)
        pairs = make_perturbation_pairs(
            [("a", "good", "day")], tiny_lexicon(), "syn_ant", 1.0, rng
        )
        positive, negative = pairs
        assert positive.gold == 1.0 and negative.gold == 0.0
        assert positive.right == ("a", "fine", "day")
        assert negative.right == ("a", "bad", "day")

    def test_ceiling_replacement_count(self):
        lexicon = tiny_lexicon()
        sentence = tuple(["good"] * 10)
        rng = np.random.default_rng(1)
        pairs = make_perturbation_pairs([sentence], lexicon, "syn_ant", 0.2, rng)
        positive = pairs[0]
        changed = sum(1 for a, b in zip(positive.left, positive.right) if a != b)
        assert changed == 2  # ceil(0.2 * 10)

    def test_term_kind_replaces_verbs_only(self):
        lexicon = tiny_lexicon()
        sentence = ("good", "day", "runs", "walks")
        rng = np.random.default_rng(2)
        pairs = make_perturbation_pairs([sentence], lexicon, "term", 1.0, rng)
        positive = pairs[0]
        # both verbs replaced, nothing else
        assert positive.right[0] == "good" and positive.right[1] == "day"
        assert positive.right[2] != "runs" and positive.right[3] != "walks"
        assert positive.right[2] in lexicon.get("runs").terms
        negative = pairs[1]
        assert negative.right[2] not in ("runs",) + lexicon.get("runs").terms

    def test_sentences_without_eligible_words_skipped(self):
        rng = np.random.default_rng(3)
        pairs = make_perturbation_pairs(
            [("day", "week"), ("a", "good", "day")], tiny_lexicon(), "syn_ant", 1.0, rng
        )
        assert len(pairs) == 2  # only the second sentence produced a pair

    def test_unusable_relation_rejected(self):
        lexicon = Lexicon([LexiconEntry("day", pos="NOUN")])
        with pytest.raises(InvalidArgumentError):
            make_perturbation_pairs([("day",)], lexicon, "syn_ant", 0.5,
                                    np.random.default_rng(0))

    def test_lemma_kind(self):
        lexicon = tiny_lexicon()
        rng = np.random.default_rng(4)
        pairs = make_perturbation_pairs([("bad", "day")], lexicon, "lemma", 1.0, rng)
        positive = pairs[0]
        # "awful" shares the lemma "bad"
        assert positive.right == ("awful", "day")

    def test_default_ratios(self):
        assert fetch_ratio_default("syn_ant", None) == 0.2
        assert fetch_ratio_default("term", None) == 1.0
        assert fetch_ratio_default("term", 0.5) == 0.5


class TestPairNdd:
    @pytest.fixture
    def backend(self):
        # third sentence breaks the cat/dog context symmetry
        return build_reference_backend(
            ["the cat sat on the mat", "the dog sat on the rug",
             "the cat sat on the rug"],
            alpha=0.1,
            top_k=8,
        )

    def test_identical_sentences_zero(self, backend):
        tokens = ("the", "cat", "sat")
        assert pair_ndd(tokens, tokens, backend) == pytest.approx(0.0, abs=1e-12)

    def test_single_swap_positive(self, backend):
        left = ("the", "cat", "sat", "on", "the", "mat")
        right = ("the", "dog", "sat", "on", "the", "mat")
        assert pair_ndd(left, right, backend, NddConfig(divergence="kl")) > 0.0

    def test_disjoint_pair_scores_zero_neighbors(self, backend):
        assert pair_ndd(("a", "b"), ("x", "y"), backend) == 0.0


class TestRunBenchmark:
    def make_pairs(self):
        # two buckets; scores affine in gold, so correlation is exactly 1
        pairs = []
        for ratio, gold, score in [
            (0.55, 1.0, 0.9), (0.55, 0.0, 0.1), (0.52, 1.0, 0.9), (0.58, 0.0, 0.1),
            (0.85, 1.0, 0.9), (0.85, 0.0, 0.1),
        ]:
            pair = ScoredPair(("a",), ("b",), gold=gold, overlap_ratio=ratio)
            pair.scores["toy"] = score
            pairs.append(pair)
        return pairs

    def test_prefilled_scores_are_used_and_buckets_are_exclusive(self):
        metric = Metric("toy", lambda l, r: 1 / 0, "similarity")
        report = run_benchmark(self.make_pairs(), [metric], buckets=10)
        entry = report["metrics"]["toy"]
        assert entry["overall"] == pytest.approx(1.0, abs=1e-12)
        counts = [bucket["count"] for bucket in entry["per_bucket"]]
        assert sum(counts) == 6
        assert counts[5] == 4 and counts[8] == 2
        for bucket in entry["per_bucket"]:
            if bucket["count"] >= 2:
                assert bucket["pearson"] == pytest.approx(1.0, abs=1e-12)

    def test_bucket_of_085_is_08_09(self):
        pair = ScoredPair(("a",), ("b",), gold=1.0, overlap_ratio=0.85)
        pair.scores["toy"] = 1.0
        other = ScoredPair(("a",), ("b",), gold=0.0, overlap_ratio=0.85)
        other.scores["toy"] = 0.0
        report = run_benchmark([pair, other], [Metric("toy", lambda l, r: 0.0)], 10)
        buckets = report["metrics"]["toy"]["per_bucket"]
        assert buckets[8]["lo"] == pytest.approx(0.8)
        assert buckets[8]["count"] == 2

    def test_ratio_one_lands_in_last_bucket(self):
        pairs = [
            ScoredPair(("a",), ("a",), gold=1.0),
            ScoredPair(("a",), ("b",), gold=0.0),
        ]
        for pair, score in zip(pairs, (1.0, 0.0)):
            pair.scores["toy"] = score
        report = run_benchmark(pairs, [Metric("toy", lambda l, r: 0.0)], 10)
        buckets = report["metrics"]["toy"]["per_bucket"]
        assert buckets[9]["count"] == 1  # the identical pair has ratio 1.0

    def test_dissimilarity_negated_before_correlation(self):
        pairs = self.make_pairs()
        # flip scores: now lower = more similar, a dissimilarity
        for pair in pairs:
            pair.scores["dis"] = 1.0 - pair.scores["toy"]
        metric = Metric("dis", lambda l, r: 1 / 0, "dissimilarity")
        report = run_benchmark(pairs, [metric], buckets=10)
        assert report["metrics"]["dis"]["overall"] == pytest.approx(1.0, abs=1e-12)

    def test_sparse_bucket_reports_null(self):
        report = run_benchmark(self.make_pairs(), [Metric("toy", lambda l, r: 0.0)], 10)
        buckets = report["metrics"]["toy"]["per_bucket"]
        assert buckets[0]["pearson"] is None  # empty bucket
        assert buckets[8]["pearson"] is not None

    def test_computes_missing_scores_with_standard_metrics(self):
        backend = build_reference_backend(
            ["the cat sat on the mat", "the dog sat on the rug",
             "the cat sat on the rug"],
            alpha=0.1,
            top_k=8,
        )
        pairs = [
            ScoredPair(("the", "cat", "sat"), ("the", "cat", "sat"), gold=1.0),
            ScoredPair(("the", "cat", "sat"), ("the", "dog", "sat"), gold=0.5),
            ScoredPair(("the", "cat", "sat"), ("rug", "rug", "rug"), gold=0.0),
        ]
        metrics = standard_metrics(backend)
        report = run_benchmark(pairs, metrics, buckets=10)
        assert set(report["metrics"]) == {"delta_ppl", "cosine", "ndd", "ndd+cosine"}
        for pair in pairs:
            assert set(pair.scores) == {"delta_ppl", "cosine", "ndd", "ndd+cosine"}
        assert json.dumps(report)  # machine-readable

    def test_report_is_json_serializable(self):
        report = run_benchmark(self.make_pairs(), [Metric("toy", lambda l, r: 0.0)], 5)
        json.dumps(report)


class TestStsLoading:
    def test_load_and_filter(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text(
            "5.0\tthe cat sat\tthe cat sat\n"
            "1.0\tthe cat sat\tdogs bark loud\n"
        )
        pairs = load_sts_tsv(path)
        assert pairs[0].gold == 5.0
        assert pairs[0].overlap_ratio == 1.0
        kept = filter_by_overlap(pairs, 0.8)
        assert len(kept) == 1

    def test_bad_field_count(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("5.0\tonly one sentence\n")
        with pytest.raises(ParseError, match=":1"):
            load_sts_tsv(path)

    def test_bad_score(self, tmp_path):
        path = tmp_path / "pairs.tsv"
        path.write_text("high\ta b\tc d\n")
        with pytest.raises(ParseError):
            load_sts_tsv(path)
