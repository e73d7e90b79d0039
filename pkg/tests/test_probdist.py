import pytest

from divedit.errors import InvalidArgumentError
from divedit.probdist import ProbDist


def test_floored_lookup_never_zero():
    dist = ProbDist({"a": 0.6, "b": 0.4}, floor=1e-8)
    assert dist.prob("a") == 0.6
    assert dist.prob("missing") == 1e-8
    assert dist.prob("missing") == dist.prob("other-missing")


def test_rejects_nonpositive_entries_and_bad_sum():
    with pytest.raises(InvalidArgumentError):
        ProbDist({"a": 0.5, "b": 0.0})
    with pytest.raises(InvalidArgumentError):
        ProbDist({"a": 0.5, "b": 0.3})
    with pytest.raises(InvalidArgumentError):
        ProbDist({})
    with pytest.raises(InvalidArgumentError):
        ProbDist({"a": 1.0}, floor=0.0)


def test_from_weights_normalizes():
    dist = ProbDist.from_weights({"a": 3.0, "b": 1.0})
    assert dist.prob("a") == pytest.approx(0.75)
    assert abs(sum(p for _, p in dist.items()) - 1.0) < 1e-12


def test_top_k_truncation_renormalizes_and_breaks_ties_by_token():
    dist = ProbDist.from_weights({"a": 4.0, "b": 2.0, "c": 2.0, "d": 1.0}, top_k=3)
    # c and b tie; b wins on token order. d is cut.
    assert set(dist.as_dict()) == {"a", "b", "c"}
    assert dist.prob("a") == pytest.approx(0.5)
    assert dist.prob("d") == dist.floor


def test_entries_iterate_in_descending_probability_order():
    dist = ProbDist.from_weights({"z": 1.0, "a": 5.0, "m": 3.0})
    assert [t for t, _ in dist.items()] == ["a", "m", "z"]


def test_truncated_view_matches_from_weights():
    dist = ProbDist.from_weights({"a": 5.0, "b": 3.0, "c": 2.0}).truncated(2)
    expected = ProbDist.from_weights({"a": 5.0, "b": 3.0}, top_k=2)
    assert set(dist.as_dict()) == set(expected.as_dict())
    for token, prob in expected.items():
        assert dist.prob(token) == pytest.approx(prob, abs=1e-15)
