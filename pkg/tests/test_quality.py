from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pkgraph.quality import (
    FuzzyWeights,
    NoEvidence,
    PolarityLabel,
    QualityAttribute,
    QualityScore,
    SentimentCounts,
    aggregate,
    fuzzy_score,
)

counts_strategy = st.builds(
    SentimentCounts,
    low=st.integers(min_value=0, max_value=10_000),
    medium=st.integers(min_value=0, max_value=10_000),
    high=st.integers(min_value=0, max_value=10_000),
)


def test_worked_example():
    score = fuzzy_score(SentimentCounts(low=5, medium=10, high=100))
    assert score == pytest.approx(105 / 115, abs=1e-12)


@pytest.mark.parametrize("k", [1, 2, 7, 1000])
def test_symmetric_counts_score_half(k):
    assert fuzzy_score(SentimentCounts(low=k, medium=k, high=k)) == pytest.approx(0.5)


def test_endpoints():
    assert fuzzy_score(SentimentCounts(low=1)) == 0.0
    assert fuzzy_score(SentimentCounts(high=1)) == 1.0


def test_no_evidence():
    with pytest.raises(NoEvidence):
        fuzzy_score(SentimentCounts())


def test_negative_counts_rejected():
    with pytest.raises(ValueError):
        SentimentCounts(low=-1)


@given(counts_strategy)
def test_range_with_default_weights(counts):
    if counts.total == 0:
        return
    assert 0.0 <= fuzzy_score(counts) <= 1.0


@given(counts_strategy)
def test_monotone_in_high_and_low(counts):
    if counts.total == 0:
        return
    base = fuzzy_score(counts)
    more_high = fuzzy_score(SentimentCounts(counts.low, counts.medium, counts.high + 1))
    more_low = fuzzy_score(SentimentCounts(counts.low + 1, counts.medium, counts.high))
    assert more_high >= base - 1e-12
    assert more_low <= base + 1e-12
    # strict when the other categories are non-empty
    if counts.low + counts.medium > 0:
        assert more_high > base
    if counts.medium + counts.high > 0:
        assert more_low < base


@given(counts_strategy, st.integers(min_value=1, max_value=50))
def test_scale_invariance(counts, factor):
    if counts.total == 0:
        return
    scaled = SentimentCounts(counts.low * factor, counts.medium * factor, counts.high * factor)
    assert fuzzy_score(scaled) == pytest.approx(fuzzy_score(counts), abs=1e-12)


def brute_force_score(low, medium, high, weights=FuzzyWeights()):
    """Independent oracle: expand the weighted mean over the individual
    statements instead of using the closed form."""
    values = [weights.low] * low + [weights.medium] * medium + [weights.high] * high
    return sum(values) / len(values)


def test_brute_force_equivalence_small_counts():
    for low in range(31):
        for medium in range(31 - low):
            for high in range(31 - low - medium):
                if low + medium + high == 0:
                    continue
                counts = SentimentCounts(low, medium, high)
                assert fuzzy_score(counts) == pytest.approx(
                    brute_force_score(low, medium, high), abs=1e-12)


def test_custom_weights_change_range():
    counts = SentimentCounts(low=1, medium=0, high=1)
    weights = FuzzyWeights(low=-1.0, medium=0.0, high=2.0)
    assert fuzzy_score(counts, weights) == pytest.approx(0.5)


def test_aggregate_counts_and_score():
    statements = [
        (PolarityLabel.POSITIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY}),
        (PolarityLabel.POSITIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY,
                                  QualityAttribute.RELIABILITY}),
        (PolarityLabel.POSITIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY}),
        (PolarityLabel.NEGATIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY}),
    ]
    score = aggregate("torch", QualityAttribute.PERFORMANCE_EFFICIENCY, statements)
    assert (score.counts.low, score.counts.medium, score.counts.high) == (1, 0, 3)
    assert score.score == pytest.approx(0.75)


def test_aggregate_filters_other_attributes():
    statements = [(PolarityLabel.POSITIVE, {QualityAttribute.RELIABILITY})]
    with pytest.raises(NoEvidence):
        aggregate("torch", QualityAttribute.SECURITY, statements)


def test_aggregate_single_neutral():
    statements = [(PolarityLabel.NEUTRAL, {QualityAttribute.USABILITY})]
    score = aggregate("torch", QualityAttribute.USABILITY, statements)
    assert score.score == pytest.approx(0.5)


def test_quality_score_requires_evidence():
    with pytest.raises(NoEvidence):
        QualityScore(package="torch", attribute=QualityAttribute.SECURITY,
                     counts=SentimentCounts())


def test_score_never_stale():
    score = QualityScore(package="torch", attribute=QualityAttribute.SECURITY,
                         counts=SentimentCounts(low=1, high=3))
    assert score.score == pytest.approx(0.75)
