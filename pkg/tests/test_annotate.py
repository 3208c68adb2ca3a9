from __future__ import annotations

import sys
from collections import Counter

import pytest
from hypothesis import given
from hypothesis import strategies as st

from pkgraph.annotate import (
    AnnotatorError,
    BaselineAnnotator,
    CapabilityError,
    EmptyIntent,
    InvalidInput,
    PipeAnnotator,
    Tie,
    WeightedTerm,
    majority_vote,
)
from pkgraph.quality import PolarityLabel, QualityAttribute


@pytest.fixture(scope="module")
def baseline():
    return BaselineAnnotator()


def test_polarity_positive(baseline):
    assert baseline.classify_polarity("this library is excellent and fast") is PolarityLabel.POSITIVE


def test_polarity_negative(baseline):
    assert baseline.classify_polarity("it crashes constantly, terrible") is PolarityLabel.NEGATIVE


def test_polarity_neutral_without_lexicon_hits(baseline):
    assert baseline.classify_polarity("released in 2020") is PolarityLabel.NEUTRAL


def test_polarity_empty_input(baseline):
    with pytest.raises(InvalidInput):
        baseline.classify_polarity("   ")


def test_quality_mapping(baseline):
    attrs = baseline.map_quality_attributes("training is fast but it crashes on exit")
    assert attrs == {QualityAttribute.PERFORMANCE_EFFICIENCY, QualityAttribute.RELIABILITY}


def test_quality_mapping_no_hits(baseline):
    assert baseline.map_quality_attributes("hello world") == set()


def test_quality_mapping_empty(baseline):
    with pytest.raises(InvalidInput):
        baseline.map_quality_attributes("")


def test_intent_terms(baseline):
    terms = [t.term for t in baseline.extract_intent_terms(
        "I need a web framework for a REST API with good documentation")]
    assert set(terms) >= {"web framework", "rest api", "good documentation"}


def test_intent_default_weight(baseline):
    terms = baseline.extract_intent_terms("graph database")
    assert terms == [WeightedTerm(term="graph database", weight=1.0)]


def test_intent_stopword_only_story(baseline):
    with pytest.raises(EmptyIntent):
        baseline.extract_intent_terms("I need it for the and with")


def test_intent_deterministic(baseline):
    story = "fast json parser with schema validation"
    assert baseline.extract_intent_terms(story) == baseline.extract_intent_terms(story)


def test_baseline_outputs_are_pure(baseline):
    text = "stable but slow, great documentation"
    for _ in range(3):
        assert baseline.classify_polarity(text) is baseline.classify_polarity(text)
        assert baseline.map_quality_attributes(text) == baseline.map_quality_attributes(text)


def test_capability_enforcement(baseline):
    # the baseline does not declare the topics capability surface at all,
    # and a stripped-down annotator must refuse what it does not declare
    class PolarityOnly(BaselineAnnotator):
        id = "polarity-only"
        capabilities = frozenset({"polarity"})

    annotator = PolarityOnly()
    assert annotator.classify_polarity("excellent") is PolarityLabel.POSITIVE
    with pytest.raises(CapabilityError):
        annotator.map_quality_attributes("fast")
    with pytest.raises(CapabilityError):
        annotator.extract_intent_terms("a web framework")


def test_weighted_term_validation():
    with pytest.raises(ValueError):
        WeightedTerm(term="x", weight=0.0)
    with pytest.raises(ValueError):
        WeightedTerm(term="", weight=1.0)


# ---------------------------------------------------------------------------
# Majority voting
# ---------------------------------------------------------------------------

def test_vote_mode():
    winner, agreement = majority_vote(["pos", "pos", "neg"])
    assert winner == "pos"
    assert agreement == pytest.approx(2 / 3)


def test_vote_tie_abstain():
    with pytest.raises(Tie):
        majority_vote(["pos", "neg"], tie_policy="abstain")


def test_vote_tie_first_annotator():
    winner, agreement = majority_vote(["neg", "pos"], tie_policy="first_annotator")
    assert winner == "neg"
    assert agreement == pytest.approx(0.5)


def test_vote_unanimous():
    assert majority_vote(["a", "a", "a", "a"]) == ("a", 1.0)


def test_vote_empty_rejected():
    with pytest.raises(ValueError):
        majority_vote([])


@given(st.lists(st.sampled_from(["a", "b", "c"]), min_size=1, max_size=30))
def test_vote_matches_brute_force(labels):
    counts = Counter(labels)
    top = max(counts.values())
    modal = {label for label, count in counts.items() if count == top}
    if len(modal) > 1:
        with pytest.raises(Tie):
            majority_vote(labels)
        winner, agreement = majority_vote(labels, tie_policy="first_annotator")
        assert winner == next(label for label in labels if label in modal)
    else:
        winner, agreement = majority_vote(labels)
        assert {winner} == modal
    assert agreement == top / len(labels)


# ---------------------------------------------------------------------------
# External adapter protocol
# ---------------------------------------------------------------------------

POLARITY_STUB = (
    "import sys\n"
    "for line in sys.stdin:\n"
    "    text = line.rstrip('\\n').lower()\n"
    "    if 'good' in text:\n"
    "        print('positive', flush=True)\n"
    "    elif 'bad' in text:\n"
    "        print('negative', flush=True)\n"
    "    else:\n"
    "        print('neutral', flush=True)\n"
)

MALFORMED_STUB = (
    "import sys\n"
    "for line in sys.stdin:\n"
    "    print('certainly-positive!', flush=True)\n"
)

ATTRS_STUB = (
    "import sys\n"
    "for line in sys.stdin:\n"
    "    print('security,reliability', flush=True)\n"
)


def test_pipe_annotator_polarity_roundtrip():
    with PipeAnnotator("stub", {"polarity": [sys.executable, "-c", POLARITY_STUB]}) as annotator:
        assert annotator.classify_polarity("a good day") is PolarityLabel.POSITIVE
        assert annotator.classify_polarity("a bad day") is PolarityLabel.NEGATIVE
        assert annotator.classify_polarity("a day") is PolarityLabel.NEUTRAL


def test_pipe_annotator_attribute_list():
    with PipeAnnotator("stub", {"quality_mapping": [sys.executable, "-c", ATTRS_STUB]}) as annotator:
        attrs = annotator.map_quality_attributes("whatever")
        assert attrs == {QualityAttribute.SECURITY, QualityAttribute.RELIABILITY}


def test_pipe_annotator_malformed_response():
    with PipeAnnotator("stub", {"polarity": [sys.executable, "-c", MALFORMED_STUB]}) as annotator:
        with pytest.raises(AnnotatorError):
            annotator.classify_polarity("anything")


def test_pipe_annotator_transport_failure():
    with PipeAnnotator("stub", {"polarity": [sys.executable, "-c", "pass"]}) as annotator:
        with pytest.raises(AnnotatorError):
            annotator.classify_polarity("anything")


def test_pipe_annotator_capability_check():
    with PipeAnnotator("stub", {"polarity": [sys.executable, "-c", POLARITY_STUB]}) as annotator:
        with pytest.raises(CapabilityError):
            annotator.extract_intent_terms("a story")


def test_pipe_annotator_multiline_input_stays_one_request():
    with PipeAnnotator("stub", {"polarity": [sys.executable, "-c", POLARITY_STUB]}) as annotator:
        assert annotator.classify_polarity("good\nbut also\nmore lines") is PolarityLabel.POSITIVE
