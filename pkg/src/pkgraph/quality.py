"""Fuzzy aggregation of community review evidence into quality scores.

Review statements are polarity-classified and mapped to product-quality
attributes elsewhere; this module turns the resulting low/medium/high
evidence counts into a normalized score in [0, 1] via a weighted mean.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, Tuple

from pkgraph.errors import PkgraphError


class NoEvidence(PkgraphError):
    """No relevant statements exist; distinct from a genuine 0.0 score."""


class QualityAttribute(str, Enum):
    """The eight ISO/IEC 25010 product-quality characteristics."""

    FUNCTIONAL_SUITABILITY = "functional_suitability"
    PERFORMANCE_EFFICIENCY = "performance_efficiency"
    COMPATIBILITY = "compatibility"
    USABILITY = "usability"
    RELIABILITY = "reliability"
    SECURITY = "security"
    MAINTAINABILITY = "maintainability"
    PORTABILITY = "portability"


class PolarityLabel(str, Enum):
    POSITIVE = "positive"
    NEUTRAL = "neutral"
    NEGATIVE = "negative"


@dataclass(frozen=True)
class FuzzyWeights:
    """Weights applied to the low/medium/high evidence buckets.

    Non-default weights are allowed; the score range then becomes
    [min(weights), max(weights)] instead of [0, 1].
    """

    low: float = 0.0
    medium: float = 0.5
    high: float = 1.0


DEFAULT_WEIGHTS = FuzzyWeights()


@dataclass(frozen=True)
class SentimentCounts:
    """Evidence counts per bucket: low, medium, high."""

    low: int = 0
    medium: int = 0
    high: int = 0

    def __post_init__(self) -> None:
        for name in ("low", "medium", "high"):
            value = getattr(self, name)
            if not isinstance(value, int) or isinstance(value, bool) or value < 0:
                raise ValueError(f"{name} count must be a non-negative integer, got {value!r}")

    @property
    def total(self) -> int:
        return self.low + self.medium + self.high


def polarity_bucket(label: PolarityLabel) -> str:
    """Map statement polarity to an evidence bucket.

    Positive statements count as high evidence, neutral as medium,
    negative as low.
    """
    return {
        PolarityLabel.POSITIVE: "high",
        PolarityLabel.NEUTRAL: "medium",
        PolarityLabel.NEGATIVE: "low",
    }[label]


def fuzzy_score(counts: SentimentCounts, weights: FuzzyWeights = DEFAULT_WEIGHTS) -> float:
    """Weighted mean of the evidence buckets, normalized by total count.

    Raises NoEvidence when all counts are zero: "no data" must never be
    conflated with "uniformly negative" (score 0.0).
    """
    if counts.total == 0:
        raise NoEvidence("cannot score zero evidence counts")
    weighted = weights.low * counts.low + weights.medium * counts.medium + weights.high * counts.high
    return weighted / counts.total


@dataclass(frozen=True)
class QualityScore:
    """Per (package, attribute) evidence counts with the derived score.

    The score is always computed from the counts on access, so it can
    never go stale relative to them.
    """

    package: str
    attribute: QualityAttribute
    counts: SentimentCounts = field(default_factory=SentimentCounts)

    def __post_init__(self) -> None:
        if not self.package:
            raise ValueError("package name must be non-empty")
        if not isinstance(self.attribute, QualityAttribute):
            raise ValueError(f"attribute must be a QualityAttribute, got {self.attribute!r}")
        if self.counts.total == 0:
            raise NoEvidence(f"quality score for {self.package}/{self.attribute.value} has no evidence")

    @property
    def score(self) -> float:
        return fuzzy_score(self.counts)

    def score_with(self, weights: FuzzyWeights) -> float:
        return fuzzy_score(self.counts, weights)


def aggregate(
    package: str,
    attribute: QualityAttribute,
    statements: Iterable[Tuple[PolarityLabel, Iterable[QualityAttribute]]],
) -> QualityScore:
    """Bucket the statements that mention `attribute` and score them.

    A statement mapped to several attributes counts once toward each of
    them; statements that do not mention `attribute` are excluded.
    Raises NoEvidence when nothing relevant remains, so callers record
    "no score" rather than a misleading zero.
    """
    low = medium = high = 0
    for polarity, attrs in statements:
        if attribute not in set(attrs):
            continue
        bucket = polarity_bucket(polarity)
        if bucket == "high":
            high += 1
        elif bucket == "medium":
            medium += 1
        else:
            low += 1
    counts = SentimentCounts(low=low, medium=medium, high=high)
    if counts.total == 0:
        raise NoEvidence(f"no statements mention {attribute.value} for {package}")
    return QualityScore(package=package, attribute=attribute, counts=counts)
