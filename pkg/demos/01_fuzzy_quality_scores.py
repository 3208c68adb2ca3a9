"""Community sentiment to quality scores.

Review statements arrive polarity-classified (positive / neutral /
negative) and mapped to product-quality attributes. Positive evidence
counts as high, neutral as medium, negative as low, and the fuzzy score
is the weighted mean of those buckets, normalized into [0, 1].
"""

from pkgraph.quality import (
    NoEvidence,
    PolarityLabel,
    QualityAttribute,
    SentimentCounts,
    aggregate,
    fuzzy_score,
)

# A package whose performance is discussed in 115 statements:
# 100 positive, 10 neutral, 5 negative.
counts = SentimentCounts(low=5, medium=10, high=100)
print(f"evidence counts: low={counts.low} medium={counts.medium} high={counts.high}")
print(f"fuzzy score    : {fuzzy_score(counts):.4f}   (105/115)")
print()

# Edge behavior: all-negative is a true 0.0; no data at all is NOT 0.0.
print("uniformly negative:", fuzzy_score(SentimentCounts(low=7)))
try:
    fuzzy_score(SentimentCounts())
except NoEvidence as exc:
    print("zero evidence     : NoEvidence raised ->", exc)
print()

# Aggregating classified statements for one attribute. A statement that
# touches several attributes counts once toward each of them.
statements = [
    (PolarityLabel.POSITIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY}),
    (PolarityLabel.POSITIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY,
                              QualityAttribute.RELIABILITY}),
    (PolarityLabel.NEGATIVE, {QualityAttribute.PERFORMANCE_EFFICIENCY}),
    (PolarityLabel.NEUTRAL, {QualityAttribute.USABILITY}),
]
for attribute in (QualityAttribute.PERFORMANCE_EFFICIENCY,
                  QualityAttribute.RELIABILITY,
                  QualityAttribute.USABILITY):
    score = aggregate("torch", attribute, statements)
    print(f"{attribute.value:25s} counts=(L{score.counts.low} M{score.counts.medium} "
          f"H{score.counts.high})  score={score.score:.3f}")
