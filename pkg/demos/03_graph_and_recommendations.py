"""Build a knowledge graph and answer a natural-language query.

Three packages carry the topic "web framework" through different label
kinds (developer-declared beats usage-inferred beats taxonomy), one of
them ships an unfixed advisory, and the ranking explains exactly how
each total came together.
"""

from pkgraph.annotate import BaselineAnnotator
from pkgraph.graph import (
    KnowledgeGraph,
    MetadataRecord,
    Severity,
    TopicKind,
    TopicLabel,
    UsageStat,
    VersionInterval,
    VulnerabilityRecord,
)
from pkgraph.infer import recommend, story_to_query
from pkgraph.quality import QualityAttribute, QualityScore, SentimentCounts

graph = KnowledgeGraph(taxonomy=["web framework"])
for name in ("django", "selenium", "spacy"):
    graph.upsert_package(name)

graph.attach("django", MetadataRecord(
    package="django", version="5.0", keywords=("web framework", "orm")))
graph.attach("django", TopicLabel(
    kind=TopicKind.DEVELOPER_DEFINED, term="web framework", source="registry:django:5.0"))
graph.attach("selenium", TopicLabel(
    kind=TopicKind.USER_DEFINED, term="web framework", source="repo:qatools/browsersuite"))
graph.attach("spacy", TopicLabel(
    kind=TopicKind.TAXONOMY, term="web framework", source="repo:search"))

graph.attach("django", VulnerabilityRecord(
    id="CVE-2024-90001", package="django", severity=Severity.HIGH,
    affected_ranges=(VersionInterval(introduced="0"),), fixed=False))

graph.attach("django", QualityScore(
    package="django", attribute=QualityAttribute.RELIABILITY,
    counts=SentimentCounts(high=3)))
graph.attach("selenium", QualityScore(
    package="selenium", attribute=QualityAttribute.PERFORMANCE_EFFICIENCY,
    counts=SentimentCounts(high=1)))

graph.attach("django", UsageStat(package="django", script_count=120, repo_count=14))
graph.attach("selenium", UsageStat(package="selenium", script_count=30, repo_count=6))
graph.attach("spacy", UsageStat(package="spacy", script_count=75, repo_count=9))

graph.seal()

story = "I need a web framework"
query = story_to_query(story, BaselineAnnotator(), k=3)
print(f"story: {story!r}")
print(f"query terms: {[t.term for t in query.terms]}")
print()

result = recommend(query, graph)
for rank, rec in enumerate(result.recommendations, 1):
    c = rec.components
    print(f"{rank}. {rec.package:10s} total={rec.total:.4f}")
    print(f"     topical={c.topical:.2f}  quality={c.quality:.2f}  "
          f"usage={c.usage:.2f}  vulnerability_penalty={c.vulnerability_penalty:.2f}")
    print(f"     matched: {rec.matched_terms}")
    print(f"     evidence: {rec.evidence_links}")

print()
print("same query with exclude_vulnerable:")
filtered_query = story_to_query(story, BaselineAnnotator(), k=3, exclude_vulnerable=True)
filtered = recommend(filtered_query, graph)
print(" ", [rec.package for rec in filtered.recommendations])
