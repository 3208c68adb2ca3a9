"""pkgraph: evidence-based third-party package selection.

Mines source corpora for real package usage, enriches packages with
registry metadata, vulnerability advisories, and community-derived
quality scores, stores everything in a sealed knowledge graph, and
answers natural-language selection queries with ranked, explainable
recommendations.
"""

from pkgraph.errors import PkgraphError
from pkgraph.graph import (
    KnowledgeGraph,
    MetadataOrigin,
    MetadataRecord,
    PackageNode,
    Severity,
    TopicKind,
    TopicLabel,
    UsageStat,
    VersionInterval,
    VulnerabilityRecord,
    load_snapshot,
    normalize_name,
    save_snapshot,
)
from pkgraph.infer import (
    Recommendation,
    RecommendResult,
    ScoreCoefficients,
    StructuredQuery,
    build_query,
    recommend,
    score,
    story_to_query,
)
from pkgraph.quality import (
    NoEvidence,
    PolarityLabel,
    QualityAttribute,
    QualityScore,
    SentimentCounts,
    aggregate,
    fuzzy_score,
)

__version__ = "0.1.0"

__all__ = [
    "KnowledgeGraph",
    "MetadataOrigin",
    "MetadataRecord",
    "NoEvidence",
    "PackageNode",
    "PkgraphError",
    "PolarityLabel",
    "QualityAttribute",
    "QualityScore",
    "Recommendation",
    "RecommendResult",
    "ScoreCoefficients",
    "SentimentCounts",
    "Severity",
    "StructuredQuery",
    "TopicKind",
    "TopicLabel",
    "UsageStat",
    "VersionInterval",
    "VulnerabilityRecord",
    "aggregate",
    "build_query",
    "fuzzy_score",
    "load_snapshot",
    "normalize_name",
    "recommend",
    "save_snapshot",
    "score",
    "story_to_query",
    "__version__",
]
