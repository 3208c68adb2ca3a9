"""Inference engine: structured queries over the sealed graph and ranked,
explainable package recommendations.

A recommendation's total is a clamped linear combination of four
components, each kept in [0, 1] and reported separately so every ranking
can be explained term by term:

    total = max(0, a*topical + b*quality + c*usage - d*vulnerability)

The coefficients and topic-kind weights are configuration, not constants;
scaling all four coefficients by the same factor rescales totals but
never reorders results.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Set, Tuple

from pkgraph.annotate import Annotator, EmptyIntent, WeightedTerm, default_keyword_table
from pkgraph.graph import KnowledgeGraph, TopicKind, normalize_topic_term
from pkgraph.quality import QualityAttribute

DEFAULT_KIND_WEIGHTS: Mapping[TopicKind, float] = {
    TopicKind.DEVELOPER_DEFINED: 1.0,
    TopicKind.USER_DEFINED: 0.8,
    TopicKind.TAXONOMY: 0.6,
}

# Neutral prior for attributes without review evidence: absent data
# neither punishes nor rewards a candidate.
NO_EVIDENCE_PRIOR = 0.5


@dataclass(frozen=True)
class ScoreCoefficients:
    topical: float = 0.5
    quality: float = 0.2
    usage: float = 0.2
    vulnerability: float = 0.3

    def __post_init__(self) -> None:
        for name in ("topical", "quality", "usage", "vulnerability"):
            if getattr(self, name) < 0:
                raise ValueError(f"coefficient {name} must be non-negative")


DEFAULT_COEFFICIENTS = ScoreCoefficients()


@dataclass(frozen=True)
class QueryConstraints:
    exclude_vulnerable: bool = False
    min_quality: Optional[float] = None
    runtime_constraint: Optional[str] = None

    def __post_init__(self) -> None:
        if self.min_quality is not None and not (0.0 <= self.min_quality <= 1.0):
            raise ValueError("min_quality must be in [0, 1]")


@dataclass(frozen=True)
class StructuredQuery:
    """Normalized user intent: weighted topical terms, required quality
    attributes, and hard constraints."""

    terms: Tuple[WeightedTerm, ...] = ()
    required_attributes: frozenset = frozenset()
    constraints: QueryConstraints = QueryConstraints()
    k: int = 10

    def __post_init__(self) -> None:
        if self.k < 1:
            raise ValueError("k must be >= 1")
        object.__setattr__(self, "terms", tuple(self.terms))
        object.__setattr__(self, "required_attributes", frozenset(self.required_attributes))


@dataclass(frozen=True)
class ScoreComponents:
    topical: float
    quality: float
    usage: float
    vulnerability_penalty: float


@dataclass(frozen=True)
class Recommendation:
    package: str
    total: float
    components: ScoreComponents
    matched_terms: Tuple[Tuple[str, str], ...] = ()  # (term, topic kind)
    evidence_links: Tuple[str, ...] = ()


@dataclass(frozen=True)
class RecommendResult:
    """Ranked recommendations; when empty, `diagnostics` explains which
    stage eliminated the candidates instead of crashing."""

    recommendations: Tuple[Recommendation, ...]
    diagnostics: Tuple[str, ...] = ()

    @property
    def empty(self) -> bool:
        return not self.recommendations


# ---------------------------------------------------------------------------
# Query construction
# ---------------------------------------------------------------------------

def build_query(
    intent_terms: Sequence[WeightedTerm],
    *,
    k: int = 10,
    exclude_vulnerable: bool = False,
    min_quality: Optional[float] = None,
    runtime_constraint: Optional[str] = None,
    required_attributes: Iterable[QualityAttribute] = (),
    keyword_table: Optional[Mapping[str, QualityAttribute]] = None,
) -> StructuredQuery:
    """Normalize and deduplicate intent terms into a structured query.

    Quality-attribute words in the terms ("secure", "reliable", "fast")
    are lifted into required_attributes and removed from the topical
    vocabulary, so "secure web framework" becomes the topic
    "web framework" plus a security requirement; a duplicated term keeps
    its highest weight.
    """
    if not intent_terms:
        raise EmptyIntent("no intent terms to build a query from")
    table = dict(keyword_table) if keyword_table is not None else dict(default_keyword_table())
    attributes: Set[QualityAttribute] = set(required_attributes)
    weights: Dict[str, float] = {}
    order: List[str] = []
    for weighted in intent_terms:
        term = normalize_topic_term(weighted.term)
        if not term:
            continue
        lifted, residue = _lift_attribute_words(term, table)
        attributes.update(lifted)
        if residue is None:
            continue
        if residue not in weights:
            order.append(residue)
            weights[residue] = weighted.weight
        else:
            weights[residue] = max(weights[residue], weighted.weight)
    terms = tuple(WeightedTerm(term=t, weight=weights[t]) for t in order)
    if not terms and not attributes:
        raise EmptyIntent("every intent term normalized away and no attributes remain")
    constraints = QueryConstraints(
        exclude_vulnerable=exclude_vulnerable,
        min_quality=min_quality,
        runtime_constraint=runtime_constraint,
    )
    return StructuredQuery(terms=terms, required_attributes=frozenset(attributes),
                           constraints=constraints, k=k)


def _lift_attribute_words(
    term: str, table: Mapping[str, QualityAttribute]
) -> Tuple[Set[QualityAttribute], Optional[str]]:
    """Split a term into lifted attributes and its topical residue.

    A whole-term table entry lifts outright; otherwise each word that is
    attribute vocabulary lifts individually and the remaining words stay
    topical (None when nothing remains)."""
    if term in table:
        return {table[term]}, None
    words = term.split()
    lifted = {table[word] for word in words if word in table}
    if not lifted:
        return set(), term
    residue_words = [word for word in words if word not in table]
    return lifted, (" ".join(residue_words) or None)


def story_to_query(story: str, annotator: Annotator, **query_options) -> StructuredQuery:
    """Extract intent terms from a user story and build the query."""
    return build_query(annotator.extract_intent_terms(story), **query_options)


# ---------------------------------------------------------------------------
# Component scores
# ---------------------------------------------------------------------------

def topical_score(
    package: str,
    query: StructuredQuery,
    graph: KnowledgeGraph,
    kind_weights: Mapping[TopicKind, float] = DEFAULT_KIND_WEIGHTS,
) -> float:
    """Weighted fraction of query terms matched by the package's topics.

    Each query term counts at most once, at the weight of the best topic
    kind that matched it; the normalizer assumes every term had matched at
    the strongest kind, so the score stays in [0, 1].
    """
    if not query.terms:
        return 0.0
    best_kind = max(kind_weights.values())
    if best_kind <= 0:
        return 0.0
    by_term: Dict[str, float] = {}
    for label in graph.topics_of(package):
        weight = kind_weights.get(label.kind, 0.0)
        if label.term in by_term:
            by_term[label.term] = max(by_term[label.term], weight)
        else:
            by_term[label.term] = weight
    matched = 0.0
    denominator = 0.0
    for term in query.terms:
        denominator += term.weight * best_kind
        kind_weight = by_term.get(term.term)
        if kind_weight is not None:
            matched += term.weight * kind_weight
    return matched / denominator if denominator > 0 else 0.0


def quality_component(package: str, query: StructuredQuery, graph: KnowledgeGraph) -> float:
    """Mean fuzzy score over the required attributes, with the neutral
    prior standing in where evidence is missing. Without required
    attributes, the mean over all attributes that have evidence (prior
    when none do)."""
    scores_by_attribute = graph.quality_of(package)
    if query.required_attributes:
        values = [
            scores_by_attribute[attr].score if attr in scores_by_attribute else NO_EVIDENCE_PRIOR
            for attr in query.required_attributes
        ]
        return sum(values) / len(values)
    if not scores_by_attribute:
        return NO_EVIDENCE_PRIOR
    values = [score.score for score in scores_by_attribute.values()]
    return sum(values) / len(values)


def usage_component(package: str, graph: KnowledgeGraph) -> float:
    """Log-normalized usage share: long-tailed counts would let a few
    giant packages drown everything under linear normalization."""
    max_count = graph.max_script_count()
    if max_count <= 0:
        return 0.0
    stat = graph.usage_of(package)
    count = stat.script_count if stat is not None else 0
    return math.log1p(count) / math.log1p(max_count)


def vulnerability_penalty(package: str, graph: KnowledgeGraph) -> float:
    """0.25 per unfixed advisory, saturating at 1."""
    return min(1.0, 0.25 * graph.unfixed_vulnerability_count(package))


def score(
    package: str,
    query: StructuredQuery,
    graph: KnowledgeGraph,
    coefficients: ScoreCoefficients = DEFAULT_COEFFICIENTS,
    kind_weights: Mapping[TopicKind, float] = DEFAULT_KIND_WEIGHTS,
) -> Recommendation:
    """Score one package against the query with a full breakdown."""
    node = graph.package(package)  # raises UnknownPackage
    components = ScoreComponents(
        topical=topical_score(node.name, query, graph, kind_weights),
        quality=quality_component(node.name, query, graph),
        usage=usage_component(node.name, graph),
        vulnerability_penalty=vulnerability_penalty(node.name, graph),
    )
    total = (
        coefficients.topical * components.topical
        + coefficients.quality * components.quality
        + coefficients.usage * components.usage
        - coefficients.vulnerability * components.vulnerability_penalty
    )
    matched, links = _evidence(node.name, query, graph)
    return Recommendation(
        package=node.name,
        total=max(0.0, total),
        components=components,
        matched_terms=matched,
        evidence_links=links,
    )


def _evidence(
    package: str, query: StructuredQuery, graph: KnowledgeGraph
) -> Tuple[Tuple[Tuple[str, str], ...], Tuple[str, ...]]:
    wanted = {term.term for term in query.terms}
    matched = set()
    links = set()
    for label in graph.topics_of(package):
        if label.term in wanted:
            matched.add((label.term, label.kind.value))
            if label.source:
                links.add(f"topic:{label.source}")
    for advisory in graph.vulnerabilities_of(package):
        links.add(f"advisory:{advisory.id}")
    return tuple(sorted(matched)), tuple(sorted(links))


# ---------------------------------------------------------------------------
# Ranked recommendation
# ---------------------------------------------------------------------------

_VERSION_CLAUSE = re.compile(r"^\s*(==|!=|<=|>=|<|>)\s*([0-9][0-9A-Za-z.\-*]*)\s*$")


def _version_tuple(text: str) -> Tuple[int, ...]:
    parts = []
    for chunk in text.split("."):
        digits = re.match(r"\d+", chunk)
        if digits is None:
            break
        parts.append(int(digits.group()))
    return tuple(parts)


def runtime_satisfies(runtime_version: str, constraint: Optional[str]) -> bool:
    """Check a runtime version ("3.9") against a comma-separated
    constraint string (">=3.8, <4"). Unknown or unparsable constraints
    pass: exclusion needs positive evidence of incompatibility."""
    if not constraint:
        return True
    version = _version_tuple(runtime_version)
    for clause in constraint.split(","):
        clause = clause.strip()
        if not clause:
            continue
        match = _VERSION_CLAUSE.match(clause)
        if match is None:
            continue
        op, bound_text = match.groups()
        bound = _version_tuple(bound_text.rstrip(".*"))
        width = max(len(version), len(bound))
        lhs = version + (0,) * (width - len(version))
        rhs = bound + (0,) * (width - len(bound))
        ok = {
            "==": lhs[: len(bound)] == bound,
            "!=": lhs[: len(bound)] != bound,
            "<=": lhs <= rhs,
            ">=": lhs >= rhs,
            "<": lhs < rhs,
            ">": lhs > rhs,
        }[op]
        if not ok:
            return False
    return True


def _package_runtime_ok(package: str, query: StructuredQuery, graph: KnowledgeGraph) -> bool:
    runtime = query.constraints.runtime_constraint
    if not runtime:
        return True
    declared = [rec.requires_runtime for rec in graph.metadata_of(package) if rec.requires_runtime]
    return all(runtime_satisfies(runtime, spec) for spec in declared)


def recommend(
    query: StructuredQuery,
    graph: KnowledgeGraph,
    coefficients: ScoreCoefficients = DEFAULT_COEFFICIENTS,
    kind_weights: Mapping[TopicKind, float] = DEFAULT_KIND_WEIGHTS,
) -> RecommendResult:
    """Rank the top-k candidates for the query.

    Candidates are the topic matches of the query terms (every package
    when the query is attribute-only); constraint filters then drop
    vulnerable, low-quality, or runtime-incompatible candidates. Results
    sort by total descending with name as the tiebreak, so identical
    inputs always produce identical output.
    """
    diagnostics: List[str] = []
    if query.terms:
        candidates = sorted(graph.packages_by_topic([t.term for t in query.terms]))
        diagnostics.append(
            f"{len(candidates)} of {len(graph)} packages matched the topical terms")
    else:
        candidates = graph.package_names()
        diagnostics.append(f"attribute-only query: all {len(candidates)} packages considered")

    if query.constraints.exclude_vulnerable:
        kept = [name for name in candidates if graph.unfixed_vulnerability_count(name) == 0]
        diagnostics.append(
            f"exclude_vulnerable removed {len(candidates) - len(kept)} candidate(s)")
        candidates = kept
    if query.constraints.min_quality is not None:
        kept = [
            name for name in candidates
            if quality_component(name, query, graph) >= query.constraints.min_quality
        ]
        diagnostics.append(
            f"min_quality {query.constraints.min_quality} removed {len(candidates) - len(kept)} candidate(s)")
        candidates = kept
    if query.constraints.runtime_constraint:
        kept = [name for name in candidates if _package_runtime_ok(name, query, graph)]
        diagnostics.append(
            f"runtime constraint removed {len(candidates) - len(kept)} candidate(s)")
        candidates = kept

    if not candidates:
        return RecommendResult(recommendations=(), diagnostics=tuple(diagnostics))

    scored = [score(name, query, graph, coefficients, kind_weights) for name in candidates]
    scored.sort(key=lambda rec: (-rec.total, rec.package))
    return RecommendResult(recommendations=tuple(scored[: query.k]), diagnostics=())


# ---------------------------------------------------------------------------
# Wire representation (shared by the CLI and the HTTP service so both
# surfaces render the same ranking identically)
# ---------------------------------------------------------------------------

def recommendation_to_dict(rec: Recommendation) -> dict:
    return {
        "package": rec.package,
        "total": rec.total,
        "components": {
            "topical": rec.components.topical,
            "quality": rec.components.quality,
            "usage": rec.components.usage,
            "vulnerability_penalty": rec.components.vulnerability_penalty,
        },
        "matched_terms": [{"term": term, "kind": kind} for term, kind in rec.matched_terms],
        "evidence_links": list(rec.evidence_links),
    }


def query_to_dict(query: StructuredQuery) -> dict:
    return {
        "terms": [{"term": t.term, "weight": t.weight} for t in query.terms],
        "required_attributes": sorted(a.value for a in query.required_attributes),
        "constraints": {
            "exclude_vulnerable": query.constraints.exclude_vulnerable,
            "min_quality": query.constraints.min_quality,
            "runtime_constraint": query.constraints.runtime_constraint,
        },
        "k": query.k,
    }
