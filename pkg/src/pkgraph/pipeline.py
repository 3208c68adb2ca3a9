"""Pipeline orchestration: the staging-directory schema written by
acquisition runs, scan-result persistence, and the merge that turns
staging plus scan output into a sealed knowledge graph snapshot.

Corpus convention: a repository (host, owner, name) corresponds to the
corpus directory named `<owner>__<name>`, which is how repository-level
topics find the packages used in that repository.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from pkgraph.annotate import Annotator, BaselineAnnotator
from pkgraph.errors import PkgraphError
from pkgraph.graph import (
    KnowledgeGraph,
    MetadataOrigin,
    MetadataRecord,
    Severity,
    TopicKind,
    TopicLabel,
    VersionInterval,
    VulnerabilityRecord,
    UsageStat,
    normalize_name,
)
from pkgraph.imports import Resolution, ResolutionCategory, ScanResult, UnresolvedUse
from pkgraph.ingest import (
    IngestEndpoints,
    Platform,
    RepoRef,
    ReviewStatement,
    collect_reviews,
    fetch_registry_metadata,
    fetch_vulnerabilities,
    search_repositories,
)
from pkgraph.quality import NoEvidence, QualityAttribute, aggregate

SCAN_FORMAT = "pkgraph-scan/1"
STAGING_FORMAT = "pkgraph-staging/1"


class StagingError(PkgraphError):
    """Staging directory contents are missing or malformed."""


# ---------------------------------------------------------------------------
# Scan persistence
# ---------------------------------------------------------------------------

def save_scan(result: ScanResult, path) -> None:
    state = {
        "format": SCAN_FORMAT,
        "files_scanned": result.files_scanned,
        "usage": {
            name: {"script_count": stat.script_count, "repo_count": stat.repo_count}
            for name, stat in sorted(result.usage.items())
        },
        "unresolved": {
            top: {
                "file_count": use.file_count,
                "example_file": use.example_file,
                "repo_count": use.repo_count,
            }
            for top, use in sorted(result.unresolved.items())
        },
        "resolutions": {
            top: {"category": res.category.value, "package": res.package}
            for top, res in sorted(result.resolutions.items())
        },
        "repo_packages": {repo: sorted(pkgs) for repo, pkgs in sorted(result.repo_packages.items())},
        "skipped": [list(item) for item in result.skipped],
    }
    Path(path).write_text(json.dumps(state, sort_keys=True, indent=1) + "\n", encoding="utf-8")


def load_scan(path) -> ScanResult:
    try:
        state = json.loads(Path(path).read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise StagingError(f"cannot read scan file {path}: {exc}") from exc
    if state.get("format") != SCAN_FORMAT:
        raise StagingError(
            f"scan format {state.get('format')!r} unsupported (expected {SCAN_FORMAT!r})")
    try:
        return ScanResult(
            usage={
                name: UsageStat(package=name, **counts)
                for name, counts in state["usage"].items()
            },
            unresolved={
                top: UnresolvedUse(top_level=top, **use)
                for top, use in state["unresolved"].items()
            },
            resolutions={
                top: Resolution(
                    top_level="" if entry["category"] == "local" else top,
                    category=ResolutionCategory(entry["category"]),
                    package=entry["package"],
                )
                for top, entry in state["resolutions"].items()
            },
            repo_packages={
                repo: frozenset(pkgs) for repo, pkgs in state["repo_packages"].items()
            },
            files_scanned=state["files_scanned"],
            skipped=[tuple(item) for item in state["skipped"]],
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StagingError(f"scan file {path} is malformed: {exc}") from exc


# ---------------------------------------------------------------------------
# Staging directory
# ---------------------------------------------------------------------------

@dataclass
class Staging:
    """Everything an acquisition run produced, keyed by package name."""

    repos: List[RepoRef] = field(default_factory=list)
    metadata: Dict[str, Optional[MetadataRecord]] = field(default_factory=dict)
    vulnerabilities: Dict[str, List[VulnerabilityRecord]] = field(default_factory=dict)
    reviews: Dict[str, List[ReviewStatement]] = field(default_factory=dict)
    extra_topics: List[Tuple[str, TopicLabel]] = field(default_factory=list)
    warnings: List[str] = field(default_factory=list)


def run_ingest(
    packages: Sequence[str],
    terms: Sequence[str],
    platforms: Sequence[Platform],
    transport,
    endpoints: IngestEndpoints = IngestEndpoints(),
) -> Staging:
    """Run the three acquisition pipelines over the given transport."""
    staging = Staging()
    if terms:
        staging.repos = search_repositories(terms, transport, endpoints)
    for package in sorted({normalize_name(p) for p in packages}):
        staging.metadata[package] = fetch_registry_metadata(package, transport, endpoints)
        staging.vulnerabilities[package] = fetch_vulnerabilities(package, transport, endpoints)
        if platforms:
            statements, warnings = collect_reviews(package, platforms, transport, endpoints)
            staging.reviews[package] = statements
            staging.warnings.extend(f"{package}: {w}" for w in warnings)
    return staging


def _repo_to_dict(repo: RepoRef) -> dict:
    return {
        "host": repo.host,
        "owner": repo.owner,
        "name": repo.name,
        "matched_terms": list(repo.matched_terms),
        "topics": list(repo.topics),
        "stars": repo.stars,
        "forks": repo.forks,
        "contributors": repo.contributors,
        "last_push": repo.last_push,
    }


def _metadata_to_dict(record: MetadataRecord) -> dict:
    return {
        "package": record.package,
        "version": record.version,
        "origin": record.origin.value,
        "requires_runtime": record.requires_runtime,
        "keywords": list(record.keywords),
        "maintainer_count": record.maintainer_count,
        "contributor_count": record.contributor_count,
        "star_count": record.star_count,
        "fork_count": record.fork_count,
        "release_count": record.release_count,
        "download_count": record.download_count,
        "last_update": record.last_update,
    }


def _vulnerability_to_dict(record: VulnerabilityRecord) -> dict:
    return {
        "id": record.id,
        "package": record.package,
        "severity": record.severity.value,
        "affected_ranges": [
            {"introduced": r.introduced, "fixed": r.fixed} for r in record.affected_ranges
        ],
        "fixed": record.fixed,
    }


def _review_to_dict(statement: ReviewStatement) -> dict:
    return {
        "package": statement.package,
        "platform": statement.platform.value,
        "text": statement.text,
        "url": statement.url,
        "fetched_at": statement.fetched_at,
    }


def write_staging(staging: Staging, directory) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    def dump(name: str, items) -> None:
        payload = {"format": STAGING_FORMAT, "items": items}
        (directory / name).write_text(
            json.dumps(payload, sort_keys=True, indent=1) + "\n", encoding="utf-8")

    dump("repos.json", [_repo_to_dict(r) for r in staging.repos])
    dump("metadata.json", {
        name: (None if record is None else _metadata_to_dict(record))
        for name, record in sorted(staging.metadata.items())
    })
    dump("vulnerabilities.json", {
        name: [_vulnerability_to_dict(v) for v in records]
        for name, records in sorted(staging.vulnerabilities.items())
    })
    dump("reviews.json", {
        name: [_review_to_dict(s) for s in statements]
        for name, statements in sorted(staging.reviews.items())
    })
    dump("topics.json", [
        {"package": pkg, "kind": label.kind.value, "term": label.term, "source": label.source}
        for pkg, label in staging.extra_topics
    ])
    dump("warnings.json", list(staging.warnings))


def _load_staged(directory: Path, name: str, default):
    path = directory / name
    if not path.exists():
        return default
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise StagingError(f"cannot read staged file {path}: {exc}") from exc
    if payload.get("format") != STAGING_FORMAT:
        raise StagingError(
            f"staged file {path} has format {payload.get('format')!r} "
            f"(expected {STAGING_FORMAT!r})")
    return payload["items"]


def load_staging(directory) -> Staging:
    directory = Path(directory)
    if not directory.is_dir():
        raise StagingError(f"staging directory {directory} does not exist")
    try:
        repos = [
            RepoRef(
                host=entry["host"], owner=entry["owner"], name=entry["name"],
                matched_terms=tuple(entry["matched_terms"]),
                topics=tuple(entry["topics"]),
                stars=entry["stars"], forks=entry["forks"],
                contributors=entry["contributors"], last_push=entry["last_push"],
            )
            for entry in _load_staged(directory, "repos.json", [])
        ]
        metadata = {
            name: None if entry is None else MetadataRecord(
                package=entry["package"], version=entry["version"],
                origin=MetadataOrigin(entry["origin"]),
                requires_runtime=entry["requires_runtime"],
                keywords=tuple(entry["keywords"]),
                maintainer_count=entry["maintainer_count"],
                contributor_count=entry["contributor_count"],
                star_count=entry["star_count"], fork_count=entry["fork_count"],
                release_count=entry["release_count"],
                download_count=entry["download_count"],
                last_update=entry["last_update"],
            )
            for name, entry in _load_staged(directory, "metadata.json", {}).items()
        }
        vulnerabilities = {
            name: [
                VulnerabilityRecord(
                    id=entry["id"], package=entry["package"],
                    severity=Severity(entry["severity"]),
                    affected_ranges=tuple(
                        VersionInterval(introduced=r["introduced"], fixed=r["fixed"])
                        for r in entry["affected_ranges"]
                    ),
                    fixed=entry["fixed"],
                )
                for entry in entries
            ]
            for name, entries in _load_staged(directory, "vulnerabilities.json", {}).items()
        }
        reviews = {
            name: [
                ReviewStatement(
                    package=entry["package"], platform=Platform(entry["platform"]),
                    text=entry["text"], url=entry["url"], fetched_at=entry["fetched_at"],
                )
                for entry in entries
            ]
            for name, entries in _load_staged(directory, "reviews.json", {}).items()
        }
        extra_topics = [
            (
                entry["package"],
                TopicLabel(kind=TopicKind(entry["kind"]), term=entry["term"],
                           source=entry.get("source", "")),
            )
            for entry in _load_staged(directory, "topics.json", [])
        ]
        warnings = list(_load_staged(directory, "warnings.json", []))
    except (KeyError, TypeError, ValueError) as exc:
        raise StagingError(f"staging directory {directory} is malformed: {exc}") from exc
    return Staging(
        repos=repos, metadata=metadata, vulnerabilities=vulnerabilities,
        reviews=reviews, extra_topics=extra_topics, warnings=warnings,
    )


# ---------------------------------------------------------------------------
# Graph build
# ---------------------------------------------------------------------------

def repo_corpus_key(repo: RepoRef) -> str:
    return f"{repo.owner}__{repo.name}"


def build_graph(
    staging: Staging,
    scan: Optional[ScanResult] = None,
    *,
    taxonomy: Iterable[str] = (),
    annotator: Optional[Annotator] = None,
    build_timestamp: Optional[int] = None,
) -> KnowledgeGraph:
    """Merge staged acquisition data and corpus scan output into a sealed
    knowledge graph.

    Registry keywords become developer-defined topics; a repository's
    matched taxonomy terms and its own topic tags flow to every package
    the scan saw that repository use. Reviews are polarity-classified and
    attribute-mapped by the annotator (baseline by default) and fuzzily
    aggregated into per-attribute quality scores.
    """
    annotator = annotator if annotator is not None else BaselineAnnotator()
    graph = KnowledgeGraph(taxonomy=taxonomy)

    staged_packages = set(staging.metadata) | set(staging.vulnerabilities) | set(staging.reviews)
    staged_packages.update(pkg for pkg, _ in staging.extra_topics)
    for name in sorted(staged_packages):
        graph.upsert_package(name)

    if scan is not None:
        for name, stat in sorted(scan.usage.items()):
            graph.upsert_package(name)
            graph.attach(name, stat)
        for top, use in sorted(scan.unresolved.items()):
            node = graph.upsert_package(top)
            graph.attach(node.name, UsageStat(
                package=node.name, script_count=use.file_count, repo_count=use.repo_count))

    for name, record in sorted(staging.metadata.items()):
        if record is None:
            continue
        graph.attach(name, record)
        graph.upsert_package(name, seen=record.last_update)
        for keyword in record.keywords:
            graph.attach(name, TopicLabel(
                kind=TopicKind.DEVELOPER_DEFINED, term=keyword,
                source=f"registry:{name}:{record.version}"))

    for name, records in sorted(staging.vulnerabilities.items()):
        for record in records:
            graph.attach(name, record)

    for name, statements in sorted(staging.reviews.items()):
        classified = [
            (annotator.classify_polarity(s.text), annotator.map_quality_attributes(s.text))
            for s in statements
        ]
        for attribute in QualityAttribute:
            try:
                graph.attach(name, aggregate(name, attribute, classified))
            except NoEvidence:
                continue
        for statement in statements:
            graph.upsert_package(name, seen=statement.fetched_at)

    if scan is not None:
        for repo in staging.repos:
            packages = scan.repo_packages.get(repo_corpus_key(repo), frozenset())
            source = f"repo:{repo.host}/{repo.owner}/{repo.name}"
            for package in sorted(packages):
                for term in repo.matched_terms:
                    graph.attach(package, TopicLabel(
                        kind=TopicKind.TAXONOMY, term=term, source=source))
                for term in repo.topics:
                    graph.attach(package, TopicLabel(
                        kind=TopicKind.USER_DEFINED, term=term, source=source))
                graph.upsert_package(package, seen=repo.last_push)

    for package, label in staging.extra_topics:
        graph.attach(package, label)

    return graph.seal(build_timestamp=build_timestamp)
