"""Package knowledge graph: typed nodes, many-to-many edges, snapshots.

Packages are the central nodes; topics, quality scores, vulnerabilities,
versioned metadata, and usage statistics hang off them. Graphs are built
mutably by a single writer, then sealed; a sealed graph is immutable and
safe to share across any number of concurrent readers.
"""

from __future__ import annotations

import json
import re
import time
from dataclasses import dataclass
from enum import Enum
from typing import Dict, Iterable, List, Optional, Set, Tuple, Union

from pkgraph.errors import PkgraphError
from pkgraph.quality import QualityAttribute, QualityScore, SentimentCounts

SNAPSHOT_FORMAT = "pkgraph-snapshot/1"


class InvalidName(PkgraphError):
    """Package name empty after trimming."""


class GraphSealed(PkgraphError):
    """Mutation attempted on a sealed graph."""


class GraphNotSealed(PkgraphError):
    """Operation requires a sealed graph."""


class UnknownPackage(PkgraphError):
    """Referenced package does not exist in the graph."""


class AttachmentConflict(PkgraphError):
    """An item with the same key but a different payload is already attached."""


class MetadataConflict(AttachmentConflict):
    """Conflicting metadata for the same (package, version, origin)."""


class InvalidTopic(PkgraphError):
    """Topic label violates vocabulary constraints."""


class SnapshotError(PkgraphError):
    """Snapshot file is unreadable, malformed, or version-mismatched."""


_SEPARATOR_RUN = re.compile(r"[-_.]+")
_WHITESPACE_RUN = re.compile(r"\s+")


def normalize_name(raw: str) -> str:
    """Registry naming convention: lowercase, collapse runs of `-`, `_`,
    `.` into a single `-`. Idempotent."""
    trimmed = raw.strip()
    if not trimmed:
        raise InvalidName(f"package name is empty after trimming: {raw!r}")
    return _SEPARATOR_RUN.sub("-", trimmed.lower())


def normalize_topic_term(raw: str) -> str:
    """Topic terms compare case-insensitively with collapsed whitespace."""
    return _WHITESPACE_RUN.sub(" ", raw.strip().lower())


class TopicKind(str, Enum):
    USER_DEFINED = "user_defined"
    DEVELOPER_DEFINED = "developer_defined"
    TAXONOMY = "taxonomy"


class Severity(str, Enum):
    LOW = "low"
    MEDIUM = "medium"
    HIGH = "high"
    CRITICAL = "critical"
    UNKNOWN = "unknown"


class MetadataOrigin(str, Enum):
    REGISTRY = "registry"
    CODE_HOST = "code_host"


@dataclass
class PackageNode:
    """Central node; `name` is the normalized identity, `display_name`
    keeps the first spelling seen."""

    name: str
    display_name: str
    registry_available: bool = False
    first_seen: Optional[int] = None
    last_seen: Optional[int] = None


@dataclass(frozen=True)
class TopicLabel:
    """A topic edge payload; `term` is stored normalized."""

    kind: TopicKind
    term: str
    source: str = ""

    def __post_init__(self) -> None:
        normalized = normalize_topic_term(self.term)
        if not normalized:
            raise InvalidTopic("topic term must be non-empty")
        object.__setattr__(self, "term", normalized)
        if not isinstance(self.kind, TopicKind):
            object.__setattr__(self, "kind", TopicKind(self.kind))


@dataclass(frozen=True)
class VersionInterval:
    """Affected version range: introduced (inclusive) to fixed (exclusive),
    open-ended when no fix exists."""

    introduced: str
    fixed: Optional[str] = None

    def __post_init__(self) -> None:
        if not self.introduced:
            raise ValueError("interval must name an introduced version (use '0' for all)")


@dataclass(frozen=True)
class VulnerabilityRecord:
    id: str
    package: str
    severity: Severity = Severity.UNKNOWN
    affected_ranges: Tuple[VersionInterval, ...] = ()
    fixed: bool = False

    def __post_init__(self) -> None:
        if not self.id:
            raise ValueError("advisory id must be non-empty")
        if not isinstance(self.severity, Severity):
            object.__setattr__(self, "severity", Severity(self.severity))
        object.__setattr__(self, "affected_ranges", tuple(self.affected_ranges))


@dataclass(frozen=True)
class MetadataRecord:
    """One node per (package, version, origin) release."""

    package: str
    version: str
    origin: MetadataOrigin = MetadataOrigin.REGISTRY
    requires_runtime: Optional[str] = None
    keywords: Tuple[str, ...] = ()
    maintainer_count: int = 0
    contributor_count: int = 0
    star_count: int = 0
    fork_count: int = 0
    release_count: int = 0
    download_count: int = 0
    last_update: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.version:
            raise ValueError("version must be non-empty")
        if not isinstance(self.origin, MetadataOrigin):
            object.__setattr__(self, "origin", MetadataOrigin(self.origin))
        object.__setattr__(self, "keywords", tuple(self.keywords))
        for name in ("maintainer_count", "contributor_count", "star_count",
                     "fork_count", "release_count", "download_count"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


@dataclass(frozen=True)
class UsageStat:
    package: str
    script_count: int = 0
    repo_count: int = 0

    def __post_init__(self) -> None:
        if self.script_count < 0 or self.repo_count < 0:
            raise ValueError("usage counts must be non-negative")


AttachableItem = Union[TopicLabel, VulnerabilityRecord, QualityScore, MetadataRecord, UsageStat]


class KnowledgeGraph:
    """Build-then-seal store of packages and their supporting nodes.

    All edges are keyed, so re-attaching an identical item is a no-op and
    attaching a conflicting item for an occupied key raises; this keeps
    graph construction order-independent.
    """

    def __init__(self, taxonomy: Iterable[str] = ()):
        self._taxonomy: Set[str] = {normalize_topic_term(t) for t in taxonomy if normalize_topic_term(t)}
        self._packages: Dict[str, PackageNode] = {}
        self._topics: Dict[str, Dict[Tuple[str, str, str], TopicLabel]] = {}
        self._vulnerabilities: Dict[str, Dict[str, VulnerabilityRecord]] = {}
        self._quality: Dict[str, Dict[QualityAttribute, QualityScore]] = {}
        self._metadata: Dict[str, Dict[Tuple[str, str], MetadataRecord]] = {}
        self._usage: Dict[str, UsageStat] = {}
        self._sealed = False
        self.build_timestamp: Optional[int] = None

    # -- build phase -------------------------------------------------------

    def _check_mutable(self) -> None:
        if self._sealed:
            raise GraphSealed("graph is sealed; build a new one to change data")

    def upsert_package(self, raw_name: str, seen: Optional[int] = None) -> PackageNode:
        """Create or return the package node for `raw_name` (idempotent
        under name normalization). `seen` widens the first/last seen span."""
        self._check_mutable()
        name = normalize_name(raw_name)
        node = self._packages.get(name)
        if node is None:
            node = PackageNode(name=name, display_name=raw_name.strip())
            self._packages[name] = node
            self._topics[name] = {}
            self._vulnerabilities[name] = {}
            self._quality[name] = {}
            self._metadata[name] = {}
        if seen is not None:
            node.first_seen = seen if node.first_seen is None else min(node.first_seen, seen)
            node.last_seen = seen if node.last_seen is None else max(node.last_seen, seen)
        return node

    def attach(self, package: str, item: AttachableItem) -> None:
        """Link a supporting node to a package. Identical duplicates are
        no-ops; conflicting payloads for an occupied key raise."""
        self._check_mutable()
        name = normalize_name(package)
        if name not in self._packages:
            raise UnknownPackage(f"package {name!r} is not in the graph")
        if isinstance(item, TopicLabel):
            self._attach_topic(name, item)
        elif isinstance(item, VulnerabilityRecord):
            self._check_item_package(name, item.package)
            self._attach_keyed(self._vulnerabilities[name], item.id, item, name,
                               f"advisory {item.id!r}")
        elif isinstance(item, QualityScore):
            self._check_item_package(name, item.package)
            self._attach_keyed(self._quality[name], item.attribute, item, name,
                               f"quality score for {item.attribute.value!r}")
        elif isinstance(item, MetadataRecord):
            self._check_item_package(name, item.package)
            key = (item.version, item.origin.value)
            existing = self._metadata[name].get(key)
            if existing is not None:
                if existing != item:
                    raise MetadataConflict(
                        f"metadata for {name!r} {key} already attached with a different payload")
                return
            self._metadata[name][key] = item
            if item.origin is MetadataOrigin.REGISTRY:
                self._packages[name].registry_available = True
        elif isinstance(item, UsageStat):
            self._check_item_package(name, item.package)
            existing_usage = self._usage.get(name)
            if existing_usage is not None:
                if existing_usage != item:
                    raise AttachmentConflict(f"usage stats for {name!r} already attached")
                return
            self._usage[name] = item
        else:
            raise TypeError(f"cannot attach {type(item).__name__}")

    def _check_item_package(self, name: str, item_package: str) -> None:
        if normalize_name(item_package) != name:
            raise ValueError(f"item names package {item_package!r} but is attached to {name!r}")

    def _attach_topic(self, name: str, label: TopicLabel) -> None:
        if label.kind is TopicKind.TAXONOMY and label.term not in self._taxonomy:
            raise InvalidTopic(f"taxonomy term {label.term!r} is not in the loaded vocabulary")
        key = (label.kind.value, label.term, label.source)
        self._topics[name].setdefault(key, label)

    def _attach_keyed(self, table: dict, key, item, name: str, what: str) -> None:
        existing = table.get(key)
        if existing is not None:
            if existing != item:
                raise AttachmentConflict(f"{what} already attached to {name!r} with a different payload")
            return
        table[key] = item

    def seal(self, build_timestamp: Optional[int] = None) -> "KnowledgeGraph":
        """Freeze the graph. Mutations after this point raise GraphSealed."""
        if not self._sealed:
            self._sealed = True
            self.build_timestamp = build_timestamp if build_timestamp is not None else int(time.time())
        return self

    # -- read phase --------------------------------------------------------

    @property
    def sealed(self) -> bool:
        return self._sealed

    @property
    def taxonomy(self) -> frozenset:
        return frozenset(self._taxonomy)

    def __len__(self) -> int:
        return len(self._packages)

    def __contains__(self, raw_name: str) -> bool:
        try:
            return normalize_name(raw_name) in self._packages
        except InvalidName:
            return False

    def package(self, raw_name: str) -> PackageNode:
        name = normalize_name(raw_name)
        try:
            return self._packages[name]
        except KeyError:
            raise UnknownPackage(f"package {name!r} is not in the graph") from None

    def package_names(self) -> List[str]:
        return sorted(self._packages)

    def topics_of(self, raw_name: str) -> Tuple[TopicLabel, ...]:
        name = self.package(raw_name).name
        return tuple(self._topics[name][k] for k in sorted(self._topics[name]))

    def vulnerabilities_of(self, raw_name: str) -> Tuple[VulnerabilityRecord, ...]:
        name = self.package(raw_name).name
        return tuple(self._vulnerabilities[name][k] for k in sorted(self._vulnerabilities[name]))

    def quality_of(self, raw_name: str) -> Dict[QualityAttribute, QualityScore]:
        name = self.package(raw_name).name
        return dict(self._quality[name])

    def metadata_of(self, raw_name: str) -> Tuple[MetadataRecord, ...]:
        name = self.package(raw_name).name
        return tuple(self._metadata[name][k] for k in sorted(self._metadata[name]))

    def usage_of(self, raw_name: str) -> Optional[UsageStat]:
        name = self.package(raw_name).name
        return self._usage.get(name)

    def max_script_count(self) -> int:
        return max((stat.script_count for stat in self._usage.values()), default=0)

    def unfixed_vulnerability_count(self, raw_name: str) -> int:
        return sum(1 for v in self.vulnerabilities_of(raw_name) if not v.fixed)

    def packages_by_topic(self, terms: Iterable[str]) -> Dict[str, Tuple[Tuple[str, str], ...]]:
        """Map each package with at least one topic term equal (after
        normalization) to a query term onto its matched (term, kind) pairs.

        Requires a sealed graph: queries must observe a stable snapshot.
        """
        if not self._sealed:
            raise GraphNotSealed("packages_by_topic requires a sealed graph")
        wanted = {normalize_topic_term(t) for t in terms}
        wanted.discard("")
        result: Dict[str, Tuple[Tuple[str, str], ...]] = {}
        if not wanted:
            return result
        for name, topic_table in self._topics.items():
            matched = {
                (label.term, label.kind.value)
                for label in topic_table.values()
                if label.term in wanted
            }
            if matched:
                result[name] = tuple(sorted(matched))
        return result

    def validate(self) -> List[str]:
        """Full-scan integrity check; returns human-readable violations."""
        problems = []
        for table_name, table in (
            ("topics", self._topics),
            ("vulnerabilities", self._vulnerabilities),
            ("quality", self._quality),
            ("metadata", self._metadata),
        ):
            for name in table:
                if name not in self._packages:
                    problems.append(f"{table_name} edge references missing package {name!r}")
        for name in self._usage:
            if name not in self._packages:
                problems.append(f"usage stat references missing package {name!r}")
        for name, node in self._packages.items():
            has_registry = any(
                rec.origin is MetadataOrigin.REGISTRY for rec in self._metadata.get(name, {}).values()
            )
            if node.registry_available != has_registry:
                problems.append(f"registry_available flag inconsistent for {name!r}")
        return problems

    # -- equality & snapshots ------------------------------------------------

    def to_state(self) -> dict:
        """Canonical JSON-able representation (deterministically ordered)."""
        return {
            "format": SNAPSHOT_FORMAT,
            "build_timestamp": self.build_timestamp,
            "sealed": self._sealed,
            "taxonomy": sorted(self._taxonomy),
            "packages": [
                {
                    "name": node.name,
                    "display_name": node.display_name,
                    "registry_available": node.registry_available,
                    "first_seen": node.first_seen,
                    "last_seen": node.last_seen,
                }
                for _, node in sorted(self._packages.items())
            ],
            "topics": [
                {"package": name, "kind": label.kind.value, "term": label.term, "source": label.source}
                for name in sorted(self._topics)
                for _, label in sorted(self._topics[name].items())
            ],
            "vulnerabilities": [
                {
                    "package": name,
                    "id": rec.id,
                    "severity": rec.severity.value,
                    "affected_ranges": [
                        {"introduced": r.introduced, "fixed": r.fixed} for r in rec.affected_ranges
                    ],
                    "fixed": rec.fixed,
                }
                for name in sorted(self._vulnerabilities)
                for _, rec in sorted(self._vulnerabilities[name].items())
            ],
            "quality": [
                {
                    "package": name,
                    "attribute": score.attribute.value,
                    "counts": {"low": score.counts.low, "medium": score.counts.medium,
                               "high": score.counts.high},
                }
                for name in sorted(self._quality)
                for _, score in sorted(self._quality[name].items(), key=lambda kv: kv[0].value)
            ],
            "metadata": [
                {
                    "package": name,
                    "version": rec.version,
                    "origin": rec.origin.value,
                    "requires_runtime": rec.requires_runtime,
                    "keywords": list(rec.keywords),
                    "maintainer_count": rec.maintainer_count,
                    "contributor_count": rec.contributor_count,
                    "star_count": rec.star_count,
                    "fork_count": rec.fork_count,
                    "release_count": rec.release_count,
                    "download_count": rec.download_count,
                    "last_update": rec.last_update,
                }
                for name in sorted(self._metadata)
                for _, rec in sorted(self._metadata[name].items())
            ],
            "usage": [
                {"package": name, "script_count": stat.script_count, "repo_count": stat.repo_count}
                for name, stat in sorted(self._usage.items())
            ],
        }

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, KnowledgeGraph):
            return NotImplemented
        return self.to_state() == other.to_state()

    __hash__ = None  # mutable container


def upsert_package(graph: KnowledgeGraph, raw_name: str, seen: Optional[int] = None) -> PackageNode:
    return graph.upsert_package(raw_name, seen=seen)


def attach(graph: KnowledgeGraph, package: str, item: AttachableItem) -> None:
    graph.attach(package, item)


def packages_by_topic(graph: KnowledgeGraph, terms: Iterable[str]) -> Dict[str, Tuple[Tuple[str, str], ...]]:
    return graph.packages_by_topic(terms)


def seal(graph: KnowledgeGraph, build_timestamp: Optional[int] = None) -> KnowledgeGraph:
    return graph.seal(build_timestamp=build_timestamp)


def save_snapshot(graph: KnowledgeGraph, path) -> None:
    """Write a sealed graph as a canonical, versioned JSON snapshot."""
    if not graph.sealed:
        raise GraphNotSealed("snapshots can only be saved for sealed graphs")
    state = graph.to_state()
    del state["sealed"]
    text = json.dumps(state, sort_keys=True, ensure_ascii=False, indent=1)
    with open(path, "w", encoding="utf-8") as handle:
        handle.write(text + "\n")


def load_snapshot(path) -> KnowledgeGraph:
    """Read a snapshot back into a sealed graph; node/edge/stat-identical
    to the graph that was saved."""
    try:
        with open(path, "r", encoding="utf-8") as handle:
            state = json.load(handle)
    except OSError as exc:
        raise SnapshotError(f"cannot read snapshot {path}: {exc}") from exc
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise SnapshotError(f"snapshot {path} is not valid JSON: {exc}") from exc
    if not isinstance(state, dict):
        raise SnapshotError(f"snapshot {path} has no top-level object")
    found = state.get("format")
    if found != SNAPSHOT_FORMAT:
        raise SnapshotError(
            f"snapshot format {found!r} is not supported (expected {SNAPSHOT_FORMAT!r})")
    try:
        graph = KnowledgeGraph(taxonomy=state["taxonomy"])
        for entry in state["packages"]:
            node = graph.upsert_package(entry["display_name"] or entry["name"])
            if node.name != entry["name"]:
                raise SnapshotError(
                    f"package name {entry['name']!r} does not match its normalization")
            node.first_seen = entry["first_seen"]
            node.last_seen = entry["last_seen"]
        for entry in state["topics"]:
            graph.attach(entry["package"], TopicLabel(
                kind=TopicKind(entry["kind"]), term=entry["term"], source=entry["source"]))
        for entry in state["metadata"]:
            graph.attach(entry["package"], MetadataRecord(
                package=entry["package"],
                version=entry["version"],
                origin=MetadataOrigin(entry["origin"]),
                requires_runtime=entry["requires_runtime"],
                keywords=tuple(entry["keywords"]),
                maintainer_count=entry["maintainer_count"],
                contributor_count=entry["contributor_count"],
                star_count=entry["star_count"],
                fork_count=entry["fork_count"],
                release_count=entry["release_count"],
                download_count=entry["download_count"],
                last_update=entry["last_update"],
            ))
        for entry in state["vulnerabilities"]:
            graph.attach(entry["package"], VulnerabilityRecord(
                id=entry["id"],
                package=entry["package"],
                severity=Severity(entry["severity"]),
                affected_ranges=tuple(
                    VersionInterval(introduced=r["introduced"], fixed=r["fixed"])
                    for r in entry["affected_ranges"]
                ),
                fixed=entry["fixed"],
            ))
        for entry in state["quality"]:
            graph.attach(entry["package"], QualityScore(
                package=entry["package"],
                attribute=QualityAttribute(entry["attribute"]),
                counts=SentimentCounts(
                    low=entry["counts"]["low"],
                    medium=entry["counts"]["medium"],
                    high=entry["counts"]["high"],
                ),
            ))
        for entry in state["usage"]:
            graph.attach(entry["package"], UsageStat(
                package=entry["package"],
                script_count=entry["script_count"],
                repo_count=entry["repo_count"],
            ))
        # registry_available is derived from metadata on attach; confirm the
        # stored flags agree so corrupted snapshots do not load silently.
        for entry in state["packages"]:
            if graph.package(entry["name"]).registry_available != entry["registry_available"]:
                raise SnapshotError(
                    f"registry_available flag for {entry['name']!r} contradicts metadata")
        graph.seal(build_timestamp=state["build_timestamp"])
    except SnapshotError:
        raise
    except (KeyError, TypeError, ValueError, PkgraphError) as exc:
        raise SnapshotError(f"snapshot {path} is malformed: {exc}") from exc
    return graph
