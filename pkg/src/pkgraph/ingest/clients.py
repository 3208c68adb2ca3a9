"""Acquisition clients: repository search, registry metadata,
vulnerability advisories, and community review collection.

Every client takes a transport (live, recording, or replay) and is a pure
function of its inputs and the transport's responses, so replayed runs
are fully deterministic.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple
from urllib.parse import urlsplit

from pkgraph.errors import PkgraphError
from pkgraph.graph import (
    MetadataOrigin,
    MetadataRecord,
    Severity,
    VersionInterval,
    VulnerabilityRecord,
    normalize_name,
)
from pkgraph.ingest.transport import InvalidQuery, ParseError, TransportResponse


class Platform(str, Enum):
    QA_FORUM = "qa_forum"
    CODE_HOST = "code_host"
    AGGREGATOR = "aggregator"
    LINK_FORUM = "link_forum"
    BLOG = "blog"


@dataclass(frozen=True)
class RepoRef:
    """A repository surfaced by taxonomy-term search; unique per
    (host, owner, name)."""

    host: str
    owner: str
    name: str
    matched_terms: Tuple[str, ...] = ()
    topics: Tuple[str, ...] = ()
    stars: int = 0
    forks: int = 0
    contributors: int = 0
    last_push: Optional[int] = None

    @property
    def full_name(self) -> str:
        return f"{self.owner}/{self.name}"


@dataclass(frozen=True)
class ReviewStatement:
    package: str
    platform: Platform
    text: str
    url: str
    fetched_at: Optional[int] = None

    def __post_init__(self) -> None:
        if not self.text or not self.text.strip():
            raise ValueError("review text must be non-empty")
        parts = urlsplit(self.url)
        if not parts.scheme or not parts.netloc:
            raise ValueError(f"review url {self.url!r} is not well-formed")


@dataclass(frozen=True)
class IngestEndpoints:
    """Service endpoints; overridable via environment variables
    (PKGRAPH_CODEHOST_URL, PKGRAPH_REGISTRY_URL, PKGRAPH_OSV_URL) and the
    PKGRAPH_CODEHOST_TOKEN auth token for live fetching."""

    code_host_search_url: str = "https://api.github.com/search/repositories"
    registry_project_url: str = "https://pypi.org/pypi/{package}/json"
    osv_query_url: str = "https://api.osv.dev/v1/query"
    review_search_urls: Mapping[Platform, str] = field(default_factory=lambda: dict(_DEFAULT_REVIEW_URLS))

    @classmethod
    def from_env(cls) -> "IngestEndpoints":
        return cls(
            code_host_search_url=os.environ.get(
                "PKGRAPH_CODEHOST_URL", cls.code_host_search_url),
            registry_project_url=os.environ.get(
                "PKGRAPH_REGISTRY_URL", cls.registry_project_url),
            osv_query_url=os.environ.get("PKGRAPH_OSV_URL", cls.osv_query_url),
        )


_DEFAULT_REVIEW_URLS: Dict[Platform, str] = {
    Platform.QA_FORUM: "https://api.stackexchange.com/2.3/search/advanced",
    Platform.CODE_HOST: "https://api.github.com/search/issues",
    Platform.AGGREGATOR: "https://reviews.example.com/api/v1/search",
    Platform.LINK_FORUM: "https://hn.algolia.com/api/v1/search",
    Platform.BLOG: "https://dev.to/api/articles",
}


def parse_timestamp(value) -> Optional[int]:
    """Best-effort timestamp normalization to UTC epoch seconds."""
    if value is None:
        return None
    if isinstance(value, bool):
        return None
    if isinstance(value, (int, float)):
        return int(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            return None
        if text.endswith("Z"):
            text = text[:-1] + "+00:00"
        try:
            moment = datetime.fromisoformat(text)
        except ValueError:
            return None
        if moment.tzinfo is None:
            moment = moment.replace(tzinfo=timezone.utc)
        return int(moment.timestamp())
    return None


# ---------------------------------------------------------------------------
# Repository search
# ---------------------------------------------------------------------------

def search_repositories(
    terms: Sequence[str],
    transport,
    endpoints: IngestEndpoints = IngestEndpoints(),
    results_per_term: int = 30,
) -> List[RepoRef]:
    """Search the code host for each taxonomy term; returns repositories
    deduplicated by (host, owner, name), each carrying the subset of input
    terms that matched it."""
    if not terms:
        raise InvalidQuery("at least one search term is required")
    host = urlsplit(endpoints.code_host_search_url).netloc
    merged: Dict[Tuple[str, str, str], Dict] = {}
    for term in terms:
        response = transport.request(
            "GET", endpoints.code_host_search_url,
            params={"q": term, "per_page": results_per_term})
        payload = _json_payload(response, f"repository search for {term!r}")
        items = payload.get("items")
        if not isinstance(items, list):
            raise ParseError(f"repository search for {term!r} has no items list")
        for item in items:
            try:
                owner, name = _repo_owner_name(item)
                ref_key = (host, owner, name)
                entry = merged.setdefault(ref_key, {
                    "topics": tuple(str(t) for t in item.get("topics", ())),
                    "stars": int(item.get("stargazers_count", 0)),
                    "forks": int(item.get("forks_count", 0)),
                    "contributors": int(item.get("contributors_count", 0)),
                    "last_push": parse_timestamp(item.get("pushed_at")),
                    "terms": set(),
                })
                entry["terms"].add(term)
            except (TypeError, ValueError, KeyError) as exc:
                raise ParseError(f"malformed repository item in search for {term!r}: {exc}") from exc
    refs = [
        RepoRef(
            host=key[0], owner=key[1], name=key[2],
            matched_terms=tuple(sorted(entry["terms"])),
            topics=entry["topics"],
            stars=entry["stars"], forks=entry["forks"],
            contributors=entry["contributors"], last_push=entry["last_push"],
        )
        for key, entry in merged.items()
    ]
    return sorted(refs, key=lambda r: (r.host, r.owner, r.name))


def _repo_owner_name(item: Mapping) -> Tuple[str, str]:
    full = item.get("full_name")
    if isinstance(full, str) and "/" in full:
        owner, name = full.split("/", 1)
        return owner, name
    owner = item.get("owner")
    if isinstance(owner, Mapping):
        owner = owner.get("login")
    name = item.get("name")
    if not owner or not name:
        raise KeyError("missing owner/name")
    return str(owner), str(name)


def _json_payload(response: TransportResponse, what: str):
    if response.status != 200:
        raise ParseError(f"{what} returned status {response.status}")
    return response.json()


# ---------------------------------------------------------------------------
# Registry metadata
# ---------------------------------------------------------------------------

def fetch_registry_metadata(
    package: str,
    transport,
    endpoints: IngestEndpoints = IngestEndpoints(),
) -> Optional[MetadataRecord]:
    """Fetch the registry record for a normalized package name.

    Returns None when the registry has no such project; that is a value
    (the package simply is not registry-available), not an error.
    """
    name = normalize_name(package)
    url = endpoints.registry_project_url.format(package=name)
    response = transport.request("GET", url)
    if response.status == 404:
        return None
    payload = _json_payload(response, f"registry metadata for {name!r}")
    try:
        info = payload["info"]
        version = str(info["version"])
        keywords = _parse_keywords(info.get("keywords"))
        releases = payload.get("releases", {})
        last_update = max(
            (
                parse_timestamp(file_info.get("upload_time_iso_8601") or file_info.get("upload_time"))
                for files in releases.values() if isinstance(files, list)
                for file_info in files
            ),
            key=lambda ts: ts if ts is not None else -1,
            default=None,
        )
        maintainer_count = sum(
            1 for key in ("maintainer_email", "author_email") if info.get(key))
        return MetadataRecord(
            package=name,
            version=version,
            origin=MetadataOrigin.REGISTRY,
            requires_runtime=info.get("requires_python") or None,
            keywords=keywords,
            maintainer_count=maintainer_count,
            release_count=len(releases),
            download_count=int(payload.get("download_count", 0)),
            last_update=last_update,
        )
    except (KeyError, TypeError, ValueError) as exc:
        snippet = response.body[:200]
        raise ParseError(
            f"registry metadata for {name!r} is malformed ({exc}); payload starts: {snippet!r}"
        ) from exc


def _parse_keywords(raw) -> Tuple[str, ...]:
    if raw is None:
        return ()
    if isinstance(raw, str):
        parts = [part.strip() for part in raw.split(",")]
    elif isinstance(raw, list):
        parts = [str(part).strip() for part in raw]
    else:
        raise ValueError(f"unsupported keywords field: {raw!r}")
    return tuple(part for part in parts if part)


# ---------------------------------------------------------------------------
# Vulnerabilities
# ---------------------------------------------------------------------------

_SEVERITY_NAMES = {
    "low": Severity.LOW,
    "minimal": Severity.LOW,
    "moderate": Severity.MEDIUM,
    "medium": Severity.MEDIUM,
    "high": Severity.HIGH,
    "critical": Severity.CRITICAL,
}


def fetch_vulnerabilities(
    package: str,
    transport,
    endpoints: IngestEndpoints = IngestEndpoints(),
    ecosystem: str = "PyPI",
) -> List[VulnerabilityRecord]:
    """Query the vulnerability database for advisories affecting the
    package; clean packages yield an empty list."""
    name = normalize_name(package)
    response = transport.request(
        "POST", endpoints.osv_query_url,
        json_body={"package": {"name": name, "ecosystem": ecosystem}})
    payload = _json_payload(response, f"vulnerability query for {name!r}")
    advisories = payload.get("vulns", [])
    if not isinstance(advisories, list):
        raise ParseError(f"vulnerability payload for {name!r} has a non-list 'vulns'")
    records = []
    for advisory in advisories:
        try:
            records.append(_parse_advisory(name, advisory))
        except (KeyError, TypeError, ValueError) as exc:
            raise ParseError(f"malformed advisory for {name!r}: {exc}") from exc
    return sorted(records, key=lambda r: r.id)


def _parse_advisory(package: str, advisory: Mapping) -> VulnerabilityRecord:
    advisory_id = str(advisory["id"])
    severity = Severity.UNKNOWN
    database_specific = advisory.get("database_specific")
    if isinstance(database_specific, Mapping):
        severity = _SEVERITY_NAMES.get(
            str(database_specific.get("severity", "")).lower(), Severity.UNKNOWN)
    intervals = []
    all_fixed = True
    any_range = False
    for affected in advisory.get("affected", []):
        for version_range in affected.get("ranges", []):
            introduced = None
            fixed_version = None
            for event in version_range.get("events", []):
                if "introduced" in event:
                    introduced = str(event["introduced"])
                if "fixed" in event:
                    fixed_version = str(event["fixed"])
            any_range = True
            if fixed_version is None:
                all_fixed = False
            intervals.append(VersionInterval(introduced=introduced or "0", fixed=fixed_version))
    return VulnerabilityRecord(
        id=advisory_id,
        package=package,
        severity=severity,
        affected_ranges=tuple(intervals),
        fixed=any_range and all_fixed,
    )


# ---------------------------------------------------------------------------
# Review collection (plug-in adapter registry keyed by platform)
# ---------------------------------------------------------------------------

ReviewItem = Tuple[str, str, Optional[int]]  # (text, url, fetched_at)
RequestSpec = Tuple[str, Optional[Mapping]]  # (url, params)
AdapterBuild = Callable[[str, IngestEndpoints], RequestSpec]
AdapterParse = Callable[[object], List[ReviewItem]]

_REVIEW_ADAPTERS: Dict[Platform, Tuple[AdapterBuild, AdapterParse]] = {}


def register_review_adapter(platform: Platform, build: AdapterBuild, parse: AdapterParse) -> None:
    """Register (or replace) the request builder and payload parser for a
    review platform; new sources plug in without touching the client."""
    _REVIEW_ADAPTERS[platform] = (build, parse)


def _qa_forum_build(package: str, endpoints: IngestEndpoints) -> RequestSpec:
    return endpoints.review_search_urls[Platform.QA_FORUM], {
        "site": "stackoverflow", "q": package, "sort": "relevance"}


def _qa_forum_parse(payload) -> List[ReviewItem]:
    items = payload.get("items", []) if isinstance(payload, Mapping) else []
    out = []
    for item in items:
        text = " ".join(part for part in (item.get("title"), item.get("body")) if part)
        out.append((text, item.get("link", ""), parse_timestamp(item.get("creation_date"))))
    return out


def _generic_items_build(platform: Platform):
    def build(package: str, endpoints: IngestEndpoints) -> RequestSpec:
        return endpoints.review_search_urls[platform], {"q": package}
    return build


def _generic_items_parse(payload) -> List[ReviewItem]:
    items = payload.get("items", []) if isinstance(payload, Mapping) else payload
    out = []
    for item in items or []:
        out.append((
            item.get("text") or item.get("title", ""),
            item.get("url", ""),
            parse_timestamp(item.get("fetched_at") or item.get("created_at")),
        ))
    return out


def _link_forum_build(package: str, endpoints: IngestEndpoints) -> RequestSpec:
    return endpoints.review_search_urls[Platform.LINK_FORUM], {"query": package}


def _link_forum_parse(payload) -> List[ReviewItem]:
    hits = payload.get("hits", []) if isinstance(payload, Mapping) else []
    out = []
    for hit in hits:
        text = hit.get("comment_text") or hit.get("title") or ""
        url = hit.get("story_url") or hit.get("url") or ""
        out.append((text, url, parse_timestamp(hit.get("created_at_i") or hit.get("created_at"))))
    return out


register_review_adapter(Platform.QA_FORUM, _qa_forum_build, _qa_forum_parse)
register_review_adapter(Platform.CODE_HOST, _generic_items_build(Platform.CODE_HOST), _generic_items_parse)
register_review_adapter(Platform.AGGREGATOR, _generic_items_build(Platform.AGGREGATOR), _generic_items_parse)
register_review_adapter(Platform.LINK_FORUM, _link_forum_build, _link_forum_parse)
register_review_adapter(Platform.BLOG, _generic_items_build(Platform.BLOG), _generic_items_parse)


def collect_reviews(
    package: str,
    platforms: Iterable[Platform],
    transport,
    endpoints: IngestEndpoints = IngestEndpoints(),
) -> Tuple[List[ReviewStatement], List[str]]:
    """Collect review statements for a package across platforms.

    Per-platform failures are reported in the warnings list and do not
    abort collection: partial results are better than none. Statements
    are deduplicated by (platform, url, text hash) and returned in
    deterministic (platform, url) order.
    """
    platform_list = list(platforms)
    if not platform_list:
        raise InvalidQuery("at least one review platform is required")
    name = normalize_name(package)
    warnings: List[str] = []
    collected: Dict[Tuple[str, str, str], ReviewStatement] = {}
    for platform in sorted(set(platform_list), key=lambda p: p.value):
        adapter = _REVIEW_ADAPTERS.get(platform)
        if adapter is None:
            warnings.append(f"{platform.value}: no adapter registered")
            continue
        build, parse = adapter
        try:
            url, params = build(name, endpoints)
            response = transport.request("GET", url, params=params)
            payload = _json_payload(response, f"{platform.value} reviews for {name!r}")
            items = parse(payload)
        except PkgraphError as exc:
            warnings.append(f"{platform.value}: {exc}")
            continue
        for text, item_url, fetched_at in items:
            try:
                statement = ReviewStatement(
                    package=name, platform=platform, text=text, url=item_url,
                    fetched_at=fetched_at)
            except ValueError as exc:
                warnings.append(f"{platform.value}: skipped item ({exc})")
                continue
            digest = hashlib.sha256(statement.text.encode("utf-8")).hexdigest()
            collected.setdefault((platform.value, statement.url, digest), statement)
    statements = [collected[key] for key in sorted(collected)]
    return statements, warnings
