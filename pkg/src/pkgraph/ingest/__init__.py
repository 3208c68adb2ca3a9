"""Acquisition clients for repositories, registry metadata, vulnerability
advisories, and community reviews, with record/replay transports so the
whole pipeline runs offline."""

from pkgraph.ingest.clients import (
    IngestEndpoints,
    Platform,
    RepoRef,
    ReviewStatement,
    collect_reviews,
    fetch_registry_metadata,
    fetch_vulnerabilities,
    register_review_adapter,
    search_repositories,
)
from pkgraph.ingest.transport import (
    FIXTURE_FORMAT,
    FetchError,
    FetchPolicy,
    FixtureError,
    InvalidQuery,
    LiveTransport,
    ParseError,
    RecordingTransport,
    ReplayMiss,
    ReplayTransport,
    StaticTransport,
    TransportResponse,
    canonical_key,
    record_session,
)

__all__ = [
    "FIXTURE_FORMAT",
    "FetchError",
    "FetchPolicy",
    "FixtureError",
    "IngestEndpoints",
    "InvalidQuery",
    "LiveTransport",
    "ParseError",
    "Platform",
    "RecordingTransport",
    "ReplayMiss",
    "ReplayTransport",
    "RepoRef",
    "ReviewStatement",
    "StaticTransport",
    "TransportResponse",
    "canonical_key",
    "collect_reviews",
    "fetch_registry_metadata",
    "fetch_vulnerabilities",
    "record_session",
    "register_review_adapter",
    "search_repositories",
]
