"""HTTP transports for the acquisition clients.

Three interchangeable implementations share one request interface:

  LiveTransport      talks to real services with per-host pacing and
                     retry/backoff;
  RecordingTransport wraps another transport and persists every exchange
                     into a fixture bundle (volatile headers stripped);
  ReplayTransport    serves a fixture bundle back, byte-stable, with no
                     network at all.

A request's identity is the canonical key of (method, url, sorted query
parameters, canonical JSON body), so replay lookups are insensitive to
parameter ordering.
"""

from __future__ import annotations

import hashlib
import json
import random
import threading
import time
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path
from typing import Dict, Iterator, Mapping, Optional
from urllib.parse import parse_qsl, urlencode, urlsplit

from pkgraph.errors import PkgraphError

FIXTURE_FORMAT = "pkgraph-fixture/1"


class FetchError(PkgraphError):
    """Transport failure that survived all retries."""

    def __init__(self, host: str, attempts: int, detail: str):
        super().__init__(f"fetch from {host} failed after {attempts} attempt(s): {detail}")
        self.host = host
        self.attempts = attempts


class ParseError(PkgraphError):
    """Malformed payload; the message references the offending content."""


class ReplayMiss(PkgraphError):
    """The fixture bundle holds no recording for the request."""


class InvalidQuery(PkgraphError):
    """Client invoked with an empty or unusable query."""


class FixtureError(PkgraphError):
    """Fixture bundle is unreadable or has an unsupported format version."""


@dataclass(frozen=True)
class FetchPolicy:
    """Pacing and retry limits for live fetching."""

    max_parallel: int = 4
    per_host_interval_ms: int = 250
    max_retries: int = 3
    backoff_base_ms: int = 200

    def __post_init__(self) -> None:
        for name in ("max_parallel", "per_host_interval_ms", "max_retries", "backoff_base_ms"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass(frozen=True)
class TransportResponse:
    status: int
    body: str
    content_type: str = "application/json"

    def json(self):
        try:
            return json.loads(self.body)
        except json.JSONDecodeError as exc:
            snippet = self.body[:200]
            raise ParseError(f"response is not valid JSON ({exc}); payload starts: {snippet!r}") from exc


def canonical_key(method: str, url: str, params: Optional[Mapping] = None, json_body=None) -> str:
    """Stable identity of a request, independent of parameter order."""
    parts = urlsplit(url)
    query = parse_qsl(parts.query, keep_blank_values=True)
    if params:
        query.extend((str(k), str(v)) for k, v in params.items())
    base = f"{parts.scheme}://{parts.netloc}{parts.path}"
    body_text = "" if json_body is None else json.dumps(json_body, sort_keys=True, ensure_ascii=False)
    material = "\n".join([method.upper(), base, urlencode(sorted(query)), body_text])
    return hashlib.sha256(material.encode("utf-8")).hexdigest()


class StaticTransport:
    """In-memory transport serving preloaded responses; the offline
    stand-in for a live service in tests and demos."""

    def __init__(self):
        self._responses: Dict[str, TransportResponse] = {}

    def add(self, method: str, url: str, payload, *, params: Optional[Mapping] = None,
            status: int = 200) -> None:
        body = payload if isinstance(payload, str) else json.dumps(payload, ensure_ascii=False)
        key = canonical_key(method, url, params, None if method.upper() == "GET" else payload)
        self._responses[key] = TransportResponse(status=status, body=body)

    def add_json_request(self, method: str, url: str, json_body, payload, *,
                         status: int = 200) -> None:
        body = payload if isinstance(payload, str) else json.dumps(payload, ensure_ascii=False)
        key = canonical_key(method, url, None, json_body)
        self._responses[key] = TransportResponse(status=status, body=body)

    def request(self, method: str, url: str, *, params: Optional[Mapping] = None,
                json_body=None) -> TransportResponse:
        key = canonical_key(method, url, params, json_body)
        try:
            return self._responses[key]
        except KeyError:
            raise ReplayMiss(f"no canned response for {method.upper()} {url} (key {key[:12]}…)") from None


class ReplayTransport:
    """Read-only transport over a recorded fixture bundle.

    Safe for concurrent readers: the manifest and entries are loaded once
    and never mutated.
    """

    def __init__(self, bundle_dir):
        self.bundle_dir = Path(bundle_dir)
        manifest_path = self.bundle_dir / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except OSError as exc:
            raise FixtureError(f"cannot read fixture manifest {manifest_path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise FixtureError(f"fixture manifest {manifest_path} is not valid JSON: {exc}") from exc
        found = manifest.get("format")
        if found != FIXTURE_FORMAT:
            raise FixtureError(
                f"fixture format {found!r} is not supported (expected {FIXTURE_FORMAT!r})")
        self._entries: Dict[str, dict] = dict(manifest.get("entries", {}))

    def request(self, method: str, url: str, *, params: Optional[Mapping] = None,
                json_body=None) -> TransportResponse:
        key = canonical_key(method, url, params, json_body)
        entry = self._entries.get(key)
        if entry is None:
            raise ReplayMiss(f"fixture bundle has no recording for {method.upper()} {url}")
        try:
            payload = json.loads((self.bundle_dir / entry["file"]).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError, KeyError) as exc:
            raise FixtureError(f"fixture entry for {method.upper()} {url} is unreadable: {exc}") from exc
        return TransportResponse(
            status=payload["status"],
            body=payload["body"],
            content_type=payload.get("content_type", "application/json"),
        )


class RecordingTransport:
    """Wrap another transport and persist each exchange into a bundle.

    Entries are keyed by canonical request identity, so re-recording a
    request supersedes the previous capture instead of duplicating it.
    Only the content type survives of the response headers; volatile
    headers (dates, request ids, rate-limit counters) never reach disk.
    """

    def __init__(self, inner, out_dir):
        self.inner = inner
        self.out_dir = Path(out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)
        self._entries: Dict[str, dict] = {}
        manifest_path = self.out_dir / "manifest.json"
        if manifest_path.exists():
            existing = json.loads(manifest_path.read_text(encoding="utf-8"))
            if existing.get("format") == FIXTURE_FORMAT:
                self._entries = dict(existing.get("entries", {}))
        self._lock = threading.Lock()

    def request(self, method: str, url: str, *, params: Optional[Mapping] = None,
                json_body=None) -> TransportResponse:
        response = self.inner.request(method, url, params=params, json_body=json_body)
        key = canonical_key(method, url, params, json_body)
        record = {
            "status": response.status,
            "content_type": response.content_type,
            "body": response.body,
        }
        with self._lock:
            file_name = f"{key}.json"
            (self.out_dir / file_name).write_text(
                json.dumps(record, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
            self._entries[key] = {"file": file_name, "method": method.upper(), "url": url}
            self._write_manifest()
        return response

    def _write_manifest(self) -> None:
        manifest = {"format": FIXTURE_FORMAT, "entries": dict(sorted(self._entries.items()))}
        tmp = self.out_dir / "manifest.json.tmp"
        tmp.write_text(json.dumps(manifest, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")
        tmp.replace(self.out_dir / "manifest.json")


@contextmanager
def record_session(live_transport, out_dir) -> Iterator[RecordingTransport]:
    """Record every request made through the yielded transport into a
    replayable fixture bundle under `out_dir`."""
    recorder = RecordingTransport(live_transport, out_dir)
    yield recorder


class LiveTransport:
    """Talks to real HTTP services with per-host pacing, bounded
    parallelism, and exponential backoff with jitter.

    The clock, sleeper, and jitter source are injectable so the pacing
    contract is testable without waiting on wall time.
    """

    RETRY_STATUSES = (429, 500, 502, 503, 504)

    def __init__(
        self,
        policy: FetchPolicy = FetchPolicy(),
        headers: Optional[Mapping[str, str]] = None,
        clock=time.monotonic,
        sleep=time.sleep,
        rng: Optional[random.Random] = None,
        session=None,
    ):
        import requests  # deferred so offline use never needs it

        self.policy = policy
        self.headers = dict(headers or {})
        self._clock = clock
        self._sleep = sleep
        self._rng = rng if rng is not None else random.Random()
        self._session = session if session is not None else requests.Session()
        self._requests = requests
        self._lock = threading.Lock()
        self._slots = threading.BoundedSemaphore(policy.max_parallel)
        self._last_request: Dict[str, float] = {}

    def _pace(self, host: str) -> None:
        interval = self.policy.per_host_interval_ms / 1000.0
        while True:
            with self._lock:
                now = self._clock()
                last = self._last_request.get(host)
                if last is None or now - last >= interval:
                    self._last_request[host] = now
                    return
                wait = interval - (now - last)
            self._sleep(wait)

    def request(self, method: str, url: str, *, params: Optional[Mapping] = None,
                json_body=None) -> TransportResponse:
        host = urlsplit(url).netloc
        detail = "no attempt made"
        with self._slots:
            for attempt in range(1, self.policy.max_retries + 1):
                self._pace(host)
                try:
                    raw = self._session.request(
                        method, url, params=dict(params or {}), json=json_body,
                        headers=self.headers, timeout=30)
                except self._requests.RequestException as exc:
                    detail = str(exc)
                else:
                    if raw.status_code not in self.RETRY_STATUSES:
                        return TransportResponse(
                            status=raw.status_code,
                            body=raw.text,
                            content_type=raw.headers.get("Content-Type", "application/json"),
                        )
                    detail = f"status {raw.status_code}"
                if attempt < self.policy.max_retries:
                    backoff = self.policy.backoff_base_ms / 1000.0 * (2 ** (attempt - 1))
                    self._sleep(backoff * (1.0 + self._rng.random()))
        raise FetchError(host=host, attempts=self.policy.max_retries, detail=detail)
