"""HTTP service exposing the inference engine over a sealed snapshot.

All endpoints live under /api/v1 and speak JSON. Responses are pure
functions of (request, snapshot), so identical requests against the same
snapshot produce byte-identical bodies. The snapshot holder swaps
atomically: concurrent requests see the old graph or the new one, never
a mixture.
"""

from __future__ import annotations

from typing import Dict, List, Mapping, Optional

from fastapi import FastAPI
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict, Field

from pkgraph.analytics import usage_histogram
from pkgraph.annotate import Annotator, BaselineAnnotator, EmptyIntent
from pkgraph.graph import (
    SNAPSHOT_FORMAT,
    InvalidName,
    KnowledgeGraph,
    TopicKind,
    UnknownPackage,
    load_snapshot,
    normalize_name,
)
from pkgraph.infer import (
    DEFAULT_COEFFICIENTS,
    DEFAULT_KIND_WEIGHTS,
    ScoreCoefficients,
    build_query,
    query_to_dict,
    recommend,
    recommendation_to_dict,
)
from pkgraph.quality import QualityAttribute


class SnapshotHolder:
    """Single mutable reference to the active graph; assignment is the
    atomic swap that makes reloads safe under concurrency."""

    def __init__(self, graph: Optional[KnowledgeGraph] = None):
        self.graph = graph

    def swap(self, graph: KnowledgeGraph) -> None:
        self.graph = graph


class FiltersModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    exclude_vulnerable: bool = False
    min_quality: Optional[float] = Field(default=None, ge=0.0, le=1.0)
    required_attributes: List[str] = Field(default_factory=list)
    runtime_constraint: Optional[str] = None


class CoefficientsModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    topical: Optional[float] = Field(default=None, ge=0.0)
    quality: Optional[float] = Field(default=None, ge=0.0)
    usage: Optional[float] = Field(default=None, ge=0.0)
    vulnerability: Optional[float] = Field(default=None, ge=0.0)


class RecommendRequestModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    story: str = Field(min_length=1, max_length=10_000)
    k: int = Field(default=10, ge=1, le=100)
    filters: FiltersModel = Field(default_factory=FiltersModel)
    coefficients: Optional[CoefficientsModel] = None


class CompareRequestModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    names: List[str] = Field(min_length=2, max_length=5)


def _error(status: int, error: str, detail, **extra) -> JSONResponse:
    body = {"error": error, "detail": detail}
    body.update(extra)
    return JSONResponse(status_code=status, content=body)


def create_app(
    snapshot_path=None,
    graph: Optional[KnowledgeGraph] = None,
    annotator: Optional[Annotator] = None,
    coefficients: ScoreCoefficients = DEFAULT_COEFFICIENTS,
    kind_weights: Mapping[TopicKind, float] = DEFAULT_KIND_WEIGHTS,
) -> FastAPI:
    """Build the service; a snapshot may be given up front or loaded
    later via `app.state.holder.swap(...)`. Requests before any snapshot
    is loaded receive 503."""
    app = FastAPI(title="pkgraph", version="1")
    holder = SnapshotHolder(graph)
    if snapshot_path is not None and graph is None:
        holder.swap(load_snapshot(snapshot_path))
    app.state.holder = holder
    app.state.annotator = annotator if annotator is not None else BaselineAnnotator()
    app.state.coefficients = coefficients
    app.state.kind_weights = dict(kind_weights)

    @app.exception_handler(RequestValidationError)
    async def handle_validation(_, exc: RequestValidationError):
        return _error(400, "invalid_request", exc.errors())

    def active_graph() -> Optional[KnowledgeGraph]:
        return app.state.holder.graph

    @app.get("/api/v1/health")
    def health():
        current = active_graph()
        if current is None:
            return _error(503, "loading", "no snapshot loaded")
        return {
            "status": "ok",
            "graph_build_timestamp": current.build_timestamp,
            "snapshot_format": SNAPSHOT_FORMAT,
        }

    @app.post("/api/v1/recommend")
    def recommend_endpoint(request: RecommendRequestModel):
        current = active_graph()
        if current is None:
            return _error(503, "loading", "no snapshot loaded")
        try:
            required = [QualityAttribute(v) for v in request.filters.required_attributes]
        except ValueError as exc:
            return _error(400, "invalid_request", f"unknown quality attribute: {exc}")
        coefficients_active: ScoreCoefficients = app.state.coefficients
        if request.coefficients is not None:
            overrides = {
                name: value
                for name, value in request.coefficients.model_dump().items()
                if value is not None
            }
            merged = {
                "topical": coefficients_active.topical,
                "quality": coefficients_active.quality,
                "usage": coefficients_active.usage,
                "vulnerability": coefficients_active.vulnerability,
            }
            merged.update(overrides)
            coefficients_active = ScoreCoefficients(**merged)
        try:
            terms = app.state.annotator.extract_intent_terms(request.story)
            query = build_query(
                terms,
                k=request.k,
                exclude_vulnerable=request.filters.exclude_vulnerable,
                min_quality=request.filters.min_quality,
                runtime_constraint=request.filters.runtime_constraint,
                required_attributes=required,
            )
        except EmptyIntent as exc:
            return _error(422, "empty_intent", str(exc))
        result = recommend(query, current, coefficients_active, app.state.kind_weights)
        if result.empty:
            return _error(422, "empty_result", "no candidate satisfied the query",
                          diagnostics=list(result.diagnostics))
        return {
            "recommendations": [recommendation_to_dict(rec) for rec in result.recommendations],
            "query_echo": query_to_dict(query),
            "graph_build_timestamp": current.build_timestamp,
        }

    @app.get("/api/v1/packages/{name}")
    def package_detail(name: str):
        current = active_graph()
        if current is None:
            return _error(503, "loading", "no snapshot loaded")
        try:
            node = current.package(name)
        except (UnknownPackage, InvalidName) as exc:
            return _error(404, "unknown_package", str(exc))
        quality = current.quality_of(node.name)
        usage = current.usage_of(node.name)
        return {
            "package": {
                "name": node.name,
                "display_name": node.display_name,
                "registry_available": node.registry_available,
                "first_seen": node.first_seen,
                "last_seen": node.last_seen,
            },
            "topics": [
                {"kind": t.kind.value, "term": t.term, "source": t.source}
                for t in current.topics_of(node.name)
            ],
            "metadata": [
                {
                    "version": m.version,
                    "origin": m.origin.value,
                    "requires_runtime": m.requires_runtime,
                    "keywords": list(m.keywords),
                    "maintainer_count": m.maintainer_count,
                    "contributor_count": m.contributor_count,
                    "star_count": m.star_count,
                    "fork_count": m.fork_count,
                    "release_count": m.release_count,
                    "download_count": m.download_count,
                    "last_update": m.last_update,
                }
                for m in current.metadata_of(node.name)
            ],
            "vulnerabilities": [
                {
                    "id": v.id,
                    "severity": v.severity.value,
                    "fixed": v.fixed,
                    "affected_ranges": [
                        {"introduced": r.introduced, "fixed": r.fixed}
                        for r in v.affected_ranges
                    ],
                }
                for v in current.vulnerabilities_of(node.name)
            ],
            "quality": {
                attr.value: {
                    "score": quality[attr].score,
                    "counts": {
                        "low": quality[attr].counts.low,
                        "medium": quality[attr].counts.medium,
                        "high": quality[attr].counts.high,
                    },
                }
                for attr in sorted(quality, key=lambda a: a.value)
            },
            "usage": None if usage is None else {
                "script_count": usage.script_count,
                "repo_count": usage.repo_count,
            },
        }

    @app.post("/api/v1/compare")
    def compare(request: CompareRequestModel):
        current = active_graph()
        if current is None:
            return _error(503, "loading", "no snapshot loaded")
        names = []
        for raw in request.names:
            try:
                names.append(current.package(raw).name)
            except (UnknownPackage, InvalidName) as exc:
                return _error(404, "unknown_package", str(exc))
        quality_by_name: Dict[str, dict] = {
            name: current.quality_of(name) for name in names
        }
        return {
            "packages": names,
            "attributes": [
                {
                    "attribute": attr.value,
                    "scores": {
                        name: (
                            quality_by_name[name][attr].score
                            if attr in quality_by_name[name]
                            else None
                        )
                        for name in names
                    },
                }
                for attr in QualityAttribute
            ],
        }

    @app.get("/api/v1/analytics/usage")
    def analytics_usage(scope: str = "all"):
        current = active_graph()
        if current is None:
            return _error(503, "loading", "no snapshot loaded")
        if scope not in ("all", "registry"):
            return _error(400, "invalid_request", f"scope must be 'all' or 'registry', got {scope!r}")
        stats = {}
        for name in current.package_names():
            if scope == "registry" and not current.package(name).registry_available:
                continue
            stat = current.usage_of(name)
            if stat is not None and stat.script_count >= 1:
                stats[name] = stat.script_count
        report = usage_histogram(stats)
        return {
            "scope": scope,
            "total_items": report.total_items,
            "rows": [
                {"interval": row.label, "count": row.count, "percentage": row.percentage}
                for row in report.rows
            ],
        }

    return app


def serve(snapshot_path, host: str = "127.0.0.1", port: int = 8080, **app_kwargs) -> None:
    """Run the service over a snapshot file (blocking)."""
    import uvicorn

    app = create_app(snapshot_path=snapshot_path, **app_kwargs)
    uvicorn.run(app, host=host, port=port, log_config=None)
