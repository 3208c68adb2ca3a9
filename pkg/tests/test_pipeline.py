from __future__ import annotations

import pytest

import trio_fixture
from pkgraph.graph import TopicKind
from pkgraph.imports import Resolver, scan_corpus
from pkgraph.ingest import Platform, ReplayTransport
from pkgraph.pipeline import (
    Staging,
    StagingError,
    build_graph,
    load_scan,
    load_staging,
    repo_corpus_key,
    run_ingest,
    save_scan,
    write_staging,
)
from pkgraph.quality import QualityAttribute


@pytest.fixture(scope="module")
def trio_scan(tmp_path_factory):
    root = tmp_path_factory.mktemp("corpus")
    trio_fixture.write_corpus(root)
    resolver = Resolver(registry_index=trio_fixture.REGISTRY_INDEX, alias_table={})
    return scan_corpus(root, resolver)


@pytest.fixture(scope="module")
def trio_staging(tmp_path_factory):
    bundle = tmp_path_factory.mktemp("bundle")
    trio_fixture.build_replay_bundle(bundle)
    return run_ingest(
        trio_fixture.PACKAGES,
        [trio_fixture.SEARCH_TERM],
        list(trio_fixture.PLATFORMS),
        ReplayTransport(bundle),
    )


def test_scan_round_trip(trio_scan, tmp_path):
    path = tmp_path / "scan.json"
    save_scan(trio_scan, path)
    loaded = load_scan(path)
    assert loaded.usage == trio_scan.usage
    assert loaded.unresolved == trio_scan.unresolved
    assert loaded.resolutions == trio_scan.resolutions
    assert loaded.repo_packages == trio_scan.repo_packages
    assert loaded.files_scanned == trio_scan.files_scanned


def test_scan_load_rejects_bad_format(tmp_path):
    path = tmp_path / "scan.json"
    path.write_text('{"format": "pkgraph-scan/99"}', encoding="utf-8")
    with pytest.raises(StagingError):
        load_scan(path)


def test_staging_round_trip(trio_staging, tmp_path):
    directory = tmp_path / "staging"
    write_staging(trio_staging, directory)
    loaded = load_staging(directory)
    assert loaded.repos == trio_staging.repos
    assert loaded.metadata == trio_staging.metadata
    assert loaded.vulnerabilities == trio_staging.vulnerabilities
    assert loaded.reviews == trio_staging.reviews
    assert loaded.warnings == trio_staging.warnings


def test_staging_missing_directory(tmp_path):
    with pytest.raises(StagingError):
        load_staging(tmp_path / "absent")


def test_repo_corpus_key(trio_staging):
    keys = {repo_corpus_key(repo) for repo in trio_staging.repos}
    assert keys == {"pyshop__storefront", "nlplab__docpipe", "qatools__browsersuite"}


def test_build_graph_trio(trio_staging, trio_scan):
    graph = build_graph(
        trio_staging, trio_scan,
        taxonomy=[trio_fixture.SEARCH_TERM],
        build_timestamp=trio_fixture.BUILD_TIMESTAMP,
    )
    assert graph.sealed
    assert set(graph.package_names()) == {"django", "selenium", "spacy", "shoplib"}

    # usage flows from the scan, including the unresolved package
    assert graph.usage_of("django").script_count == 4
    assert graph.usage_of("shoplib").script_count == 1
    assert graph.package("shoplib").registry_available is False
    assert graph.package("django").registry_available is True

    # registry keywords -> developer topics; repo tags -> user topics;
    # search terms -> taxonomy topics on the packages the repo uses
    django_topics = {(t.kind, t.term) for t in graph.topics_of("django")}
    assert (TopicKind.DEVELOPER_DEFINED, "web framework") in django_topics
    assert (TopicKind.TAXONOMY, "web framework") in django_topics
    assert (TopicKind.USER_DEFINED, "ecommerce") in django_topics
    selenium_topics = {(t.kind, t.term) for t in graph.topics_of("selenium")}
    assert (TopicKind.USER_DEFINED, "web framework") in selenium_topics
    spacy_topics = {(t.kind, t.term) for t in graph.topics_of("spacy")}
    assert (TopicKind.TAXONOMY, "web framework") in spacy_topics
    assert (TopicKind.USER_DEFINED, "web framework") not in spacy_topics

    # seeded advisory lands on django only
    assert graph.unfixed_vulnerability_count("django") == 1
    assert graph.unfixed_vulnerability_count("selenium") == 0

    # reviews -> polarity -> attributes -> fuzzy quality scores
    django_quality = graph.quality_of("django")
    assert django_quality[QualityAttribute.RELIABILITY].score == 1.0
    assert django_quality[QualityAttribute.PERFORMANCE_EFFICIENCY].score == 0.0
    assert django_quality[QualityAttribute.USABILITY].score == 1.0
    assert QualityAttribute.SECURITY not in django_quality
    assert graph.quality_of("selenium")[QualityAttribute.PERFORMANCE_EFFICIENCY].score == 1.0
    assert graph.quality_of("spacy")[QualityAttribute.RELIABILITY].score == 0.0


def test_build_graph_matches_direct_construction(trio_staging, trio_scan, rich_graph):
    """The pipeline-built graph scores identically to the hand-built one."""
    from pkgraph.annotate import WeightedTerm
    from pkgraph.infer import build_query, recommend

    graph = build_graph(
        trio_staging, trio_scan,
        taxonomy=[trio_fixture.SEARCH_TERM],
        build_timestamp=trio_fixture.BUILD_TIMESTAMP,
    )
    query = build_query([WeightedTerm(trio_fixture.SEARCH_TERM)], k=3)
    pipeline_result = recommend(query, graph)
    direct_result = recommend(query, rich_graph)
    assert [r.package for r in pipeline_result.recommendations] == [
        r.package for r in direct_result.recommendations]
    for a, b in zip(pipeline_result.recommendations, direct_result.recommendations):
        assert a.total == pytest.approx(b.total, abs=1e-12)
        assert a.components == b.components


def test_build_graph_first_last_seen(trio_staging, trio_scan):
    graph = build_graph(
        trio_staging, trio_scan,
        taxonomy=[trio_fixture.SEARCH_TERM],
        build_timestamp=trio_fixture.BUILD_TIMESTAMP,
    )
    node = graph.package("django")
    # evidence spans registry release (2023-12-04) .. aggregator review (1714300000)
    assert node.first_seen == 1701691200
    assert node.last_seen == 1714300000


def test_build_graph_staging_only(trio_staging):
    graph = build_graph(
        trio_staging, None,
        taxonomy=[trio_fixture.SEARCH_TERM],
        build_timestamp=1,
    )
    assert set(graph.package_names()) == {"django", "selenium", "spacy"}
    assert graph.usage_of("django") is None
    # without a scan there is no repo->package mapping, so no repo topics
    assert all(t.kind is not TopicKind.TAXONOMY for t in graph.topics_of("django"))


def test_ingest_warnings_survive_staging(tmp_path, trio_scan):
    bundle = tmp_path / "bundle"
    trio_fixture.build_replay_bundle(bundle)
    staging = run_ingest(
        trio_fixture.PACKAGES,
        [trio_fixture.SEARCH_TERM],
        [Platform.QA_FORUM, Platform.BLOG],  # blog not recorded -> warning
        ReplayTransport(bundle),
    )
    assert any("blog" in warning for warning in staging.warnings)
    directory = tmp_path / "staging"
    write_staging(staging, directory)
    assert load_staging(directory).warnings == staging.warnings
