from __future__ import annotations

import json
from importlib import resources

import pytest
from fastapi.testclient import TestClient

import trio_fixture
from pkgraph.graph import save_snapshot
from pkgraph.service import create_app

jsonschema = pytest.importorskip("jsonschema")


def load_schema(name: str) -> dict:
    text = resources.files("pkgraph").joinpath("schemas", name).read_text(encoding="utf-8")
    return json.loads(text)


@pytest.fixture(scope="module")
def client():
    app = create_app(graph=trio_fixture.rich_trio_graph())
    with TestClient(app) as test_client:
        yield test_client


@pytest.fixture(scope="module")
def empty_client():
    app = create_app()
    with TestClient(app) as test_client:
        yield test_client


# ---------------------------------------------------------------------------
# /recommend
# ---------------------------------------------------------------------------

def test_recommend_trio(client):
    response = client.post("/api/v1/recommend", json={"story": "web framework", "k": 3})
    assert response.status_code == 200
    body = response.json()
    assert [r["package"] for r in body["recommendations"]] == ["django", "selenium", "spacy"]
    expected = trio_fixture.expected_totals()
    assert body["recommendations"][0]["total"] == pytest.approx(expected["django"], abs=1e-9)
    assert body["query_echo"]["terms"] == [{"term": "web framework", "weight": 1.0}]
    assert body["graph_build_timestamp"] == trio_fixture.BUILD_TIMESTAMP
    jsonschema.validate(body, load_schema("recommend_response.json"))


def test_recommend_exclude_vulnerable(client):
    response = client.post("/api/v1/recommend", json={
        "story": "web framework", "k": 3, "filters": {"exclude_vulnerable": True}})
    assert response.status_code == 200
    packages = [r["package"] for r in response.json()["recommendations"]]
    assert packages == ["selenium", "spacy"]


def test_recommend_unknown_field_rejected(client):
    response = client.post("/api/v1/recommend", json={"story": "x", "bogus": 1})
    assert response.status_code == 400
    assert response.json()["error"] == "invalid_request"


def test_recommend_k_out_of_range(client):
    assert client.post("/api/v1/recommend", json={"story": "x", "k": 0}).status_code == 400
    assert client.post("/api/v1/recommend", json={"story": "x", "k": 101}).status_code == 400


def test_recommend_story_too_long(client):
    response = client.post("/api/v1/recommend", json={"story": "x" * 10_001})
    assert response.status_code == 400


def test_recommend_empty_intent(client):
    response = client.post("/api/v1/recommend", json={"story": "I need it for the"})
    assert response.status_code == 422
    assert response.json()["error"] == "empty_intent"


def test_recommend_empty_result_with_diagnostics(client):
    response = client.post("/api/v1/recommend", json={"story": "quantum gravity toolkit"})
    assert response.status_code == 422
    body = response.json()
    assert body["error"] == "empty_result"
    assert body["diagnostics"]


def test_recommend_bad_attribute_filter(client):
    response = client.post("/api/v1/recommend", json={
        "story": "web framework", "filters": {"required_attributes": ["speediness"]}})
    assert response.status_code == 400


def test_recommend_coefficient_overrides(client):
    response = client.post("/api/v1/recommend", json={
        "story": "web framework", "k": 3,
        "coefficients": {"vulnerability": 0.0}})
    assert response.status_code == 200
    top = response.json()["recommendations"][0]
    assert top["package"] == "django"
    expected = trio_fixture.expected_totals()["django"] + 0.3 * 0.25
    assert top["total"] == pytest.approx(expected, abs=1e-9)


def test_recommend_deterministic_bytes(client):
    payload = {"story": "web framework", "k": 3}
    first = client.post("/api/v1/recommend", json=payload)
    second = client.post("/api/v1/recommend", json=payload)
    assert first.content == second.content


# ---------------------------------------------------------------------------
# /packages/{name}
# ---------------------------------------------------------------------------

def test_package_detail(client):
    response = client.get("/api/v1/packages/django")
    assert response.status_code == 200
    body = response.json()
    assert body["package"]["name"] == "django"
    assert body["package"]["registry_available"] is True
    assert any(t["term"] == "web framework" for t in body["topics"])
    assert body["vulnerabilities"][0]["id"] == trio_fixture.ADVISORY_ID
    assert body["quality"]["reliability"]["score"] == 1.0
    assert body["usage"]["script_count"] == 4
    jsonschema.validate(body, load_schema("package_detail.json"))


def test_package_detail_normalizes_name(client):
    response = client.get("/api/v1/packages/Django")
    assert response.status_code == 200


def test_package_detail_unknown(client):
    response = client.get("/api/v1/packages/nope")
    assert response.status_code == 404
    assert response.json()["error"] == "unknown_package"


# ---------------------------------------------------------------------------
# /compare
# ---------------------------------------------------------------------------

def test_compare_matrix_shape(client):
    response = client.post("/api/v1/compare", json={"names": ["spacy", "django"]})
    assert response.status_code == 200
    body = response.json()
    assert body["packages"] == ["spacy", "django"]
    assert len(body["attributes"]) == 8
    by_attr = {row["attribute"]: row["scores"] for row in body["attributes"]}
    # no-evidence cells are null, distinct from a genuine 0.0
    assert by_attr["security"]["django"] is None
    assert by_attr["performance_efficiency"]["django"] == 0.0
    assert by_attr["reliability"]["spacy"] == 0.0
    jsonschema.validate(body, load_schema("compare_response.json"))


def test_compare_unknown_package(client):
    response = client.post("/api/v1/compare", json={"names": ["django", "nope"]})
    assert response.status_code == 404


def test_compare_requires_two(client):
    response = client.post("/api/v1/compare", json={"names": ["django"]})
    assert response.status_code == 400


def test_compare_basket_limit(client):
    response = client.post("/api/v1/compare", json={
        "names": ["django", "spacy", "selenium", "shoplib", "django", "spacy"]})
    assert response.status_code == 400


# ---------------------------------------------------------------------------
# /analytics/usage and /health
# ---------------------------------------------------------------------------

def test_analytics_usage(client):
    response = client.get("/api/v1/analytics/usage")
    assert response.status_code == 200
    body = response.json()
    assert body["scope"] == "all"
    assert body["total_items"] == 4
    by_interval = {row["interval"]: row["count"] for row in body["rows"]}
    assert by_interval["x = 1"] == 1          # shoplib
    assert by_interval["1 < x <= 10"] == 3    # the trio
    jsonschema.validate(body, load_schema("usage_report.json"))


def test_analytics_usage_registry_scope(client):
    body = client.get("/api/v1/analytics/usage", params={"scope": "registry"}).json()
    assert body["total_items"] == 3


def test_analytics_usage_bad_scope(client):
    assert client.get("/api/v1/analytics/usage", params={"scope": "wat"}).status_code == 400


def test_health(client):
    response = client.get("/api/v1/health")
    assert response.status_code == 200
    body = response.json()
    assert body["status"] == "ok"
    assert body["snapshot_format"] == "pkgraph-snapshot/1"
    assert body["graph_build_timestamp"] == trio_fixture.BUILD_TIMESTAMP
    jsonschema.validate(body, load_schema("health.json"))


def test_endpoints_503_before_snapshot(empty_client):
    assert empty_client.get("/api/v1/health").status_code == 503
    assert empty_client.post(
        "/api/v1/recommend", json={"story": "web framework"}).status_code == 503
    assert empty_client.get("/api/v1/packages/django").status_code == 503


def test_snapshot_swap_is_atomic_reference(empty_client):
    holder = empty_client.app.state.holder
    assert holder.graph is None
    holder.swap(trio_fixture.rich_trio_graph())
    assert empty_client.get("/api/v1/health").status_code == 200
    holder.graph = None
    assert empty_client.get("/api/v1/health").status_code == 503


# ---------------------------------------------------------------------------
# snapshot loading path and CLI/HTTP parity
# ---------------------------------------------------------------------------

def test_app_loads_snapshot_from_path(tmp_path):
    snap = tmp_path / "trio.snap"
    save_snapshot(trio_fixture.rich_trio_graph(), snap)
    app = create_app(snapshot_path=snap)
    with TestClient(app) as test_client:
        response = test_client.post("/api/v1/recommend", json={"story": "web framework", "k": 1})
        assert response.status_code == 200
        assert response.json()["recommendations"][0]["package"] == "django"


def test_cli_and_http_rankings_match(tmp_path, capsys):
    from pkgraph.cli import main

    snap = tmp_path / "trio.snap"
    save_snapshot(trio_fixture.rich_trio_graph(), snap)
    assert main(["recommend", "--graph", str(snap), "--story", "web framework",
                 "--k", "3", "--format", "json"]) == 0
    cli_body = json.loads(capsys.readouterr().out)

    app = create_app(snapshot_path=snap)
    with TestClient(app) as test_client:
        http_body = test_client.post(
            "/api/v1/recommend", json={"story": "web framework", "k": 3}).json()

    assert cli_body["recommendations"] == http_body["recommendations"]
    assert cli_body["query_echo"] == http_body["query_echo"]
