from __future__ import annotations

import pytest

import trio_fixture


@pytest.fixture()
def rich_graph():
    return trio_fixture.rich_trio_graph()


@pytest.fixture()
def simple_graph():
    return trio_fixture.simple_trio_graph()


@pytest.fixture()
def trio_corpus(tmp_path):
    root = tmp_path / "corpus"
    trio_fixture.write_corpus(root)
    return root


@pytest.fixture()
def trio_bundle(tmp_path):
    bundle = tmp_path / "bundle"
    trio_fixture.build_replay_bundle(bundle)
    return bundle


@pytest.fixture()
def registry_index_file(tmp_path):
    path = tmp_path / "registry_index.txt"
    trio_fixture.write_registry_index(path)
    return path
