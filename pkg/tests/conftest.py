from __future__ import annotations

import json
from functools import lru_cache
from pathlib import Path

import pytest

from bibrecon.config import ServiceConfig, SourceSettings, bundled_corpus_path
from bibrecon.matching import MatchConfig
from bibrecon.sources.fixture import FixtureAdapter, load_corpus

DATA_DIR = Path(__file__).parent / "data"
RECORDED_DIR = DATA_DIR / "recorded"
GOLD_PATH = DATA_DIR / "gold_20.csv"


def recorded(name: str) -> dict:
    return json.loads((RECORDED_DIR / name).read_text(encoding="utf-8"))


def oracle_levenshtein(a: str, b: str) -> int:
    """Exhaustive recursive edit distance; the independent check for the DP."""

    @lru_cache(maxsize=None)
    def go(i: int, j: int) -> int:
        if i == 0:
            return j
        if j == 0:
            return i
        cost = 0 if a[i - 1] == b[j - 1] else 1
        return min(go(i - 1, j) + 1, go(i, j - 1) + 1, go(i - 1, j - 1) + cost)

    return go(len(a), len(b))


class FakeTransport:
    """Replays recorded payloads; records every request it served."""

    def __init__(self, router):
        self.router = router
        self.calls: list[tuple[str, dict, dict]] = []

    def get_json(self, url, params=None, headers=None):
        params = dict(params or {})
        headers = dict(headers or {})
        self.calls.append((url, params, headers))
        return self.router(url, params, headers)


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(bundled_corpus_path())


@pytest.fixture
def fixture_adapter(corpus):
    return FixtureAdapter(corpus)


@pytest.fixture
def match_config():
    return MatchConfig()


@pytest.fixture
def service_config(tmp_path):
    return ServiceConfig(
        session_dir=str(tmp_path / "sessions"),
        sources=[
            SourceSettings(name="fixture", type="fixture", corpus=bundled_corpus_path())
        ],
    )
