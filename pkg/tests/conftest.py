import json

import pytest

from freysieve import config
from freysieve.cases import load_case
from freysieve.config import DATA_DIR
from freysieve.formats import load_newforms

D7_NEWFORMS = DATA_DIR / "newforms" / "d7_synthetic.jsonl"
D19_NEWFORMS = DATA_DIR / "newforms" / "d19_synthetic.jsonl"
D2_TABLE = DATA_DIR / "curves" / "d2_fixture.csv"
D13_TABLE = DATA_DIR / "curves" / "d13_fixture.csv"


@pytest.fixture(autouse=True)
def quiet_settings(tmp_path, monkeypatch):
    """Quiet logs and a throwaway cache for every test; the CLI re-reads the env"""
    monkeypatch.setenv("FREYSIEVE_QUIET", "1")
    monkeypatch.setenv("FREYSIEVE_CACHE_DIR", str(tmp_path / "cache"))
    monkeypatch.delenv("FREYSIEVE_OFFLINE", raising=False)
    monkeypatch.delenv("FREYSIEVE_ELLENBERG_TERMS", raising=False)
    previous = config.settings
    config.set_settings(config.load_settings())
    yield config.settings
    config.set_settings(previous)


@pytest.fixture
def d7_case():
    return load_case("d7")


@pytest.fixture
def d7_forms():
    return load_newforms(str(D7_NEWFORMS))


class FakeResponse:
    def __init__(self, payload, status_code=200):
        self.status_code = status_code
        self.text = payload if isinstance(payload, str) else json.dumps(payload)


class FakeSession:
    """Serves canned pages per conductor and records every call"""

    def __init__(self, pages=None, error=None):
        self.pages = pages or {}
        self.error = error
        self.calls = []

    def get(self, url, params=None, headers=None, timeout=None):
        self.calls.append((url, params))
        if self.error is not None:
            raise self.error
        key = params["conductor"] if params else url
        queue = self.pages[key]
        return queue.pop(0) if isinstance(queue, list) else queue
