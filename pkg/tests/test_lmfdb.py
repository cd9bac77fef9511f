import json
import sqlite3

import pytest
import requests

from freysieve.errors import NetworkUnavailable, SchemaMismatch
from freysieve import lmfdb
from freysieve.lmfdb import MAX_PAGES, CurveCache, CurveClient, fetch_curves
from conftest import FakeResponse, FakeSession

ENDPOINT = "https://curves.example/api/ec_curvedata/"
PAGE_1152 = {"data": [{"lmfdb_label": "1152.r2", "conductor": 1152, "ainvs": [0, 0, 0, 6, 20]}]}


@pytest.fixture
def cache(tmp_path):
    cache = CurveCache(str(tmp_path / "curves"))
    yield cache
    cache.close()


def client_for(session):
    return CurveClient(ENDPOINT, session=session, timeout=1)


def test_fetch_and_cache(cache):
    session = FakeSession({1152: FakeResponse(PAGE_1152)})
    table = fetch_curves([1152], cache=cache, client=client_for(session), offline=False)
    assert [r.label for r in table.rows] == ["1152.r2"]
    assert table.rows[0].c4 == -288
    assert table.covers(1152)
    assert cache.conductors() == [1152]

    offline = fetch_curves([1152], cache=cache, client=client_for(FakeSession(error=AssertionError())),
                           offline=True)
    assert offline.fingerprint()["rows"] == table.fingerprint()["rows"]
    assert len(session.calls) == 1


def test_offline_never_touches_the_network(cache, monkeypatch):
    def refuse(*args, **kwargs):
        raise AssertionError("network used while offline")

    monkeypatch.setattr(requests.Session, "get", refuse)
    table = fetch_curves([36, 72], cache=cache, offline=True)
    assert table.rows == () and not table.covers(36)


def test_pagination(cache):
    first = {"data": [], "next": "?conductor=1152&_offset=100"}
    session = FakeSession({
        1152: FakeResponse(first),
        ENDPOINT + "?conductor=1152&_offset=100": FakeResponse(PAGE_1152),
    })
    table = fetch_curves([1152], cache=cache, client=client_for(session), offline=False)
    assert len(session.calls) == 2
    assert session.calls[1][1] is None
    assert len(cache.get(1152)) == 2
    assert [r.label for r in table.rows] == ["1152.r2"]


def test_truncated_listing_is_not_covered(cache):
    endless = {"data": [], "next": "?conductor=1152&_offset=100"}
    session = FakeSession({
        1152: FakeResponse(endless),
        ENDPOINT + "?conductor=1152&_offset=100": FakeResponse(endless),
    })
    with pytest.raises(NetworkUnavailable):
        fetch_curves([1152], cache=cache, client=client_for(session), offline=False)
    assert len(session.calls) == MAX_PAGES
    assert cache.get(1152) is None

    cache.set(1152, [json.dumps(PAGE_1152)], ENDPOINT)
    table = fetch_curves([1152], cache=cache, client=client_for(session), offline=False, refresh=True)
    assert [r.label for r in table.rows] == ["1152.r2"]


def test_own_cache_is_closed(monkeypatch):
    closed = []
    original = lmfdb.CurveCache.close

    def tracking_close(self):
        closed.append(self.path)
        original(self)

    monkeypatch.setattr(lmfdb.CurveCache, "close", tracking_close)
    fetch_curves([36], offline=True)
    assert len(closed) == 1

    session = FakeSession({36: FakeResponse("oops", status_code=503)})
    with pytest.raises(NetworkUnavailable):
        fetch_curves([36], client=client_for(session), offline=False)
    assert len(closed) == 2


def test_network_failure_falls_back_to_cache(cache):
    cache.set(1152, [json.dumps(PAGE_1152)], ENDPOINT)
    broken = client_for(FakeSession(error=requests.ConnectionError("down")))
    table = fetch_curves([1152], cache=cache, client=broken, offline=False, refresh=True)
    assert table.covers(1152)

    with pytest.raises(NetworkUnavailable):
        fetch_curves([36], cache=cache, client=broken, offline=False)


def test_bad_status_and_payload(cache):
    session = FakeSession({36: FakeResponse("oops", status_code=503)})
    with pytest.raises(NetworkUnavailable):
        fetch_curves([36], cache=cache, client=client_for(session), offline=False)

    session = FakeSession({36: FakeResponse({"rows": []})})
    with pytest.raises(SchemaMismatch):
        fetch_curves([36], cache=cache, client=client_for(session), offline=False)

    wrong = {"data": [{"lmfdb_label": "1152.r2", "conductor": 1152, "ainvs": [0, 0, 0, 6, 20]}]}
    session = FakeSession({36: FakeResponse(wrong)})
    with pytest.raises(SchemaMismatch):
        fetch_curves([36], cache=cache, client=client_for(session), offline=False)


def test_tampered_cache_is_rejected(cache):
    cache.set(1152, [json.dumps(PAGE_1152)], ENDPOINT)
    conn = sqlite3.connect(cache.path)
    conn.execute("UPDATE curve_pages SET payload = ? WHERE conductor = 1152", (json.dumps({"data": []}),))
    conn.commit()
    conn.close()
    with pytest.raises(SchemaMismatch):
        cache.get(1152)
