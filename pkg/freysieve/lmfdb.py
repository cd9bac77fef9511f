"""
Curve-database client with a local SQLite cache

    cache = CurveCache()                       # under FREYSIEVE_CACHE_DIR
    table = fetch_curves([1152, 3456], cache=cache)

Payloads are stored verbatim, keyed by (conductor, page), with a SHA-256
digest and the fetch time. The cache is consulted first; offline mode never
builds an HTTP session.
"""
import hashlib
import json
import sqlite3
import threading
import time
from pathlib import Path
from typing import Iterable, List, Optional
from urllib.parse import urljoin

import requests

from freysieve import config
from freysieve.errors import NetworkUnavailable, SchemaMismatch
from freysieve.formats import CurveRow, CurveTable, rows_from_records
from freysieve.logs import log_debug, log_stage

CACHE_FILE = "curves.sqlite"
FIELDS = "lmfdb_label,conductor,ainvs"
MAX_PAGES = 50

_DDL = """
CREATE TABLE IF NOT EXISTS curve_pages (
    conductor   INTEGER NOT NULL,
    page        INTEGER NOT NULL,
    endpoint    TEXT NOT NULL,
    payload     TEXT NOT NULL,
    sha256      TEXT NOT NULL,
    fetched_at  REAL NOT NULL,
    PRIMARY KEY (conductor, page)
);
"""


def _sha256(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


class CurveCache:
    def __init__(self, cache_dir: Optional[str] = None) -> None:
        directory = Path(cache_dir or config.settings.cache_dir)
        directory.mkdir(parents=True, exist_ok=True)
        self.path = directory / CACHE_FILE
        self._lock = threading.Lock()
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._conn.execute("PRAGMA journal_mode=WAL")
        self._conn.execute(_DDL)
        self._conn.commit()

    def get(self, conductor: int) -> Optional[List[str]]:
        """Verbatim pages for a conductor, or None when never fetched"""
        with self._lock:
            rows = self._conn.execute(
                "SELECT payload, sha256 FROM curve_pages WHERE conductor = ? ORDER BY page",
                (conductor,),
            ).fetchall()
        if not rows:
            return None
        for payload, stored in rows:
            if _sha256(payload) != stored:
                raise SchemaMismatch(
                    f"cached payload for conductor {conductor} fails its digest",
                    hint=f"delete {self.path} and fetch again",
                )
        return [payload for payload, _ in rows]

    def set(self, conductor: int, pages: List[str], endpoint: str) -> None:
        """Replace every page of a conductor in one transaction"""
        now = time.time()
        with self._lock, self._conn:
            self._conn.execute("DELETE FROM curve_pages WHERE conductor = ?", (conductor,))
            self._conn.executemany(
                "INSERT INTO curve_pages (conductor, page, endpoint, payload, sha256, fetched_at) "
                "VALUES (?, ?, ?, ?, ?, ?)",
                [(conductor, i, endpoint, text, _sha256(text), now) for i, text in enumerate(pages)],
            )

    def conductors(self) -> List[int]:
        with self._lock:
            rows = self._conn.execute("SELECT DISTINCT conductor FROM curve_pages ORDER BY conductor").fetchall()
        return [r[0] for r in rows]

    def close(self) -> None:
        self._conn.close()


class CurveClient:
    """
    Plain JSON GET against the curve endpoint; `session` is anything with a
    requests-compatible get().
    """

    def __init__(self, endpoint: Optional[str] = None, session=None, timeout: Optional[float] = None):
        self.endpoint = endpoint or config.settings.curve_endpoint
        self.session = session or requests.Session()
        self.timeout = timeout or config.settings.http_timeout

    def fetch_pages(self, conductor: int) -> List[str]:
        """
        Raises:
            NetworkUnavailable: connection failure, a non-200 answer, or a
                listing longer than MAX_PAGES
        """
        pages: List[str] = []
        url = self.endpoint
        params = {"conductor": conductor, "_format": "json", "_fields": FIELDS}
        while url and len(pages) < MAX_PAGES:
            try:
                response = self.session.get(url, params=params, headers={"Accept": "application/json"},
                                            timeout=self.timeout)
            except requests.RequestException as e:
                raise NetworkUnavailable(
                    f"curve endpoint unreachable: {e}",
                    hint="check FREYSIEVE_CURVE_ENDPOINT or run with --offline and a local --table",
                )
            if response.status_code != 200:
                raise NetworkUnavailable(
                    f"curve endpoint returned status {response.status_code} for conductor {conductor}")
            pages.append(response.text)
            nxt = _payload(response.text, conductor).get("next")
            url = urljoin(self.endpoint, nxt) if nxt else None
            params = None
        if url:
            raise NetworkUnavailable(
                f"curve listing for conductor {conductor} still continues after {MAX_PAGES} pages",
                hint="a truncated listing is never cached or counted as covered",
            )
        log_debug("Fetch", f"conductor {conductor}: {len(pages)} page(s)")
        return pages


def _payload(text: str, conductor: int) -> dict:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaMismatch(f"curve payload for conductor {conductor} is not JSON: {e.msg}")
    if not isinstance(data, dict) or not isinstance(data.get("data"), list):
        raise SchemaMismatch(f"curve payload for conductor {conductor} has no 'data' list")
    return data


def rows_from_pages(pages: List[str], conductor: int) -> List[CurveRow]:
    records = []
    for text in pages:
        records.extend(_payload(text, conductor)["data"])
    rows = rows_from_records(records)
    for r in rows:
        if r.conductor != conductor:
            raise SchemaMismatch(f"{r.label}: conductor {r.conductor} returned for a query on {conductor}")
    return rows


def fetch_curves(conductors: Iterable[int], endpoint: Optional[str] = None,
                 cache: Optional[CurveCache] = None, client: Optional[CurveClient] = None,
                 offline: Optional[bool] = None, refresh: bool = False) -> CurveTable:
    """
    Curve table for the given conductors.

    A conductor is covered when its pages come from the cache or the
    endpoint. Offline, uncached conductors stay uncovered. With refresh, the
    endpoint is tried first and the cache is the fallback.

    Raises:
        NetworkUnavailable: an uncached conductor could not be fetched
    """
    offline = config.settings.offline if offline is None else offline
    owned = cache is None
    cache = cache or CurveCache()
    try:
        return _fetch_into_table(sorted(set(conductors)), cache, client, endpoint, offline, refresh)
    finally:
        if owned:
            cache.close()


def _fetch_into_table(wanted: List[int], cache: CurveCache, client: Optional[CurveClient],
                      endpoint: Optional[str], offline: bool, refresh: bool) -> CurveTable:
    rows: List[CurveRow] = []
    covered = set()
    source = "cache"

    for N in wanted:
        pages = None if refresh else cache.get(N)
        if pages is not None:
            log_debug("Cache", f"conductor {N}: hit")
        elif offline:
            pages = cache.get(N)
            if pages is None:
                log_stage("Fetch", f"conductor {N}: not cached and offline, left uncovered")
                continue
        else:
            if client is None:
                client = CurveClient(endpoint)
            try:
                pages = client.fetch_pages(N)
            except NetworkUnavailable:
                pages = cache.get(N)
                if pages is None:
                    raise
                log_stage("Fetch", f"conductor {N}: endpoint failed, using cached copy")
            else:
                cache.set(N, pages, client.endpoint)
                source = client.endpoint
        rows.extend(rows_from_pages(pages, N))
        covered.add(N)

    log_stage("Fetch", f"{len(rows)} curves over {len(covered)}/{len(wanted)} conductors")
    return CurveTable(tuple(sorted(rows, key=lambda r: (r.conductor, r.label))), source, frozenset(covered))

