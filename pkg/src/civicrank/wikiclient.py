"""Wikipedia search + pageview client with on-disk cache, rate limiting,
and an offline fixture mode.

Fixture layout (one directory):
    search/<slug>.json       -- MediaWiki search API response body
    pageviews/<slug>.json    -- {"YYYY-MM-DD": views, ...}; missing days read as 0

Cache files use the same layout under the cache directory and are written
atomically (temp file + rename), so concurrent enrichment is safe.
"""

import json
import os
import re
import tempfile
import threading
import time
from dataclasses import dataclass
from datetime import date, timedelta

from .errors import FixtureMissingError, RetriableError

SEARCH_URL = "https://en.wikipedia.org/w/api.php"
PAGEVIEWS_URL = (
    "https://wikimedia.org/api/rest_v1/metrics/pageviews/per-article/"
    "en.wikipedia/all-access/user/{title}/daily/{start}/{end}"
)

OFFLINE_ENV = "CIVICRANK_OFFLINE"


@dataclass
class WikiEntity:
    surface: str
    title: str = ""
    resolved: bool = False


@dataclass
class PageviewSeries:
    title: str
    start_date: date
    end_date: date
    daily_views: list

    def total(self):
        return sum(self.daily_views)

    def daily_mean(self):
        return self.total() / len(self.daily_views)


def slugify(text):
    slug = re.sub(r"[^a-z0-9]+", "_", text.lower()).strip("_")
    return slug or "_"


class RateLimiter:
    """Serializes request admission to at most `per_second` requests/s."""

    def __init__(self, per_second=10.0):
        self.min_interval = 1.0 / per_second
        self._lock = threading.Lock()
        self._last = 0.0

    def wait(self):
        with self._lock:
            now = time.monotonic()
            delay = self._last + self.min_interval - now
            if delay > 0:
                time.sleep(delay)
                now = time.monotonic()
            self._last = now


class WikiClient:
    """Resolves entity surfaces to page titles and fetches daily pageviews."""

    def __init__(self, cache_dir=None, fixtures_dir=None, offline=None,
                 requests_per_second=10.0, max_retries=3, session=None):
        if offline is None:
            offline = os.environ.get(OFFLINE_ENV) == "1"
        self.offline = offline
        self.cache_dir = cache_dir
        self.fixtures_dir = fixtures_dir
        self.limiter = RateLimiter(requests_per_second)
        self.max_retries = max_retries
        self._session = session

    # -- storage helpers -------------------------------------------------

    def _read_json(self, base, kind, name):
        if base is None:
            return None
        path = os.path.join(base, kind, name + ".json")
        if not os.path.exists(path):
            return None
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)

    def _write_cache(self, kind, name, payload):
        if self.cache_dir is None:
            return
        dir_path = os.path.join(self.cache_dir, kind)
        os.makedirs(dir_path, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=dir_path, suffix=".tmp")
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)
        os.replace(tmp, os.path.join(dir_path, name + ".json"))

    def _lookup(self, kind, name):
        hit = self._read_json(self.cache_dir, kind, name)
        if hit is not None:
            return hit
        hit = self._read_json(self.fixtures_dir, kind, name)
        if hit is not None:
            return hit
        if self.offline:
            raise FixtureMissingError(f"{kind}/{name}")
        return None

    def _http_get(self, url, params=None):
        import requests

        if self._session is None:
            self._session = requests.Session()
            self._session.headers["User-Agent"] = "civicrank/0.1"
        last_err = None
        for attempt in range(self.max_retries):
            self.limiter.wait()
            try:
                resp = self._session.get(url, params=params, timeout=20)
                if resp.status_code == 404:
                    return None  # pageview API: no data for title/range
                resp.raise_for_status()
                return resp.json()
            except Exception as exc:  # noqa: BLE001 - retried, then surfaced
                last_err = exc
                time.sleep(0.5 * (attempt + 1))
        raise RetriableError(str(last_err))

    # -- public API ------------------------------------------------------

    def resolve_entity(self, surface):
        """Resolve a headline surface string to a Wikipedia page title."""
        if not surface or not surface.strip():
            raise ValueError("surface must be nonempty")
        name = slugify(surface)
        payload = self._lookup("search", name)
        if payload is None:
            payload = self._http_get(SEARCH_URL, params={
                "action": "query", "list": "search",
                "srsearch": surface, "format": "json",
            }) or {}
            self._write_cache("search", name, payload)
        hits = (payload.get("query") or {}).get("search") or []
        if not hits:
            return WikiEntity(surface=surface)
        lowered = surface.lower()
        for hit in hits:
            title = hit.get("title", "")
            if lowered == title.lower() or lowered in title.lower():
                return WikiEntity(surface=surface, title=title, resolved=True)
        top = hits[0].get("title", "")
        if top:
            return WikiEntity(surface=surface, title=top, resolved=True)
        return WikiEntity(surface=surface)

    def fetch_daily_pageviews(self, title, start, end):
        """One count per day over [start, end]; absent days are filled with 0."""
        if start > end:
            raise ValueError("start must be <= end")
        name = slugify(title)
        days = (end - start).days + 1
        stored = self._lookup("pageviews", name)
        if stored is not None and "_days" in stored:
            # live-cache format: only valid if this exact range was fetched
            key = f"{start.isoformat()}_{end.isoformat()}"
            if key in stored.get("_ranges", []):
                by_day = stored["_days"]
            else:
                by_day = self._fetch_live_range(title, start, end, cached=stored)
        elif stored is not None:
            by_day = stored  # fixture format: plain {date: views}
        else:
            by_day = self._fetch_live_range(title, start, end)
        views = []
        for i in range(days):
            d = (start + timedelta(days=i)).isoformat()
            views.append(int(by_day.get(d, 0)))
        return PageviewSeries(title=title, start_date=start, end_date=end,
                              daily_views=views)

    def _fetch_live_range(self, title, start, end, cached=None):
        if self.offline:
            raise FixtureMissingError(f"pageviews/{slugify(title)}")
        # Cache stores one {date: views} map per title, extended as ranges grow.
        by_day = dict(cached.get("_days", {})) if isinstance(cached, dict) else {}
        key = f"{start.isoformat()}_{end.isoformat()}"
        covered = set(cached.get("_ranges", [])) if isinstance(cached, dict) else set()
        if key not in covered:
            url = PAGEVIEWS_URL.format(
                title=title.replace(" ", "_"),
                start=start.strftime("%Y%m%d"),
                end=end.strftime("%Y%m%d"),
            )
            payload = self._http_get(url)
            for item in (payload or {}).get("items", []):
                ts = item.get("timestamp", "")
                if len(ts) >= 8:
                    d = f"{ts[0:4]}-{ts[4:6]}-{ts[6:8]}"
                    by_day[d] = int(item.get("views", 0))
            covered.add(key)
            self._write_cache("pageviews", slugify(title),
                             {"_days": by_day, "_ranges": sorted(covered)})
        return by_day


def write_search_fixture(fixtures_dir, surface, titles):
    """Record a search fixture; `titles` ordered as the API would rank them."""
    path = os.path.join(fixtures_dir, "search")
    os.makedirs(path, exist_ok=True)
    payload = {"query": {"search": [{"title": t} for t in titles]}}
    with open(os.path.join(path, slugify(surface) + ".json"), "w") as fh:
        json.dump(payload, fh)


def write_pageview_fixture(fixtures_dir, title, views_by_day):
    """Record a pageview fixture; keys are ISO dates, absent days read as 0."""
    path = os.path.join(fixtures_dir, "pageviews")
    os.makedirs(path, exist_ok=True)
    payload = {d.isoformat() if isinstance(d, date) else d: int(v)
               for d, v in views_by_day.items()}
    with open(os.path.join(path, slugify(title) + ".json"), "w") as fh:
        json.dump(payload, fh)
