"""Corpus ingestion: normalize raw article records, deduplicate, persist JSONL.

Identity is the canonical URL (lowercased scheme/host, query string and
trailing slash stripped); article ids are a stable 64-bit hash of it.
"""

import hashlib
import json
import re
from dataclasses import dataclass, field
from datetime import date, datetime, timezone
from urllib.parse import urlsplit, urlunsplit

_WS_RUN = re.compile(r"\s+")
_BYLINE_SPLIT = re.compile(r",|\band\b", re.IGNORECASE)
_TEXT_DATE = re.compile(r"^(\d{1,2})\s+([A-Za-z]+)\s+(\d{4})$")

_MONTHS = {
    m.lower(): i + 1
    for i, m in enumerate(
        ["January", "February", "March", "April", "May", "June",
         "July", "August", "September", "October", "November", "December"]
    )
}


@dataclass
class Article:
    id: str
    headline: str
    byline: list
    published_date: date
    url: str
    image_url: str | None = None
    section: str | None = None

    def to_record(self):
        return {
            "id": self.id,
            "headline": self.headline,
            "byline": list(self.byline),
            "published_date": self.published_date.isoformat(),
            "url": self.url,
            "image_url": self.image_url,
            "section": self.section,
        }

    @classmethod
    def from_record(cls, rec):
        return cls(
            id=rec["id"],
            headline=rec["headline"],
            byline=list(rec["byline"]),
            published_date=date.fromisoformat(rec["published_date"]),
            url=rec["url"],
            image_url=rec.get("image_url"),
            section=rec.get("section"),
        )


@dataclass
class Corpus:
    articles: list
    source_label: str = ""
    ingested_at: datetime | None = None

    def by_id(self, article_id):
        for a in self.articles:
            if a.id == article_id:
                return a
        raise KeyError(article_id)


@dataclass
class ValidationReport:
    n_input: int = 0
    n_kept: int = 0
    n_duplicates: int = 0
    n_rejected: int = 0
    rejection_reasons: list = field(default_factory=list)

    def to_dict(self):
        return {
            "n_input": self.n_input,
            "n_kept": self.n_kept,
            "n_duplicates": self.n_duplicates,
            "n_rejected": self.n_rejected,
            "rejection_reasons": [list(r) for r in self.rejection_reasons],
        }


def canonicalize_url(url):
    """Lowercase scheme and host, drop query/fragment, strip one trailing slash."""
    parts = urlsplit(url.strip())
    path = parts.path
    if path.endswith("/"):
        path = path[:-1]
    return urlunsplit((parts.scheme.lower(), parts.netloc.lower(), path, "", ""))


def article_id_for_url(url):
    """Lowercase hex of a stable 64-bit hash of the canonical URL."""
    canon = canonicalize_url(url)
    digest = hashlib.sha256(canon.encode("utf-8")).digest()
    return digest[:8].hex()


def _parse_date(raw):
    raw = raw.strip()
    m = _TEXT_DATE.match(raw)
    if m:
        day, month_name, year = m.groups()
        month = _MONTHS.get(month_name.lower())
        if month is None:
            return None
        try:
            return date(int(year), month, int(day))
        except ValueError:
            return None
    # ISO 8601, with or without a time component
    try:
        return datetime.fromisoformat(raw.replace("Z", "+00:00")).date()
    except ValueError:
        return None


def _split_byline(raw):
    if not raw:
        return []
    names = [_WS_RUN.sub(" ", n).strip() for n in _BYLINE_SPLIT.split(raw)]
    return [n for n in names if n]


def normalize_article(raw):
    """Normalize one raw record into an Article.

    Returns (Article, None) on success or (None, reason) on rejection.
    """
    url = (raw.get("url") or "").strip()
    headline = _WS_RUN.sub(" ", (raw.get("headline") or "")).strip()
    if not url or not headline:
        return None, "missing_field"
    parsed = _parse_date(str(raw.get("date") or raw.get("published_date") or ""))
    if parsed is None:
        return None, "bad_date"
    byline_raw = raw.get("byline")
    if isinstance(byline_raw, list):
        byline = [n for n in (_WS_RUN.sub(" ", str(b)).strip() for b in byline_raw) if n]
    else:
        byline = _split_byline(str(byline_raw or ""))
    image_url = (raw.get("image_url") or "").strip() or None
    section = (raw.get("section") or "").strip() or None
    return (
        Article(
            id=article_id_for_url(url),
            headline=headline,
            byline=byline,
            published_date=parsed,
            url=url,
            image_url=image_url,
            section=section,
        ),
        None,
    )


def ingest_articles(raws, source_label=""):
    """Normalize, dedup by canonical URL (first occurrence wins), sort stably.

    Returns (Corpus, ValidationReport); the report counts always balance.
    """
    report = ValidationReport()
    seen = {}
    for idx, raw in enumerate(raws):
        report.n_input += 1
        article, reason = normalize_article(raw)
        if article is None:
            report.n_rejected += 1
            report.rejection_reasons.append((idx, reason))
            continue
        key = canonicalize_url(article.url)
        if key in seen:
            report.n_duplicates += 1
            continue
        seen[key] = article
        report.n_kept += 1
    articles = sorted(seen.values(), key=lambda a: (a.published_date, a.id))
    corpus = Corpus(
        articles=articles,
        source_label=source_label,
        ingested_at=datetime.now(timezone.utc),
    )
    return corpus, report


def read_jsonl(path):
    """Yield raw records from a JSON Lines file, skipping blank lines."""
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                yield json.loads(line)


def write_corpus(corpus, path):
    with open(path, "w", encoding="utf-8") as fh:
        for article in corpus.articles:
            fh.write(json.dumps(article.to_record(), ensure_ascii=False) + "\n")


def read_corpus(path):
    articles = [Article.from_record(rec) for rec in read_jsonl(path)]
    return Corpus(articles=articles)
