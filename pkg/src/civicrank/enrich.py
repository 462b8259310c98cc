"""Headline news-value features: entity prominence via pageviews, lexicon
sentiment, bigram-PMI surprise, clickbait cues, and surface statistics.

The 12-dimension feature vector has a fixed field order (FEATURE_NAMES);
everything downstream (clustering, extrapolation) relies on it.
"""

import json
import math
import re
from dataclasses import dataclass, field, fields
from datetime import timedelta
from importlib import resources

FEATURE_NAMES = [
    "prom_short_log", "prom_long_log", "burst01", "n_entities",
    "sent_polarity", "sent_emotionality", "sent_coverage",
    "surprise", "clickbait",
    "word_count", "avg_word_length", "stopword_ratio",
]

_EDGE_PUNCT = re.compile(r"^\W+|\W+$", re.UNICODE)


def tokenize(text):
    """Whitespace split with punctuation stripped from token edges."""
    out = []
    for raw in text.split():
        tok = _EDGE_PUNCT.sub("", raw)
        if tok:
            out.append(tok)
    return out


def _default_path(name):
    return resources.files("civicrank.data").joinpath(name)


def load_stopwords(path=None):
    source = open(path, encoding="utf-8") if path else _default_path("stopwords.txt").open(encoding="utf-8")
    with source as fh:
        return {line.strip().lower() for line in fh if line.strip()}


def load_lexicon(path=None):
    source = open(path, encoding="utf-8") if path else _default_path("lexicon.tsv").open(encoding="utf-8")
    lex = {}
    with source as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            token, valence = line.split("\t")
            lex[token.lower()] = float(valence)
    return lex


def load_cues(path=None):
    source = open(path, encoding="utf-8") if path else _default_path("clickbait_cues.json").open(encoding="utf-8")
    with source as fh:
        return json.load(fh)


@dataclass
class EnrichConfig:
    short_window_days: int = 7
    long_window_days: int = 365
    burst_factor: float = 3.0
    pmi_floor: float = -10.0
    lexicon_path: str | None = None
    stopwords_path: str | None = None
    unigrams_path: str | None = None
    bigrams_path: str | None = None

    def __post_init__(self):
        if self.short_window_days < 1 or self.long_window_days < 1:
            raise ValueError("window lengths must be >= 1 day")
        if self.burst_factor <= 1:
            raise ValueError("burst_factor must be > 1")


@dataclass
class EntityMention:
    surface: str
    token_span: tuple
    entity: object


@dataclass
class ProminenceStats:
    short_views: int = 0
    long_views: int = 0
    short_daily_mean: float = 0.0
    long_daily_mean: float = 0.0
    burst: bool = False


@dataclass
class SentimentScores:
    polarity: float = 0.0
    emotionality: float = 0.0
    coverage: float = 0.0


@dataclass
class SurpriseScore:
    value: float = 0.0
    n_bigrams: int = 0


CUE_NAMES = [
    "starts_with_number", "contains_number", "second_person", "demonstrative",
    "question_word_start", "superlative", "exclaim_or_question_mark",
    "curiosity_gap_phrase",
]


@dataclass
class ClickbaitFeatures:
    cues: dict = field(default_factory=dict)
    score: float = 0.0


@dataclass
class FeatureVector:
    prom_short_log: float = 0.0
    prom_long_log: float = 0.0
    burst01: float = 0.0
    n_entities: float = 0.0
    sent_polarity: float = 0.0
    sent_emotionality: float = 0.0
    sent_coverage: float = 0.0
    surprise: float = 0.0
    clickbait: float = 0.0
    word_count: float = 0.0
    avg_word_length: float = 0.0
    stopword_ratio: float = 0.0

    def as_list(self):
        return [getattr(self, name) for name in FEATURE_NAMES]


assert [f.name for f in fields(FeatureVector)] == FEATURE_NAMES


class BigramModel:
    """Maximum-likelihood unigram/bigram counts over a background corpus."""

    def __init__(self, unigrams=None, bigrams=None):
        self.unigrams = dict(unigrams or {})
        self.bigrams = dict(bigrams or {})
        self.total_unigrams = sum(self.unigrams.values())
        self.total_bigrams = sum(self.bigrams.values())

    @classmethod
    def from_sequences(cls, sequences):
        """Build counts from token sequences (stopwords already removed)."""
        unigrams, bigrams = {}, {}
        for seq in sequences:
            for tok in seq:
                unigrams[tok] = unigrams.get(tok, 0) + 1
            for w1, w2 in zip(seq, seq[1:]):
                bigrams[(w1, w2)] = bigrams.get((w1, w2), 0) + 1
        return cls(unigrams, bigrams)

    @classmethod
    def from_files(cls, unigrams_path, bigrams_path):
        unigrams, bigrams = {}, {}
        with open(unigrams_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    tok, count = line.split("\t")
                    unigrams[tok] = int(count)
        with open(bigrams_path, encoding="utf-8") as fh:
            for line in fh:
                line = line.rstrip("\n")
                if line:
                    w1, w2, count = line.split("\t")
                    bigrams[(w1, w2)] = int(count)
        return cls(unigrams, bigrams)

    def save(self, unigrams_path, bigrams_path):
        with open(unigrams_path, "w", encoding="utf-8") as fh:
            for tok in sorted(self.unigrams):
                fh.write(f"{tok}\t{self.unigrams[tok]}\n")
        with open(bigrams_path, "w", encoding="utf-8") as fh:
            for w1, w2 in sorted(self.bigrams):
                fh.write(f"{w1}\t{w2}\t{self.bigrams[(w1, w2)]}\n")

    def pmi(self, w1, w2, floor):
        count = self.bigrams.get((w1, w2), 0)
        c1 = self.unigrams.get(w1, 0)
        c2 = self.unigrams.get(w2, 0)
        if count == 0 or c1 == 0 or c2 == 0 or self.total_bigrams == 0:
            return floor
        p12 = count / self.total_bigrams
        p1 = c1 / self.total_unigrams
        p2 = c2 / self.total_unigrams
        return math.log2(p12 / (p1 * p2))


def content_tokens(headline, stopwords):
    return [t.lower() for t in tokenize(headline) if t.lower() not in stopwords]


def extract_entities(headline, stopwords, resolver):
    """Find maximal runs of capitalized tokens and resolve them to wiki pages.

    Runs made only of stopwords are dropped; unresolved runs are dropped.
    """
    tokens = tokenize(headline)
    mentions = []
    i = 0
    while i < len(tokens):
        if tokens[i][0].isupper():
            j = i
            while j < len(tokens) and tokens[j][0].isupper():
                j += 1
            run = tokens[i:j]
            if not all(t.lower() in stopwords for t in run):
                surface = " ".join(run)
                entity = resolver.resolve_entity(surface)
                if entity.resolved:
                    mentions.append(EntityMention(surface=surface,
                                                 token_span=(i, j),
                                                 entity=entity))
            i = j
        else:
            i += 1
    return mentions


def compute_prominence(mentions, pub_date, cfg, pv_source):
    """Aggregate per-entity pre-publication pageviews into headline stats.

    Windows end the day before publication. Headline totals are maxima over
    entities; burst is judged on the entity with the largest short total.
    """
    if not mentions:
        return ProminenceStats()
    short_start = pub_date - timedelta(days=cfg.short_window_days)
    long_start = pub_date - timedelta(days=cfg.long_window_days)
    window_end = pub_date - timedelta(days=1)
    per_entity = []
    for mention in mentions:
        title = mention.entity.title
        short = pv_source.fetch_daily_pageviews(title, short_start, window_end)
        long = pv_source.fetch_daily_pageviews(title, long_start, window_end)
        per_entity.append((short.total(), long.total()))
    short_views = max(s for s, _ in per_entity)
    long_views = max(l for _, l in per_entity)
    burst_short, burst_long = max(per_entity, key=lambda p: p[0])
    short_mean = burst_short / cfg.short_window_days
    long_mean = burst_long / cfg.long_window_days
    if long_mean == 0:
        burst = burst_short > 0
    else:
        burst = short_mean > cfg.burst_factor * long_mean
    return ProminenceStats(
        short_views=short_views,
        long_views=long_views,
        short_daily_mean=short_views / cfg.short_window_days,
        long_daily_mean=long_views / cfg.long_window_days,
        burst=burst,
    )


def compute_sentiment(headline, lexicon, stopwords):
    toks = content_tokens(headline, stopwords)
    matched = [lexicon[t] for t in toks if t in lexicon]
    if not toks or not matched:
        return SentimentScores()
    return SentimentScores(
        polarity=sum(matched) / len(matched),
        emotionality=sum(abs(v) for v in matched) / len(matched),
        coverage=len(matched) / len(toks),
    )


def compute_surprise(headline, model, stopwords, pmi_floor=-10.0):
    """Negated minimum PMI over adjacent content-word bigrams, floored at 0."""
    toks = content_tokens(headline, stopwords)
    pairs = list(zip(toks, toks[1:]))
    if not pairs:
        return SurpriseScore()
    worst = min(model.pmi(w1, w2, pmi_floor) for w1, w2 in pairs)
    return SurpriseScore(value=max(0.0, -worst), n_bigrams=len(pairs))


def _has_digit(token):
    return any(c.isdigit() for c in token)


def compute_clickbait(headline, cues=None):
    cues = cues or load_cues()
    tokens = [t.lower() for t in tokenize(headline)]
    lowered = headline.lower()
    flags = {
        "starts_with_number": bool(tokens) and _has_digit(tokens[0]),
        "contains_number": any(_has_digit(t) for t in tokens),
        "second_person": any(t in cues["second_person"] for t in tokens),
        "demonstrative": any(t in cues["demonstratives"] for t in tokens),
        "question_word_start": bool(tokens) and tokens[0] in cues["question_starts"],
        "superlative": any(t in cues["superlatives"] for t in tokens),
        "exclaim_or_question_mark": "!" in headline or "?" in headline,
        "curiosity_gap_phrase": any(p in lowered for p in cues["curiosity_phrases"]),
    }
    return ClickbaitFeatures(cues=flags, score=sum(flags.values()) / 8.0)


class EnrichResources:
    """Loaded lexicon/stopwords/cues/bigram model plus a pageview source."""

    def __init__(self, cfg, pv_source, bigram_model=None):
        self.cfg = cfg
        self.stopwords = load_stopwords(cfg.stopwords_path)
        self.lexicon = load_lexicon(cfg.lexicon_path)
        self.cues = load_cues()
        if bigram_model is not None:
            self.bigram_model = bigram_model
        elif cfg.unigrams_path and cfg.bigrams_path:
            self.bigram_model = BigramModel.from_files(cfg.unigrams_path,
                                                       cfg.bigrams_path)
        else:
            self.bigram_model = BigramModel()
        self.pv_source = pv_source


def build_background_model(headlines, stopwords):
    """Default background co-occurrence model: the corpus's own headlines."""
    return BigramModel.from_sequences(
        content_tokens(h, stopwords) for h in headlines
    )


def enrich_article(article, res):
    """Compose the full 12-field feature vector for one article."""
    cfg = res.cfg
    mentions = extract_entities(article.headline, res.stopwords, res.pv_source)
    prom = compute_prominence(mentions, article.published_date, cfg, res.pv_source)
    sent = compute_sentiment(article.headline, res.lexicon, res.stopwords)
    surprise = compute_surprise(article.headline, res.bigram_model,
                                res.stopwords, cfg.pmi_floor)
    clickbait = compute_clickbait(article.headline, res.cues)
    tokens = tokenize(article.headline)
    stop_count = sum(1 for t in tokens if t.lower() in res.stopwords)
    return FeatureVector(
        prom_short_log=math.log10(1 + prom.short_views),
        prom_long_log=math.log10(1 + prom.long_views),
        burst01=1.0 if prom.burst else 0.0,
        n_entities=float(len(mentions)),
        sent_polarity=sent.polarity,
        sent_emotionality=sent.emotionality,
        sent_coverage=sent.coverage,
        surprise=surprise.value,
        clickbait=clickbait.score,
        word_count=float(len(tokens)),
        avg_word_length=(sum(len(t) for t in tokens) / len(tokens)) if tokens else 0.0,
        stopword_ratio=(stop_count / len(tokens)) if tokens else 0.0,
    )


def write_features_csv(path, rows):
    """rows: iterable of (article_id, FeatureVector)."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("article_id," + ",".join(FEATURE_NAMES) + "\n")
        for article_id, vec in rows:
            fh.write(article_id + "," + ",".join(repr(v) for v in vec.as_list()) + "\n")


def read_features_csv(path):
    """Returns (article_ids, list of 12-float rows)."""
    ids, rows = [], []
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip().split(",")
        if header[1:] != FEATURE_NAMES:
            raise ValueError("unexpected features.csv header")
        for line in fh:
            line = line.strip()
            if not line:
                continue
            parts = line.split(",")
            ids.append(parts[0])
            rows.append([float(v) for v in parts[1:]])
    return ids, rows
