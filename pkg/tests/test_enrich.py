import math
from datetime import date, timedelta

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from civicrank.corpus import Article
from civicrank.enrich import (FEATURE_NAMES, BigramModel, EnrichConfig,
                              EnrichResources, build_background_model,
                              compute_clickbait, compute_prominence,
                              compute_sentiment, compute_surprise,
                              content_tokens, enrich_article, extract_entities,
                              load_cues, load_stopwords, tokenize)
from civicrank.wikiclient import WikiClient

STOPWORDS = load_stopwords()
CUES = load_cues()


# ---------------------------------------------------------------- entities

def test_extract_entities_resolves_runs(offline_client):
    mentions = extract_entities("Albanese visits Perth", STOPWORDS, offline_client)
    assert [m.surface for m in mentions] == ["Albanese", "Perth"]
    assert mentions[0].token_span == (0, 1)
    assert mentions[1].token_span == (2, 3)


def test_extract_entities_no_capitalized_runs(offline_client):
    assert extract_entities("budget passes quietly", STOPWORDS, offline_client) == []


def test_extract_entities_unresolved_dropped(offline_client):
    assert extract_entities("The End", STOPWORDS, offline_client) == []


def test_stopword_only_run_not_queried(offline_client):
    # "The" alone is a stopword run: dropped without any resolution attempt,
    # so no fixture for it is needed even in offline mode
    assert extract_entities("The budget passes", STOPWORDS, offline_client) == []


# -------------------------------------------------------------- prominence

def _one_entity_mentions(offline_client):
    return extract_entities("Perth", STOPWORDS, offline_client)


def _series(fake_pageviews, short_per_day, long_per_day, cfg, pub):
    days = {}
    for i in range(1, cfg.long_window_days + 1):
        d = (pub - timedelta(days=i)).isoformat()
        days[d] = short_per_day if i <= cfg.short_window_days else long_per_day
    return fake_pageviews({"Perth": days})


def test_burst_true(offline_client, fake_pageviews):
    cfg = EnrichConfig(short_window_days=7, long_window_days=28, burst_factor=3.0)
    pub = date(2025, 7, 10)
    # short mean 200/day; long mean (7*200 + 21*0)/28 = 50; 200 > 3*50
    pv = _series(fake_pageviews, 200, 0, cfg, pub)
    mentions = _one_entity_mentions(offline_client)
    stats = compute_prominence(mentions, pub, cfg, pv)
    assert stats.short_daily_mean == pytest.approx(200)
    assert stats.long_daily_mean == pytest.approx(50)
    assert stats.burst


def test_burst_false(offline_client, fake_pageviews):
    cfg = EnrichConfig(short_window_days=7, long_window_days=28, burst_factor=3.0)
    pub = date(2025, 7, 10)
    pv = _series(fake_pageviews, 50, 50, cfg, pub)
    mentions = _one_entity_mentions(offline_client)
    stats = compute_prominence(mentions, pub, cfg, pv)
    assert not stats.burst  # 50 <= 3 * 50


def test_no_mentions_prominence_zero(fake_pageviews):
    cfg = EnrichConfig()
    stats = compute_prominence([], date(2025, 7, 10), cfg, fake_pageviews({}))
    assert (stats.short_views, stats.long_views, stats.burst) == (0, 0, False)


class _WindowStubSource:
    """Answers the short and long window fetches with fixed totals; lets the
    zero-long-mean boundary be exercised directly."""

    def __init__(self, short_per_day, long_per_day):
        self.short_per_day = short_per_day
        self.long_per_day = long_per_day

    def fetch_daily_pageviews(self, title, start, end):
        from civicrank.wikiclient import PageviewSeries
        days = (end - start).days + 1
        per_day = self.short_per_day if days <= 7 else self.long_per_day
        return PageviewSeries(title=title, start_date=start, end_date=end,
                              daily_views=[per_day] * days)


def test_zero_long_mean_burst_iff_short_positive(offline_client):
    cfg = EnrichConfig(short_window_days=2, long_window_days=30)
    pub = date(2025, 7, 10)
    mentions = _one_entity_mentions(offline_client)
    assert compute_prominence(mentions, pub, cfg, _WindowStubSource(5, 0)).burst
    assert not compute_prominence(mentions, pub, cfg, _WindowStubSource(0, 0)).burst


def test_burst_monotone_under_short_scaling(offline_client, fake_pageviews):
    rng = np.random.RandomState(7)
    cfg = EnrichConfig(short_window_days=3, long_window_days=10, burst_factor=3.0)
    pub = date(2025, 7, 20)
    mentions = _one_entity_mentions(offline_client)
    for _ in range(50):
        days = {}
        for i in range(1, cfg.long_window_days + 1):
            days[(pub - timedelta(days=i)).isoformat()] = int(rng.randint(0, 50))
        before = compute_prominence(mentions, pub, cfg, fake_pageviews({"Perth": days}))
        c = 1 + rng.rand() * 5
        scaled = dict(days)
        for i in range(1, cfg.short_window_days + 1):
            key = (pub - timedelta(days=i)).isoformat()
            scaled[key] = int(math.ceil(days[key] * c))
        after = compute_prominence(mentions, pub, cfg, fake_pageviews({"Perth": scaled}))
        if before.burst:
            assert after.burst


# --------------------------------------------------------------- sentiment

def test_sentiment_hand_example():
    scores = compute_sentiment("Good news", {"good": 0.7}, STOPWORDS)
    assert scores.polarity == pytest.approx(0.7)
    assert scores.emotionality == pytest.approx(0.7)
    assert scores.coverage == pytest.approx(0.5)


def test_sentiment_mixed():
    lex = {"good": 0.7, "terrible": -0.8}
    scores = compute_sentiment("terrible good", lex, STOPWORDS)
    assert scores.polarity == pytest.approx(-0.05)


def test_sentiment_no_match():
    scores = compute_sentiment("quarterly report issued", {"good": 0.7}, STOPWORDS)
    assert (scores.polarity, scores.emotionality, scores.coverage) == (0, 0, 0)


@given(st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd", "Zs", "Po")), max_size=80))
def test_sentiment_bounds(headline):
    lex = {"good": 0.7, "bad": -0.6, "report": 0.1}
    s = compute_sentiment(headline, lex, STOPWORDS)
    assert -1 <= s.polarity <= 1
    assert 0 <= s.emotionality <= 1
    assert 0 <= s.coverage <= 1
    if s.coverage == 0:
        assert s.polarity == 0 and s.emotionality == 0


# ---------------------------------------------------------------- surprise

def brute_force_surprise(headline, model, stopwords, floor):
    """Independent oracle: enumerate adjacent content pairs and compute PMI
    from raw counts."""
    toks = [t.lower() for t in tokenize(headline) if t.lower() not in stopwords]
    pairs = list(zip(toks, toks[1:]))
    if not pairs:
        return 0.0, 0
    pmis = []
    for w1, w2 in pairs:
        c12 = model.bigrams.get((w1, w2), 0)
        c1, c2 = model.unigrams.get(w1, 0), model.unigrams.get(w2, 0)
        if c12 == 0 or c1 == 0 or c2 == 0:
            pmis.append(floor)
        else:
            p12 = c12 / model.total_bigrams
            pmis.append(math.log2(p12 / ((c1 / model.total_unigrams) *
                                         (c2 / model.total_unigrams))))
    return max(0.0, -min(pmis)), len(pairs)


def test_surprise_hand_example():
    model = BigramModel.from_sequences([["a", "b"], ["a", "b"], ["a", "c"]])
    assert model.pmi("a", "b", -10) == pytest.approx(2.0)
    score = compute_surprise("a b", model, set())
    assert score.value == 0.0  # max(0, -2.0)
    assert score.n_bigrams == 1


def test_surprise_floor():
    model = BigramModel.from_sequences([["a", "b"]])
    score = compute_surprise("x y", model, set(), pmi_floor=-10.0)
    assert score.value == 10.0


def test_surprise_one_word():
    model = BigramModel.from_sequences([["a", "b"]])
    score = compute_surprise("word", model, set())
    assert (score.value, score.n_bigrams) == (0.0, 0)


def test_surprise_matches_brute_force_on_random_corpora():
    rng = np.random.RandomState(42)
    vocab = [f"w{i}" for i in range(8)]
    for _ in range(50):
        n_tokens = rng.randint(2, 51)
        seq = [vocab[i] for i in rng.randint(0, len(vocab), size=n_tokens)]
        model = BigramModel.from_sequences([seq])
        headline = " ".join(vocab[i] for i in rng.randint(0, len(vocab), size=6))
        got = compute_surprise(headline, model, set())
        want_value, want_n = brute_force_surprise(headline, model, set(), -10.0)
        assert got.value == want_value
        assert got.n_bigrams == want_n


# --------------------------------------------------------------- clickbait

def test_clickbait_curiosity_example():
    feats = compute_clickbait("You Won't Believe These 10 Tricks", CUES)
    true_cues = {k for k, v in feats.cues.items() if v}
    assert true_cues == {"contains_number", "second_person", "demonstrative",
                         "curiosity_gap_phrase"}
    assert feats.score == 0.5


def test_clickbait_plain_headline():
    assert compute_clickbait("Parliament passes budget bill", CUES).score == 0


def test_clickbait_list_example():
    feats = compute_clickbait("10 best beaches", CUES)
    true_cues = {k for k, v in feats.cues.items() if v}
    assert true_cues == {"starts_with_number", "contains_number", "superlative"}
    assert feats.score == pytest.approx(3 / 8)


@given(st.text(max_size=100))
def test_clickbait_score_identity(headline):
    feats = compute_clickbait(headline, CUES)
    assert feats.score == sum(feats.cues.values()) / 8
    assert len(feats.cues) == 8


# ------------------------------------------------------------- composition

def test_enrich_article_empty_cases(offline_client):
    cfg = EnrichConfig()
    res = EnrichResources(cfg, offline_client, bigram_model=BigramModel())
    article = Article(id="a1", headline="budget", byline=[],
                      published_date=date(2025, 7, 1), url="https://x.au/a")
    vec = enrich_article(article, res)
    assert vec.prom_short_log == 0
    assert vec.n_entities == 0
    assert vec.sent_polarity == 0
    assert vec.word_count == 1
    assert vec.stopword_ratio == 0


def test_enrich_article_shape_and_determinism(offline_client, fixtures_dir):
    from civicrank.wikiclient import write_search_fixture
    write_search_fixture(fixtures_dir, "You Won't Believe These", [])
    write_search_fixture(fixtures_dir, "Tricks", [])
    cfg = EnrichConfig()
    res = EnrichResources(cfg, offline_client, bigram_model=BigramModel())
    article = Article(id="a2", headline="You Won't Believe These 10 Tricks",
                      byline=[], published_date=date(2025, 7, 1),
                      url="https://x.au/b")
    v1 = enrich_article(article, res)
    v2 = enrich_article(article, res)
    assert v1 == v2
    values = v1.as_list()
    assert len(values) == 12
    assert all(math.isfinite(v) for v in values)


def test_feature_order_fixed():
    assert FEATURE_NAMES == [
        "prom_short_log", "prom_long_log", "burst01", "n_entities",
        "sent_polarity", "sent_emotionality", "sent_coverage",
        "surprise", "clickbait", "word_count", "avg_word_length",
        "stopword_ratio",
    ]


def test_background_model_roundtrip(tmp_path):
    model = build_background_model(["alpha beta gamma", "alpha beta"], set())
    uni, bi = tmp_path / "u.tsv", tmp_path / "b.tsv"
    model.save(uni, bi)
    loaded = BigramModel.from_files(uni, bi)
    assert loaded.unigrams == model.unigrams
    assert loaded.bigrams == model.bigrams
